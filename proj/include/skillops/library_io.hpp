#pragma once

#include <filesystem>

#include "skillops/library.hpp"

namespace skillops {

inline constexpr int kManifestFormatVersion = 1;

/// Reads a library directory: manifest.json plus skills/<id>/SKILL.md with
/// optional scripts/, references/ and assets/ beside each file.
/// Throws Io, CorruptLibrary, or the contract parse errors of a bad SKILL.md.
[[nodiscard]] Library load_library(const std::filesystem::path& dir);

/// Writes the library so that load_library gives it back unchanged. An
/// existing library at `dir` is replaced; any other non-empty directory is
/// refused with Error(Io).
void save_library(const Library& lib, const std::filesystem::path& dir);

/// Reads one skill directory (SKILL.md and its artifact subdirectories).
[[nodiscard]] SkillContract load_skill_dir(const std::filesystem::path& dir);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace skillops
