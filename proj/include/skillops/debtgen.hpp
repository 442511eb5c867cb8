#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "skillops/contract.hpp"
#include "skillops/library.hpp"

namespace skillops {

enum class DegradationType {
    redundant_clone,
    stale_clone,
    missing_validator,
    missing_artifact,
    wrong_interface,
    over_specialized,
};

inline constexpr std::array<DegradationType, 6> kDegradationTypes = {
    DegradationType::redundant_clone,  DegradationType::stale_clone,     DegradationType::missing_validator,
    DegradationType::missing_artifact, DegradationType::wrong_interface, DegradationType::over_specialized,
};

std::string_view to_string(DegradationType t);
/// Throws Error(ConfigInvalid) for an unknown name.
DegradationType degradation_from_string(std::string_view name);

/// Type vocabulary of synthesized skills: 16 everyday tags plus 4 legacy ones
/// that only hub skills consume.
inline constexpr std::array<std::string_view, 16> kRegularTags = {
    "text",  "json",  "csv", "html",     "pdf",   "xml",   "markdown", "image",
    "table", "yaml",  "sql", "chart",    "audio", "archive", "log",    "code",
};
inline constexpr std::array<std::string_view, 4> kLegacyTags = {"legacy-blob", "legacy-dbf", "legacy-rtf",
                                                                "legacy-xls"};

inline constexpr std::size_t kDefaultSourceSize = 229;

struct GenConfig {
    std::uint64_t seed = 42;
    std::size_t target_size = 500;
    double noise_rate = 0.6;
    Library source;
    /// Relative weights per degradation type; uniform when absent.
    std::optional<std::array<double, 6>> type_weights;
};

/// Applies one degradation. The variant always gets a fresh id
/// "<id>-<kind>-<hex>". Pure in (contract, dtype, seed).
[[nodiscard]] SkillContract inject(const SkillContract& contract, DegradationType dtype, std::uint64_t seed);

/// Exactly N skills: ceil(noise_rate * N) degraded variants of clean skills and
/// the rest clean, cycling the source with "-copy<k>" ids once it runs out.
/// Throws Error(ConfigInvalid).
[[nodiscard]] Library build_library(const GenConfig& cfg);

/// n clean contracts over the fixed tag vocabulary, deterministic per seed.
[[nodiscard]] Library synth_source(std::size_t n, std::uint64_t seed);

/// ceil(rate * n) with a guard against floating round-up.
[[nodiscard]] std::size_t degraded_count(std::size_t n, double rate);

/// The stress-test noise rate for a library scale, if that scale is tabulated.
[[nodiscard]] std::optional<double> noise_schedule(std::size_t n);

struct Composition {
    std::size_t clean = 0;
    std::size_t degraded = 0;
    std::map<DegradationType, std::size_t> by_type;
};

/// Counts provenance entries ("clean" or "degraded:<type>:<source>").
[[nodiscard]] Composition composition(const Library& lib);

}  // namespace skillops
