#include "skillops/library_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "skillops/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace skillops {

namespace {

constexpr const char* kManifest = "manifest.json";

std::vector<ArtifactFile> read_dir(const fs::path& dir)
{
    std::vector<ArtifactFile> out;
    if (!fs::is_directory(dir)) {
        return out;
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            out.push_back({entry.path().filename().string(), read_file(entry.path())});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void write_dir(const fs::path& dir, const std::vector<ArtifactFile>& files)
{
    if (files.empty()) {
        return;
    }
    fs::create_directories(dir);
    for (const auto& f : files) {
        if (f.name.empty() || f.name.find('/') != std::string::npos || f.name == "." || f.name == "..") {
            throw Error(ErrorCode::CorruptLibrary, "artifact file name '" + f.name + "' is not a plain name");
        }
        write_file(dir / f.name, f.content);
    }
}

TypeSet tags_from(const json& j, const std::string& what)
{
    if (!j.is_array()) {
        throw Error(ErrorCode::CorruptLibrary, "manifest field '" + what + "' must be a list");
    }
    TypeSet out;
    for (const auto& t : j) {
        out.insert(TypeTag(t.get<std::string>()));
    }
    return out;
}

json tags_to(const TypeSet& s)
{
    json out = json::array();
    for (const auto& t : s) {
        out.push_back(t.str());
    }
    return out;
}

}  // namespace

std::string read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot read '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    }
    out << content;
    if (!out) {
        throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
    }
}

SkillContract load_skill_dir(const fs::path& dir)
{
    auto s = parse_skill_file(read_file(dir / "SKILL.md"));
    s.artifact_dirs.scripts = read_dir(dir / "scripts");
    s.artifact_dirs.references = read_dir(dir / "references");
    s.artifact_dirs.assets = read_dir(dir / "assets");
    return s;
}

Library load_library(const fs::path& dir)
{
    const auto manifest_path = dir / kManifest;
    if (!fs::exists(manifest_path)) {
        throw Error(ErrorCode::Io, "no manifest.json in '" + dir.string() + "'");
    }
    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptLibrary, std::string("manifest.json: ") + e.what());
    }
    Library lib;
    try {
        if (m.value("format_version", 0) != kManifestFormatVersion) {
            throw Error(ErrorCode::CorruptLibrary, "unsupported manifest format_version");
        }
        for (const auto& entry : m.at("skills")) {
            const SkillId id(entry.at("id").get<std::string>());
            const fs::path rel = entry.at("path").get<std::string>();
            auto s = load_skill_dir(dir / rel.parent_path());
            if (s.id != id) {
                throw Error(ErrorCode::CorruptLibrary,
                            "manifest entry '" + id.str() + "' points at skill '" + s.id.str() + "'");
            }
            lib.provenance[id] = entry.value("provenance", std::string("clean"));
            lib.skills.push_back(std::move(s));
        }
        for (const auto& a : m.value("adapters", json::array())) {
            AdapterRecord rec;
            rec.src = SkillId(a.at("src").get<std::string>());
            rec.dst = SkillId(a.at("dst").get<std::string>());
            rec.id = SkillId(a.value("id", adapter_id(rec.src, rec.dst).str()));
            rec.preconditions = tags_from(a.at("preconditions"), "preconditions");
            rec.artifact_types = tags_from(a.at("artifact_types"), "artifact_types");
            lib.adapters.push_back(std::move(rec));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptLibrary, std::string("manifest.json: ") + e.what());
    }
    sort_adapters(lib.adapters);
    check_library(lib);
    return lib;
}

void save_library(const Library& lib, const fs::path& dir)
{
    check_library(lib);
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) {
            throw Error(ErrorCode::Io, "'" + dir.string() + "' exists and is not a directory");
        }
        const bool is_library = fs::exists(dir / kManifest);
        if (!is_library && !fs::is_empty(dir)) {
            throw Error(ErrorCode::Io, "refusing to write a library into non-empty '" + dir.string() + "'");
        }
        if (is_library) {
            fs::remove_all(dir / "skills");
            fs::remove(dir / kManifest);
        }
    }
    fs::create_directories(dir / "skills");

    json skills = json::array();
    for (const auto& s : lib.skills) {
        const fs::path rel = fs::path("skills") / s.id.str() / "SKILL.md";
        const auto sdir = dir / rel.parent_path();
        fs::create_directories(sdir);
        write_file(dir / rel, serialize_skill_file(s));
        write_dir(sdir / "scripts", s.artifact_dirs.scripts);
        write_dir(sdir / "references", s.artifact_dirs.references);
        write_dir(sdir / "assets", s.artifact_dirs.assets);
        auto prov = lib.provenance.find(s.id);
        skills.push_back({{"id", s.id.str()},
                          {"path", rel.generic_string()},
                          {"provenance", prov == lib.provenance.end() ? std::string("clean") : prov->second}});
    }
    json adapters = json::array();
    for (const auto& a : lib.adapters) {
        adapters.push_back({{"id", a.id.str()},
                            {"src", a.src.str()},
                            {"dst", a.dst.str()},
                            {"preconditions", tags_to(a.preconditions)},
                            {"artifact_types", tags_to(a.artifact_types)}});
    }
    json m = {{"format_version", kManifestFormatVersion}, {"skills", skills}, {"adapters", adapters}};
    write_file(dir / kManifest, m.dump(2) + "\n");
}

}  // namespace skillops
