#include "skillops/library.hpp"

#include <algorithm>
#include <set>

#include "skillops/error.hpp"

namespace skillops {

SkillId adapter_id(const SkillId& src, const SkillId& dst)
{
    return SkillId("adapter-" + src.str() + "-to-" + dst.str());
}

AdapterRecord make_adapter(const SkillContract& src, const SkillContract& dst)
{
    AdapterRecord a;
    a.id = adapter_id(src.id, dst.id);
    a.src = src.id;
    a.dst = dst.id;
    a.preconditions = src.artifact_types;
    a.artifact_types = dst.preconditions;
    const bool subset = std::includes(dst.preconditions.begin(), dst.preconditions.end(),
                                      a.artifact_types.begin(), a.artifact_types.end());
    if (a.artifact_types.empty() || !subset) {
        throw Error(ErrorCode::AdapterTypeUnsatisfiable,
                    "no adapter output satisfies the preconditions of '" + dst.id.str() + "'");
    }
    return a;
}

SkillContract adapter_contract(const AdapterRecord& adapter)
{
    SkillContract c;
    c.id = adapter.id;
    c.goal = "adapt:" + adapter.src.str() + ":" + adapter.dst.str();
    c.preconditions = adapter.preconditions;
    c.artifact_types = adapter.artifact_types;
    std::string from;
    for (const auto& t : adapter.preconditions) {
        from += (from.empty() ? "" : ", ") + t.str();
    }
    std::string to;
    for (const auto& t : adapter.artifact_types) {
        to += (to.empty() ? "" : ", ") + t.str();
    }
    c.body = "Convert [" + from + "] produced by " + adapter.src.str() + " into [" + to + "] required by " +
             adapter.dst.str() + ".";
    c.validator_kind = ValidatorKind::checklist;
    c.checklist = {std::string(kCanonicalChecklistItem)};
    c.tags = {"adapter"};
    return c;
}

const SkillContract* Library::find(const SkillId& id) const
{
    auto it = std::find_if(skills.begin(), skills.end(), [&](const SkillContract& s) { return s.id == id; });
    return it == skills.end() ? nullptr : &*it;
}

SkillContract* Library::find(const SkillId& id)
{
    auto it = std::find_if(skills.begin(), skills.end(), [&](const SkillContract& s) { return s.id == id; });
    return it == skills.end() ? nullptr : &*it;
}

std::optional<std::size_t> Library::index_of(const SkillId& id) const
{
    for (std::size_t i = 0; i < skills.size(); ++i) {
        if (skills[i].id == id) {
            return i;
        }
    }
    return std::nullopt;
}

bool Library::has_adapter(const SkillId& src, const SkillId& dst) const
{
    return std::any_of(adapters.begin(), adapters.end(),
                       [&](const AdapterRecord& a) { return a.src == src && a.dst == dst; });
}

void sort_adapters(std::vector<AdapterRecord>& adapters)
{
    std::sort(adapters.begin(), adapters.end(), [](const AdapterRecord& a, const AdapterRecord& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    adapters.erase(std::unique(adapters.begin(), adapters.end(),
                               [](const AdapterRecord& a, const AdapterRecord& b) {
                                   return a.src == b.src && a.dst == b.dst;
                               }),
                   adapters.end());
}

void check_library(const Library& lib)
{
    std::set<SkillId> ids;
    for (const auto& s : lib.skills) {
        if (!ids.insert(s.id).second) {
            throw Error(ErrorCode::DuplicateSkillId, "skill id '" + s.id.str() + "' appears twice");
        }
        check_invariants(s);
    }
    for (const auto& a : lib.adapters) {
        if (!ids.contains(a.src) || !ids.contains(a.dst)) {
            throw Error(ErrorCode::CorruptLibrary, "adapter '" + a.id.str() + "' references a missing skill");
        }
    }
}

std::string library_digest(const Library& lib)
{
    std::string blob;
    for (const auto& s : lib.skills) {
        blob += serialize_skill_file(s);
        blob.push_back('\0');
        for (const auto* dir : {&s.artifact_dirs.scripts, &s.artifact_dirs.references, &s.artifact_dirs.assets}) {
            for (const auto& f : *dir) {
                blob += f.name;
                blob.push_back('\0');
                blob += sha256_hex(f.content);
                blob.push_back('\0');
            }
            blob.push_back('\1');
        }
        auto prov = lib.provenance.find(s.id);
        blob += prov == lib.provenance.end() ? std::string() : prov->second;
        blob.push_back('\2');
    }
    for (const auto& a : lib.adapters) {
        blob += serialize_skill_file(adapter_contract(a));
        blob.push_back('\3');
    }
    return sha256_hex(blob);
}

}  // namespace skillops
