#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skillops/contract.hpp"

namespace skillops {

/// A type-conversion shim bridging one dep edge whose endpoint types are not
/// directly compatible. Stored beside the skills, never counted as one.
struct AdapterRecord {
    SkillId id;
    SkillId src;
    SkillId dst;
    TypeSet preconditions;   // A of src at creation time
    TypeSet artifact_types;  // must be a subset of P of dst

    auto operator<=>(const AdapterRecord&) const = default;
};

inline constexpr std::string_view kCanonicalChecklistItem = "artifact type matches declared artifact.type";

/// Builds the adapter for src -> dst: consumes A_src and emits P_dst. Throws
/// Error(AdapterTypeUnsatisfiable) when no non-empty output can satisfy P_dst.
[[nodiscard]] AdapterRecord make_adapter(const SkillContract& src, const SkillContract& dst);

/// The full skill contract an adapter stands for (goal "adapt:<src>:<dst>").
[[nodiscard]] SkillContract adapter_contract(const AdapterRecord& adapter);

[[nodiscard]] SkillId adapter_id(const SkillId& src, const SkillId& dst);

struct Library {
    std::vector<SkillContract> skills;
    std::vector<AdapterRecord> adapters;  // sorted by (src, dst)
    std::map<SkillId, std::string> provenance;

    [[nodiscard]] const SkillContract* find(const SkillId& id) const;
    [[nodiscard]] SkillContract* find(const SkillId& id);
    [[nodiscard]] std::optional<std::size_t> index_of(const SkillId& id) const;
    [[nodiscard]] bool has_adapter(const SkillId& src, const SkillId& dst) const;
    [[nodiscard]] std::size_t size() const noexcept { return skills.size(); }

    bool operator==(const Library&) const = default;
};

/// Throws DuplicateSkillId or CorruptLibrary if the library breaks an invariant.
void check_library(const Library& lib);

void sort_adapters(std::vector<AdapterRecord>& adapters);

/// Content digest over skills (in order), artifacts, adapters and provenance.
[[nodiscard]] std::string library_digest(const Library& lib);

}  // namespace skillops
