#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "skillops/cgpd.hpp"
#include "skillops/health.hpp"
#include "skillops/hseg.hpp"
#include "skillops/library.hpp"
#include "skillops/trace.hpp"

namespace skillops {

enum class ActionKind { merge, repair, retire, add_validator, add_adapter, instantiate };

inline constexpr std::array<ActionKind, 6> kActionKinds = {ActionKind::merge,         ActionKind::repair,
                                                           ActionKind::retire,        ActionKind::add_validator,
                                                           ActionKind::add_adapter,   ActionKind::instantiate};

std::string_view to_string(ActionKind kind);

namespace action {

struct Merge {
    SkillId keep;
    SkillId drop;
    bool operator==(const Merge&) const = default;
};
struct Repair {
    SkillId skill;
    std::optional<SkillId> source_sibling;
    bool operator==(const Repair&) const = default;
};
struct Retire {
    SkillId skill;
    bool operator==(const Retire&) const = default;
};
struct AddValidator {
    SkillId skill;
    std::optional<SkillId> source_sibling;
    bool operator==(const AddValidator&) const = default;
};
struct AddAdapter {
    SkillId src;
    SkillId dst;
    bool operator==(const AddAdapter&) const = default;
};
struct Instantiate {
    SkillId skill;
    std::map<std::string, std::string> bindings;
    bool operator==(const Instantiate&) const = default;
};

}  // namespace action

using ActionOp = std::variant<action::Merge, action::Repair, action::Retire, action::AddValidator,
                              action::AddAdapter, action::Instantiate>;

struct MaintenanceAction {
    ActionOp op;
    std::string reason;   // rule that fired
    std::string outcome;  // filled in when applied: "applied" or "no-op:<why>"

    [[nodiscard]] ActionKind kind() const { return static_cast<ActionKind>(op.index()); }
    /// The skill the action is about (keep for merge, src for add_adapter).
    [[nodiscard]] const SkillId& subject() const;

    bool operator==(const MaintenanceAction&) const = default;
};

struct MaintenanceConfig {
    double gate = 0.5;  // Θ_maint: maintain only when debt = 1 - H reaches it
    bool force = true;
    double theta_r = 0.5;
    double theta_f = 0.5;
    double theta_u = 0.5;
    double theta_risk = 0.5;
    double theta_valid = 0.5;
    HsegConfig graph;
    std::optional<CgpdConfig> cgpd;
    HealthWeights weights;
    std::size_t window = kDefaultWindow;

    /// Throws Error(ConfigInvalid).
    void validate() const;
};

struct MaintenanceReport {
    std::size_t size_before = 0;
    std::size_t size_after = 0;
    std::map<ActionKind, std::size_t> action_counts;
    std::vector<MaintenanceAction> actions;
    double H_before = 0.0;
    double H_after = 0.0;
    std::size_t external_model_calls = 0;
    bool skipped = false;
    std::size_t noop_actions = 0;
    /// Red pairs (ascending) left in place because their bodies differ and
    /// their cluster stayed under theta_r.
    std::vector<std::pair<SkillId, SkillId>> red_unmerged;
    std::optional<RiskMap> risk;

    [[nodiscard]] std::size_t count(ActionKind kind) const;
};

struct MaintenanceResult {
    Library library;
    MaintenanceReport report;
};

/// Deterministic Phase-3 rule set. Later rules see the survivors of earlier
/// ones: repairs, retires and validators skip merged-away skills, and adapters
/// are only planned between survivors not already bridged.
/// Order: merge, repair, retire, add_validator, add_adapter; ascending ids within.
[[nodiscard]] std::vector<MaintenanceAction> plan_actions(const Library& lib, const Hseg& g,
                                                          const LibraryHealthReport& health,
                                                          const std::optional<RiskMap>& risk,
                                                          const MaintenanceConfig& cfg);

/// Applies one action in place and returns its outcome string. Siblings named
/// by repair/add_validator (or found by search) are looked up in `lib` first,
/// then in `sibling_pool` (typically the pre-pass snapshot).
std::string apply_action_in_place(Library& lib, const MaintenanceAction& action,
                                  const Library* sibling_pool = nullptr);

[[nodiscard]] Library apply_action(Library lib, const MaintenanceAction& action,
                                   const Library* sibling_pool = nullptr);

/// One library-time pass: diagnose, optionally propagate risk, then apply the
/// planned actions to a working copy. Never mutates `lib`.
[[nodiscard]] MaintenanceResult run_maintenance(const Library& lib, const ExecutionTrace& trace,
                                                const MaintenanceConfig& cfg = {});

/// Dep edges that are neither comp nor bridged by an adapter with A ⊆ P_dst.
[[nodiscard]] std::vector<std::pair<SkillId, SkillId>> uncovered_dep_edges(const Library& lib,
                                                                           const HsegConfig& cfg = {});

/// Pairs of distinct skills sharing a body hash.
[[nodiscard]] std::size_t body_hash_collisions(const Library& lib);

}  // namespace skillops
