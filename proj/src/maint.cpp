#include "skillops/maint.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "skillops/error.hpp"

namespace skillops {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool same_interface(const SkillContract& a, const SkillContract& b)
{
    return a.preconditions == b.preconditions && a.artifact_types == b.artifact_types;
}

SkillContract& require_skill(Library& lib, const SkillId& id)
{
    auto* s = lib.find(id);
    if (s == nullptr) {
        throw Error(ErrorCode::UnknownSkillId, "skill '" + id.str() + "' is not in the library");
    }
    return *s;
}

void erase_skill(Library& lib, const SkillId& id)
{
    auto it = std::find_if(lib.skills.begin(), lib.skills.end(), [&](const SkillContract& s) { return s.id == id; });
    lib.skills.erase(it);
    lib.provenance.erase(id);
}

/// Rebuilds an adapter against the current endpoint contracts; nullopt when
/// the endpoints collapsed into one skill or the output cannot be satisfied.
std::optional<AdapterRecord> rebase_adapter(const SkillContract& src, const SkillContract& dst)
{
    if (src.id == dst.id || dst.preconditions.empty()) {
        return std::nullopt;
    }
    return make_adapter(src, dst);
}

bool can_contribute_artifacts(const SkillContract& target, const SkillContract& sibling)
{
    return (target.artifact_dirs.scripts.empty() && !sibling.artifact_dirs.scripts.empty()) ||
           (target.artifact_dirs.references.empty() && !sibling.artifact_dirs.references.empty());
}

/// First candidate (ascending id) satisfying `pred`, searched in lib then pool.
template <typename Pred>
const SkillContract* find_sibling(const Library& lib, const Library* pool, const SkillContract& target, Pred pred)
{
    const SkillContract* best = nullptr;
    for (const Library* source : {&lib, pool}) {
        if (source == nullptr) {
            continue;
        }
        for (const auto& s : source->skills) {
            if (s.id != target.id && pred(s) && (best == nullptr || s.id < best->id)) {
                best = &s;
            }
        }
        if (best != nullptr) {
            return best;
        }
    }
    return nullptr;
}

const SkillContract* lookup(const Library& lib, const Library* pool, const SkillId& id)
{
    if (const auto* s = lib.find(id)) {
        return s;
    }
    return pool != nullptr ? pool->find(id) : nullptr;
}

std::string apply_merge(Library& lib, const action::Merge& m)
{
    if (m.keep == m.drop) {
        throw Error(ErrorCode::IllegalMerge, "cannot merge '" + m.keep.str() + "' into itself");
    }
    const auto& keep = require_skill(lib, m.keep);
    const auto& drop = require_skill(lib, m.drop);
    if (!same_interface(keep, drop) && body_hash(keep) != body_hash(drop)) {
        throw Error(ErrorCode::IllegalMerge, "'" + m.keep.str() + "' and '" + m.drop.str() +
                                                 "' share neither a red edge nor a body hash");
    }
    erase_skill(lib, m.drop);

    std::vector<AdapterRecord> remapped;
    for (auto a : lib.adapters) {
        const SkillId src = a.src == m.drop ? m.keep : a.src;
        const SkillId dst = a.dst == m.drop ? m.keep : a.dst;
        if (src == a.src && dst == a.dst) {
            remapped.push_back(std::move(a));
            continue;
        }
        if (auto rebased = rebase_adapter(*lib.find(src), *lib.find(dst))) {
            remapped.push_back(std::move(*rebased));
        }
    }
    sort_adapters(remapped);
    lib.adapters = std::move(remapped);
    return "applied";
}

std::string apply_repair(Library& lib, const action::Repair& r, const Library* pool, bool search)
{
    auto& target = require_skill(lib, r.skill);
    const SkillContract* sibling = nullptr;
    if (r.source_sibling) {
        sibling = lookup(lib, pool, *r.source_sibling);
    } else if (search) {
        const auto hash = body_hash(target);
        sibling = find_sibling(lib, pool, target, [&](const SkillContract& s) {
            return body_hash(s) == hash && can_contribute_artifacts(target, s);
        });
    }
    if (sibling == nullptr) {
        return "no-op:no-sibling";
    }
    bool changed = false;
    if (target.artifact_dirs.scripts.empty() && !sibling->artifact_dirs.scripts.empty()) {
        target.artifact_dirs.scripts = sibling->artifact_dirs.scripts;
        changed = true;
    }
    if (target.artifact_dirs.references.empty() && !sibling->artifact_dirs.references.empty()) {
        target.artifact_dirs.references = sibling->artifact_dirs.references;
        changed = true;
    }
    return changed ? "applied" : "no-op:nothing-missing";
}

std::string apply_retire(Library& lib, const action::Retire& r)
{
    const auto& target = require_skill(lib, r.skill);
    bool duplicate = std::any_of(lib.skills.begin(), lib.skills.end(), [&](const SkillContract& s) {
        return s.id != target.id && same_interface(s, target);
    });
    if (!duplicate) {
        const auto hash = body_hash(target);
        duplicate = std::any_of(lib.skills.begin(), lib.skills.end(),
                                [&](const SkillContract& s) { return s.id != target.id && body_hash(s) == hash; });
    }
    if (!duplicate) {
        throw Error(ErrorCode::RetireRequiresDuplicate, "'" + r.skill.str() + "' has no duplicate to fall back on");
    }
    erase_skill(lib, r.skill);
    std::erase_if(lib.adapters, [&](const AdapterRecord& a) { return a.src == r.skill || a.dst == r.skill; });
    return "applied";
}

std::string apply_add_validator(Library& lib, const action::AddValidator& v, const Library* pool, bool search)
{
    auto& target = require_skill(lib, v.skill);
    if (target.has_validator()) {
        return "no-op:already-validated";
    }
    const SkillContract* sibling = nullptr;
    if (v.source_sibling) {
        sibling = lookup(lib, pool, *v.source_sibling);
        if (sibling != nullptr && !sibling->has_validator()) {
            sibling = nullptr;
        }
    } else if (search) {
        const auto hash = body_hash(target);
        sibling = find_sibling(lib, pool, target, [&](const SkillContract& s) {
            return s.has_validator() && (body_hash(s) == hash || same_interface(s, target));
        });
    }
    target.validator_kind = ValidatorKind::checklist;
    if (sibling != nullptr) {
        target.checklist = sibling->checklist;
        return "applied:inherited";
    }
    target.checklist = {std::string(kCanonicalChecklistItem)};
    return "applied:canonical";
}

std::string apply_add_adapter(Library& lib, const action::AddAdapter& a)
{
    const auto& src = require_skill(lib, a.src);
    const auto& dst = require_skill(lib, a.dst);
    if (lib.has_adapter(a.src, a.dst)) {
        return "no-op:already-bridged";
    }
    lib.adapters.push_back(make_adapter(src, dst));
    sort_adapters(lib.adapters);
    return "applied";
}

std::string join_reasons(std::initializer_list<std::pair<bool, const char*>> parts)
{
    std::string out;
    for (auto [on, name] : parts) {
        if (on) {
            out += (out.empty() ? "" : "+") + std::string(name);
        }
    }
    return out;
}

}  // namespace

std::string_view to_string(ActionKind kind)
{
    switch (kind) {
    case ActionKind::merge: return "merge";
    case ActionKind::repair: return "repair";
    case ActionKind::retire: return "retire";
    case ActionKind::add_validator: return "add_validator";
    case ActionKind::add_adapter: return "add_adapter";
    case ActionKind::instantiate: return "instantiate";
    }
    return "?";
}

const SkillId& MaintenanceAction::subject() const
{
    return std::visit(overloaded{
                          [](const action::Merge& m) -> const SkillId& { return m.keep; },
                          [](const action::Repair& r) -> const SkillId& { return r.skill; },
                          [](const action::Retire& r) -> const SkillId& { return r.skill; },
                          [](const action::AddValidator& v) -> const SkillId& { return v.skill; },
                          [](const action::AddAdapter& a) -> const SkillId& { return a.src; },
                          [](const action::Instantiate& i) -> const SkillId& { return i.skill; },
                      },
                      op);
}

void MaintenanceConfig::validate() const
{
    for (double t : {gate, theta_r, theta_f, theta_u, theta_risk, theta_valid}) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw Error(ErrorCode::ConfigInvalid, "maintenance thresholds must lie in [0, 1]");
        }
    }
    if (!(graph.comp_threshold > 0.0 && graph.comp_threshold <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "comp_threshold must lie in (0, 1]");
    }
    if (window == 0) {
        throw Error(ErrorCode::ConfigInvalid, "usage window must be at least 1");
    }
    weights.validate();
    if (cgpd) {
        cgpd->validate();
    }
}

std::size_t MaintenanceReport::count(ActionKind kind) const
{
    auto it = action_counts.find(kind);
    return it == action_counts.end() ? 0 : it->second;
}

std::vector<MaintenanceAction> plan_actions(const Library& lib, const Hseg& g, const LibraryHealthReport& health,
                                            const std::optional<RiskMap>& risk, const MaintenanceConfig& cfg)
{
    const std::size_t n = lib.skills.size();
    std::vector<Hseg::Index> node(n);
    std::vector<BodyHash> hashes(n);
    std::vector<HealthVector> hv(n);
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = lib.skills[i];
        node[i] = g.require(s.id);
        hashes[i] = body_hash(s);
        auto it = health.per_skill.find(s.id);
        if (it == health.per_skill.end()) {
            throw Error(ErrorCode::UnknownSkillId, "health report lacks '" + s.id.str() + "'");
        }
        hv[i] = it->second;
        pos.emplace(s.id.str(), i);
    }
    auto risk_of = [&](std::size_t i) { return risk ? risk->at(lib.skills[i].id) : 0.0; };

    // Ascending-id visiting order shared by every rule.
    std::vector<std::size_t> by_id(n);
    for (std::size_t i = 0; i < n; ++i) {
        by_id[i] = i;
    }
    std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return lib.skills[a].id < lib.skills[b].id; });

    std::vector<bool> alive(n, true);
    std::vector<std::size_t> alias(n);
    for (std::size_t i = 0; i < n; ++i) {
        alias[i] = i;
    }

    auto better_keep = [&](std::size_t a, std::size_t b) {
        if (hv[a].U != hv[b].U) {
            return hv[a].U > hv[b].U;
        }
        return lib.skills[a].id < lib.skills[b].id;
    };

    std::vector<MaintenanceAction> merges;
    auto merge_group = [&](std::vector<std::size_t> members, const char* reason) {
        std::erase_if(members, [&](auto i) { return !alive[i]; });
        if (members.size() < 2) {
            return;
        }
        auto keep = *std::min_element(members.begin(), members.end(), better_keep);
        for (auto d : members) {
            if (d == keep) {
                continue;
            }
            alive[d] = false;
            alias[d] = keep;
            merges.push_back({action::Merge{lib.skills[keep].id, lib.skills[d].id}, reason, {}});
        }
    };

    std::map<BodyHash, std::vector<std::size_t>> by_hash;
    for (auto i : by_id) {
        by_hash[hashes[i]].push_back(i);
    }
    for (const auto& [_, members] : by_hash) {
        merge_group(members, "body-hash-collision");
    }

    std::map<Hseg::Index, std::vector<std::size_t>> by_cluster;
    for (auto i : by_id) {
        by_cluster[g.red_cluster_of(node[i])].push_back(i);
    }
    std::vector<std::pair<SkillId, SkillId>> unmerged;
    for (const auto& [_, members] : by_cluster) {
        if (members.size() < 2) {
            continue;
        }
        const bool above = std::any_of(members.begin(), members.end(), [&](auto i) { return hv[i].R > cfg.theta_r; });
        if (above) {
            merge_group(members, "red-cluster");
        }
    }
    std::sort(merges.begin(), merges.end(), [](const MaintenanceAction& a, const MaintenanceAction& b) {
        const auto& ma = std::get<action::Merge>(a.op);
        const auto& mb = std::get<action::Merge>(b.op);
        return std::tie(ma.keep, ma.drop) < std::tie(mb.keep, mb.drop);
    });
    // Chains (a kept over b, then a dropped for c) cannot occur: a dropped
    // skill never becomes a keep, since alive is checked before each group.
    for (auto& i : alias) {
        while (alias[i] != i) {
            i = alias[i];
        }
    }

    std::vector<MaintenanceAction> repairs;
    for (auto i : by_id) {
        if (!alive[i]) {
            continue;
        }
        const bool failing = hv[i].F > cfg.theta_f;
        const bool risky = risk && risk_of(i) > cfg.theta_risk;
        if (!failing && !risky) {
            continue;
        }
        std::optional<SkillId> sibling;
        for (auto j : by_hash[hashes[i]]) {
            if (j != i && can_contribute_artifacts(lib.skills[i], lib.skills[j])) {
                sibling = lib.skills[j].id;
                break;
            }
        }
        repairs.push_back({action::Repair{lib.skills[i].id, sibling},
                           join_reasons({{failing, "failure-rate"}, {risky, "cgpd-risk"}}),
                           {}});
    }

    std::vector<MaintenanceAction> retires;
    std::map<Hseg::Index, std::size_t> alive_in_cluster;
    for (std::size_t i = 0; i < n; ++i) {
        if (alive[i]) {
            ++alive_in_cluster[g.red_cluster_of(node[i])];
        }
    }
    for (auto i : by_id) {
        if (!alive[i] || !(hv[i].U < cfg.theta_u)) {
            continue;
        }
        // Body-hash siblings are all merged away by now, so the only
        // remaining duplicates share the red cluster.
        auto& count = alive_in_cluster[g.red_cluster_of(node[i])];
        if (count < 2) {
            continue;
        }
        --count;
        alive[i] = false;
        retires.push_back({action::Retire{lib.skills[i].id}, "low-utility-duplicate", {}});
    }

    std::vector<MaintenanceAction> validators;
    for (auto i : by_id) {
        if (!alive[i] || hv[i].G != 1.0) {
            continue;
        }
        std::optional<SkillId> sibling;
        for (auto j : by_hash[hashes[i]]) {
            if (j != i && lib.skills[j].has_validator()) {
                sibling = lib.skills[j].id;
                break;
            }
        }
        if (!sibling) {
            for (auto j : by_cluster[g.red_cluster_of(node[i])]) {
                if (j != i && lib.skills[j].has_validator()) {
                    sibling = lib.skills[j].id;
                    break;
                }
            }
        }
        const bool risky = risk && risk_of(i) > cfg.theta_valid;
        validators.push_back({action::AddValidator{lib.skills[i].id, sibling},
                              join_reasons({{true, "validation-gap"}, {risky, "cgpd-risk"}}),
                              {}});
    }

    // Adapter coverage after merges (endpoints remapped) and retires (dropped).
    std::set<std::pair<std::size_t, std::size_t>> covered;
    for (const auto& a : lib.adapters) {
        auto si = pos.find(a.src.str());
        auto di = pos.find(a.dst.str());
        if (si == pos.end() || di == pos.end()) {
            continue;
        }
        auto s = alias[si->second];
        auto d = alias[di->second];
        if (s != d && alive[s] && alive[d] && !lib.skills[d].preconditions.empty()) {
            covered.emplace(s, d);
        }
    }
    std::vector<MaintenanceAction> adapters;
    for (auto i : by_id) {
        if (!alive[i]) {
            continue;
        }
        std::vector<std::size_t> targets;
        for (auto jn : g.out(node[i], EdgeType::dep)) {
            auto j = pos.at(g.nodes()[jn].str());
            if (alive[j] && !g.has_edge(node[i], jn, EdgeType::comp) && !covered.contains({i, j})) {
                targets.push_back(j);
            }
        }
        std::sort(targets.begin(), targets.end(),
                  [&](auto a, auto b) { return lib.skills[a].id < lib.skills[b].id; });
        for (auto j : targets) {
            adapters.push_back({action::AddAdapter{lib.skills[i].id, lib.skills[j].id}, "dep-without-comp", {}});
        }
    }

    std::vector<MaintenanceAction> out;
    out.reserve(merges.size() + repairs.size() + retires.size() + validators.size() + adapters.size());
    for (auto* group : {&merges, &repairs, &retires, &validators, &adapters}) {
        std::move(group->begin(), group->end(), std::back_inserter(out));
    }
    return out;
}

static std::string apply_action_impl(Library& lib, const MaintenanceAction& a, const Library* pool, bool search)
{
    return std::visit(overloaded{
                          [&](const action::Merge& m) { return apply_merge(lib, m); },
                          [&](const action::Repair& r) { return apply_repair(lib, r, pool, search); },
                          [&](const action::Retire& r) { return apply_retire(lib, r); },
                          [&](const action::AddValidator& v) { return apply_add_validator(lib, v, pool, search); },
                          [&](const action::AddAdapter& ad) { return apply_add_adapter(lib, ad); },
                          [&](const action::Instantiate& i) {
                              require_skill(lib, i.skill);
                              return std::string("no-op:task-time-only");
                          },
                      },
                      a.op);
}

std::string apply_action_in_place(Library& lib, const MaintenanceAction& a, const Library* pool)
{
    return apply_action_impl(lib, a, pool, true);
}

Library apply_action(Library lib, const MaintenanceAction& action, const Library* sibling_pool)
{
    apply_action_in_place(lib, action, sibling_pool);
    return lib;
}

MaintenanceResult run_maintenance(const Library& lib, const ExecutionTrace& trace, const MaintenanceConfig& cfg)
{
    cfg.validate();
    try {
        check_library(lib);
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptLibrary, e.what());
    }
    MaintenanceResult result{lib, {}};
    auto& report = result.report;
    report.size_before = lib.size();
    for (auto kind : kActionKinds) {
        report.action_counts[kind] = 0;
    }
    if (lib.skills.empty()) {
        report.H_before = report.H_after = 1.0;
        return result;
    }

    // Phase 1: health and local risk.
    const auto g = build_hseg(lib, cfg.graph);
    const auto health = library_health(lib, g, trace, cfg.weights, cfg.window);
    report.H_before = health.H;
    if (!cfg.force && health.debt < cfg.gate) {
        report.skipped = true;
        report.size_after = report.size_before;
        report.H_after = report.H_before;
        return result;
    }

    // Phase 2: risk propagation.
    if (cfg.cgpd) {
        RiskValues local;
        for (const auto& [id, hv] : health.per_skill) {
            local.emplace(id, local_risk(hv));
        }
        report.risk = propagate(g, local, *cfg.cgpd);
    }

    // Phase 3: typed actions on a single working copy.
    report.actions = plan_actions(lib, g, health, report.risk, cfg);
    for (auto& a : report.actions) {
        // plan_actions already searched the snapshot for siblings; an empty
        // sibling slot means none exists.
        a.outcome = apply_action_impl(result.library, a, &lib, false);
        ++report.action_counts[a.kind()];
        if (a.outcome.starts_with("no-op")) {
            ++report.noop_actions;
        }
    }
    try {
        check_library(result.library);
    } catch (const Error& e) {
        throw Error(ErrorCode::CorruptLibrary, std::string("maintenance produced an invalid library: ") + e.what());
    }

    // Red pairs that survive with distinct bodies are reported, not dropped.
    const auto g_after = build_hseg(result.library, cfg.graph);
    for (const auto& cluster : red_clusters(g_after)) {
        for (std::size_t a = 0; a < cluster.size(); ++a) {
            for (std::size_t b = a + 1; b < cluster.size(); ++b) {
                report.red_unmerged.emplace_back(cluster[a], cluster[b]);
            }
        }
    }
    report.size_after = result.library.size();
    report.H_after =
        library_health(result.library, g_after, restrict_trace(trace, result.library), cfg.weights, cfg.window).H;
    return result;
}

std::vector<std::pair<SkillId, SkillId>> uncovered_dep_edges(const Library& lib, const HsegConfig& cfg)
{
    const auto g = build_hseg(lib, cfg);
    std::vector<std::pair<SkillId, SkillId>> out;
    std::unordered_map<std::string, const SkillContract*> by_id;
    for (const auto& s : lib.skills) {
        by_id.emplace(s.id.str(), &s);
    }
    std::set<std::pair<SkillId, SkillId>> valid_bridges;
    for (const auto& a : lib.adapters) {
        const auto* dst = by_id.at(a.dst.str());
        const bool subset = std::includes(dst->preconditions.begin(), dst->preconditions.end(),
                                          a.artifact_types.begin(), a.artifact_types.end());
        if (subset && !a.artifact_types.empty()) {
            valid_bridges.emplace(a.src, a.dst);
        }
    }
    for (Hseg::Index i = 0; i < g.size(); ++i) {
        for (auto j : g.out(i, EdgeType::dep)) {
            if (!g.has_edge(i, j, EdgeType::comp) && !valid_bridges.contains({g.nodes()[i], g.nodes()[j]})) {
                out.emplace_back(g.nodes()[i], g.nodes()[j]);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t body_hash_collisions(const Library& lib)
{
    std::map<BodyHash, std::size_t> counts;
    for (const auto& s : lib.skills) {
        ++counts[body_hash(s)];
    }
    std::size_t pairs = 0;
    for (const auto& [_, c] : counts) {
        pairs += c * (c - 1) / 2;
    }
    return pairs;
}

}  // namespace skillops
