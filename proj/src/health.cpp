#include "skillops/health.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "skillops/error.hpp"

namespace skillops {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

void HealthWeights::validate() const
{
    for (double w : {u, r, c, f, g}) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::ConfigInvalid, "health weights must be non-negative");
        }
    }
    if (std::abs(u + r + c + f + g - 1.0) > 1e-12) {
        throw Error(ErrorCode::ConfigInvalid, "health weights must sum to 1");
    }
}

UsageIndex::UsageIndex(const ExecutionTrace& trace, std::size_t window)
{
    if (window == 0) {
        throw Error(ErrorCode::ConfigInvalid, "usage window must be at least 1");
    }
    // Walk backwards so each skill keeps only its most recent calls.
    for (auto it = trace.entries.rbegin(); it != trace.entries.rend(); ++it) {
        auto& st = m_stats[it->skill.str()];
        if (st.calls >= window) {
            continue;
        }
        ++st.calls;
        if (it->outcome == Outcome::success) {
            ++st.successes;
        } else {
            ++st.failures;
        }
    }
}

UsageStats UsageIndex::stats(const SkillId& id) const
{
    auto it = m_stats.find(id.str());
    return it == m_stats.end() ? UsageStats{} : it->second;
}

HealthVector health_vector(const SkillContract& s, const Hseg& g, const UsageIndex& usage)
{
    const auto node = g.require(s.id);
    HealthVector hv;

    const auto st = usage.stats(s.id);
    if (st.calls == 0) {
        hv.U = 0.5;
        hv.F = 0.0;
    } else {
        hv.U = static_cast<double>(st.successes) / static_cast<double>(st.calls);
        hv.F = static_cast<double>(st.failures) / static_cast<double>(st.calls);
    }

    const double denom = static_cast<double>(std::max<std::size_t>(1, g.size() - 1));
    hv.R = static_cast<double>(g.red_cluster_size(node) - 1) / denom;

    std::size_t incident = 0;
    std::size_t compatible = 0;
    for (auto j : g.out(node, EdgeType::dep)) {
        ++incident;
        if (g.has_edge(node, j, EdgeType::comp) || g.adapter_bridges(node, j)) {
            ++compatible;
        }
    }
    for (auto i : g.in(node, EdgeType::dep)) {
        ++incident;
        if (g.has_edge(i, node, EdgeType::comp) || g.adapter_bridges(i, node)) {
            ++compatible;
        }
    }
    hv.C = incident == 0 ? 1.0 : static_cast<double>(compatible) / static_cast<double>(incident);

    hv.G = s.has_validator() ? 0.0 : 1.0;
    return hv;
}

HealthVector health_vector(const SkillContract& s, const Hseg& g, const ExecutionTrace& trace, std::size_t window)
{
    return health_vector(s, g, UsageIndex(trace, window));
}

double skill_health(const HealthVector& hv, const HealthWeights& w)
{
    return w.u * hv.U + w.r * (1.0 - hv.R) + w.c * hv.C + w.f * (1.0 - hv.F) + w.g * (1.0 - hv.G);
}

double local_risk(const HealthVector& hv)
{
    return clamp01(((1.0 - hv.U) + hv.R + (1.0 - hv.C) + hv.F + hv.G) / 5.0);
}

LibraryHealthReport library_health(const Library& lib, const Hseg& g, const ExecutionTrace& trace,
                                   const HealthWeights& weights, std::size_t window)
{
    weights.validate();
    if (lib.skills.empty()) {
        throw Error(ErrorCode::EmptyLibrary, "cannot diagnose an empty library");
    }
    const UsageIndex usage(trace, window);
    LibraryHealthReport report;
    double total = 0.0;
    for (const auto& s : lib.skills) {
        auto hv = health_vector(s, g, usage);
        total += skill_health(hv, weights);
        report.per_skill.emplace(s.id, hv);
    }
    report.H = clamp01(total / static_cast<double>(lib.skills.size()));
    report.debt = 1.0 - report.H;
    return report;
}

ExecutionTrace restrict_trace(const ExecutionTrace& trace, const Library& lib)
{
    std::unordered_set<std::string> ids;
    for (const auto& s : lib.skills) {
        ids.insert(s.id.str());
    }
    ExecutionTrace out;
    for (const auto& e : trace.entries) {
        if (ids.contains(e.skill.str())) {
            out.entries.push_back(e);
        }
    }
    return out;
}

}  // namespace skillops
