#include "skillops/cgpd.hpp"

#include <algorithm>
#include <cmath>

#include "skillops/error.hpp"

namespace skillops {

namespace {

std::vector<double> dense(const Hseg& g, const RiskValues& values, const char* what)
{
    std::vector<double> out(g.size());
    for (Hseg::Index i = 0; i < g.size(); ++i) {
        auto it = values.find(g.nodes()[i]);
        if (it == values.end()) {
            throw Error(ErrorCode::MissingRiskEntry, std::string(what) + " has no entry for '" +
                                                         g.nodes()[i].str() + "'");
        }
        if (!(it->second >= 0.0 && it->second <= 1.0)) {
            throw Error(ErrorCode::ConfigInvalid, std::string(what) + " for '" + g.nodes()[i].str() +
                                                      "' is outside [0, 1]");
        }
        out[i] = it->second;
    }
    return out;
}

RiskMap iterate(const Hseg& g, const std::vector<double>& local, std::vector<double> cur, const CgpdConfig& cfg)
{
    cfg.validate();
    RiskMap out;
    std::vector<double> next(g.size());
    // a change of delta leaves the iterate within alpha/(1-alpha) * delta of the
    // fixed point, so above alpha = 0.5 the stop test is scaled to keep that
    // distance under the tolerance
    const double gap = std::max(1.0, cfg.alpha / (1.0 - cfg.alpha));
    for (std::size_t t = 0; t < cfg.max_iters; ++t) {
        double delta = 0.0;
        for (Hseg::Index s = 0; s < g.size(); ++s) {
            auto parents = g.in(s, EdgeType::dep);
            double upstream = local[s];
            if (!parents.empty()) {
                upstream = 0.0;
                for (auto p : parents) {
                    upstream = std::max(upstream, cur[p]);
                }
            }
            next[s] = (1.0 - cfg.alpha) * local[s] + cfg.alpha * upstream;
            delta = std::max(delta, std::abs(next[s] - cur[s]));
        }
        cur.swap(next);
        out.residuals.push_back(delta);
        out.iterations_used = t + 1;
        if (delta * gap < cfg.tolerance) {
            out.converged = true;
            break;
        }
    }
    for (Hseg::Index s = 0; s < g.size(); ++s) {
        out.values.emplace(g.nodes()[s], cur[s]);
    }
    return out;
}

}  // namespace

void CgpdConfig::validate() const
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "cgpd alpha must lie in (0, 1)");
    }
    if (!(tolerance > 0.0)) {
        throw Error(ErrorCode::ConfigInvalid, "cgpd tolerance must be positive");
    }
    if (max_iters < 1) {
        throw Error(ErrorCode::ConfigInvalid, "cgpd max_iters must be at least 1");
    }
    if (!(trigger_threshold >= 0.0 && trigger_threshold <= 1.0)) {
        throw Error(ErrorCode::ConfigInvalid, "cgpd trigger threshold must lie in [0, 1]");
    }
}

double RiskMap::at(const SkillId& id) const
{
    auto it = values.find(id);
    if (it == values.end()) {
        throw Error(ErrorCode::MissingRiskEntry, "no risk for '" + id.str() + "'");
    }
    return it->second;
}

RiskMap propagate(const Hseg& g, const RiskValues& local, const CgpdConfig& cfg)
{
    auto loc = dense(g, local, "local risk");
    return iterate(g, loc, loc, cfg);
}

RiskMap propagate_from(const Hseg& g, const RiskValues& local, const RiskValues& initial, const CgpdConfig& cfg)
{
    return iterate(g, dense(g, local, "local risk"), dense(g, initial, "initial risk"), cfg);
}

std::vector<double> propagate_dense(const Hseg& g, const std::vector<double>& local, const CgpdConfig& cfg,
                                    std::size_t* iterations, bool* converged)
{
    if (local.size() != g.size()) {
        throw Error(ErrorCode::MissingRiskEntry, "local risk vector does not cover every node");
    }
    auto result = iterate(g, local, local, cfg);
    if (iterations != nullptr) {
        *iterations = result.iterations_used;
    }
    if (converged != nullptr) {
        *converged = result.converged;
    }
    std::vector<double> out(g.size());
    for (Hseg::Index s = 0; s < g.size(); ++s) {
        out[s] = result.values.at(g.nodes()[s]);
    }
    return out;
}

std::optional<RiskValues> propagate_acyclic(const Hseg& g, const RiskValues& local, double alpha)
{
    auto loc = dense(g, local, "local risk");
    const std::size_t n = g.size();
    std::vector<std::size_t> indegree(n);
    for (Hseg::Index s = 0; s < n; ++s) {
        indegree[s] = g.in(s, EdgeType::dep).size();
    }
    std::vector<Hseg::Index> order;
    order.reserve(n);
    for (Hseg::Index s = 0; s < n; ++s) {
        if (indegree[s] == 0) {
            order.push_back(s);
        }
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (auto v : g.out(order[head], EdgeType::dep)) {
            if (--indegree[v] == 0) {
                order.push_back(v);
            }
        }
    }
    if (order.size() != n) {
        return std::nullopt;
    }
    std::vector<double> risk(n);
    for (auto s : order) {
        auto parents = g.in(s, EdgeType::dep);
        double upstream = loc[s];
        if (!parents.empty()) {
            upstream = 0.0;
            for (auto p : parents) {
                upstream = std::max(upstream, risk[p]);
            }
        }
        risk[s] = (1.0 - alpha) * loc[s] + alpha * upstream;
    }
    RiskValues out;
    for (Hseg::Index s = 0; s < n; ++s) {
        out.emplace(g.nodes()[s], risk[s]);
    }
    return out;
}

std::vector<ValidatorTrigger> trigger_set(const Hseg& g, const RiskMap& risk, const Library& lib, double tau)
{
    std::vector<ValidatorTrigger> out;
    for (const auto& id : g.nodes()) {
        const double r = risk.at(id);
        const auto* s = lib.find(id);
        if (s != nullptr && r > tau && !s->has_validator()) {
            out.push_back({id, r});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.skill < b.skill; });
    return out;
}

}  // namespace skillops
