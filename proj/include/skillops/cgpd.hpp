#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "skillops/hseg.hpp"
#include "skillops/library.hpp"

namespace skillops {

struct CgpdConfig {
    double alpha = 0.5;
    std::size_t max_iters = 64;
    double tolerance = 1e-9;
    double trigger_threshold = 0.5;

    void validate() const;
};

using RiskValues = std::map<SkillId, double>;

struct RiskMap {
    RiskValues values;
    std::size_t iterations_used = 0;
    bool converged = false;
    /// Sup-norm change of each iteration, in order.
    std::vector<double> residuals;

    [[nodiscard]] double at(const SkillId& id) const;
};

/// Synchronous worst-upstream-risk iteration along dep edges:
///   next(s) = (1 - alpha) * local(s) + alpha * max_{p in parents(s)} cur(p)
/// A skill without parents uses its own local risk as the upstream term, so it
/// keeps its full local risk at the fixed point. Stops once the sup-norm change
/// times max(1, alpha/(1-alpha)) drops below the tolerance, which puts the
/// result within the tolerance of the fixed point, or after max_iters sweeps.
[[nodiscard]] RiskMap propagate(const Hseg& g, const RiskValues& local, const CgpdConfig& cfg);

/// Same iteration started from an arbitrary vector instead of the local risk.
[[nodiscard]] RiskMap propagate_from(const Hseg& g, const RiskValues& local, const RiskValues& initial,
                                     const CgpdConfig& cfg);

/// Index-aligned variant used on hot paths; `local` is ordered like g.nodes().
[[nodiscard]] std::vector<double> propagate_dense(const Hseg& g, const std::vector<double>& local,
                                                  const CgpdConfig& cfg, std::size_t* iterations = nullptr,
                                                  bool* converged = nullptr);

/// Exact fixed point by one sweep in topological order of the dep subgraph.
/// Returns nullopt when dep edges form a cycle.
[[nodiscard]] std::optional<RiskValues> propagate_acyclic(const Hseg& g, const RiskValues& local, double alpha);

struct ValidatorTrigger {
    SkillId skill;
    double risk = 0.0;

    bool operator==(const ValidatorTrigger&) const = default;
};

/// add_validator triggers for skills with risk above tau and no validator, ascending id.
[[nodiscard]] std::vector<ValidatorTrigger> trigger_set(const Hseg& g, const RiskMap& risk, const Library& lib,
                                                        double tau);

}  // namespace skillops
