#pragma once

#include <cstddef>
#include <map>
#include <unordered_map>

#include "skillops/contract.hpp"
#include "skillops/hseg.hpp"
#include "skillops/library.hpp"
#include "skillops/trace.hpp"

namespace skillops {

/// Utility, redundancy, compatibility, failure risk and validation gap.
/// All fractions lie in [0, 1]; G is 0 or 1.
struct HealthVector {
    double U = 0.0;
    double R = 0.0;
    double C = 0.0;
    double F = 0.0;
    double G = 0.0;

    bool operator==(const HealthVector&) const = default;
};

struct HealthWeights {
    double u = 0.2;
    double r = 0.2;
    double c = 0.2;
    double f = 0.2;
    double g = 0.2;

    /// Throws Error(ConfigInvalid) unless all weights are non-negative and sum to 1.
    void validate() const;
};

inline constexpr std::size_t kDefaultWindow = 100;

struct LibraryHealthReport {
    std::map<SkillId, HealthVector> per_skill;
    double H = 1.0;
    double debt = 0.0;
};

struct UsageStats {
    std::size_t calls = 0;
    std::size_t successes = 0;
    std::size_t failures = 0;
};

/// Success/failure counts over the most recent `window` calls of each skill.
class UsageIndex {
  public:
    UsageIndex(const ExecutionTrace& trace, std::size_t window);

    [[nodiscard]] UsageStats stats(const SkillId& id) const;

  private:
    std::unordered_map<std::string, UsageStats> m_stats;
};

/// Uses the neutral defaults U=0.5, F=0 for skills never called and C=1 when
/// no dep edge touches the skill; adapter-bridged dep edges count as compatible.
[[nodiscard]] HealthVector health_vector(const SkillContract& s, const Hseg& g, const ExecutionTrace& trace,
                                         std::size_t window = kDefaultWindow);
[[nodiscard]] HealthVector health_vector(const SkillContract& s, const Hseg& g, const UsageIndex& usage);

[[nodiscard]] LibraryHealthReport library_health(const Library& lib, const Hseg& g, const ExecutionTrace& trace,
                                                 const HealthWeights& weights = {},
                                                 std::size_t window = kDefaultWindow);

/// Per-skill weighted health term, before averaging.
[[nodiscard]] double skill_health(const HealthVector& hv, const HealthWeights& weights);

[[nodiscard]] double local_risk(const HealthVector& hv);

/// Drops entries whose skill is not in the library.
[[nodiscard]] ExecutionTrace restrict_trace(const ExecutionTrace& trace, const Library& lib);

}  // namespace skillops
