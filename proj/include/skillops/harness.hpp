#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "skillops/debtgen.hpp"
#include "skillops/json_io.hpp"
#include "skillops/library.hpp"
#include "skillops/maint.hpp"
#include "skillops/planner.hpp"
#include "skillops/trace.hpp"

namespace skillops {

// ---------------------------------------------------------------- traces

/// Line-delimited JSON {task_id, skill_id, step, outcome, error_code?}. Blank
/// lines are skipped. Throws Error(MalformedTraceLine) naming the 1-based line.
[[nodiscard]] ExecutionTrace parse_trace(std::string_view text);
[[nodiscard]] ExecutionTrace load_trace(const std::filesystem::path& path);
[[nodiscard]] std::string format_trace(const ExecutionTrace& trace);
void save_trace(const ExecutionTrace& trace, const std::filesystem::path& path);

// ---------------------------------------------------------------- metrics

/// |top-k ∩ relevant| / k, also when fewer than k items are ranked.
[[nodiscard]] double precision_at_k(std::span<const SkillId> ranked, const std::set<SkillId>& relevant,
                                    std::size_t k);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

/// Wilson score interval; throws ConfigInvalid unless 0 <= successes <= n and n >= 1.
[[nodiscard]] Interval wilson_ci(std::size_t successes, std::size_t n, double z = 1.96);

// ---------------------------------------------------------------- simulation

/// The simulated environment's view of a broken skill: nothing to run, or
/// references that only exist as deprecated copies.
[[nodiscard]] std::optional<std::string> simulated_fault(const SkillContract& s);

/// `calls` executions of every skill, one task per skill, failing exactly the
/// skills with a simulated fault.
[[nodiscard]] ExecutionTrace simulate_traffic(const Library& lib, std::size_t calls);

/// SimulatedExecutor that also fails skills with stale references.
[[nodiscard]] SimulatedExecutor environment_executor(const Library& lib);

/// Reference library for gold plans: the skills whose provenance is "clean".
[[nodiscard]] Library clean_subset(const Library& lib);

struct RetrievalQuery {
    std::string text;
    std::set<SkillId> relevant;
};

/// One query per distinct goal among the clean skills; the relevant set is
/// the clean skills sharing that goal. Ordered by goal.
[[nodiscard]] std::vector<RetrievalQuery> goal_queries(const Library& lib);

/// Top-k ids of the hybrid ranking for each query.
[[nodiscard]] std::vector<double> precision_per_query(const Library& lib, std::span<const RetrievalQuery> queries,
                                                      std::size_t k, const PlannerConfig& cfg = {});

/// The goal queries whose hybrid ranking on `lib` puts a degraded skill above
/// some relevant one.
[[nodiscard]] std::vector<RetrievalQuery> clone_confusion_queries(const Library& lib, const PlannerConfig& cfg = {});

/// `count` tasks seeded from clean skills, with gold plans computed by the
/// planner on `reference`.
[[nodiscard]] std::vector<TaskSpec> make_tasks(const Library& lib, const Library& reference, std::size_t count,
                                               std::uint64_t seed, const PlannerConfig& cfg = {});

// ---------------------------------------------------------------- pipeline

struct Scenario {
    std::string name;
    std::size_t size = 200;
    double noise_rate = 0.0;
    std::uint64_t seed = 42;
    std::size_t tasks = 50;
    std::size_t traffic_calls = 5;
};

/// "clean-200", "noisy-500", or "scale-<N>" for a tabulated noise-schedule size.
/// Throws ConfigInvalid for anything else.
[[nodiscard]] Scenario scenario_by_name(const std::string& name);
[[nodiscard]] std::vector<std::string> scenario_names();

/// SKILLOPS_SEED if set. Throws ConfigInvalid when it is not an unsigned integer.
[[nodiscard]] std::optional<std::uint64_t> seed_override();

struct PlanStats {
    std::size_t successes = 0;
    std::size_t n = 0;
    Interval ci;
};

struct EvalReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::size_t size = 0;
    double noise_rate = 0.0;
    Composition composition;
    MaintenanceReport maintenance;
    std::size_t queries = 0;
    double precision_raw = 0.0;
    double precision_maintained = 0.0;
    std::size_t confusion_queries = 0;
    PlanStats plans_raw;
    PlanStats plans_maintained;
    bool all_plans_valid = true;
    std::size_t external_model_calls = 0;
    double maintenance_ms = 0.0;
    double total_ms = 0.0;
};

[[nodiscard]] EvalReport run_pipeline(const Scenario& scenario, const MaintenanceConfig& mcfg = {},
                                      const PlannerConfig& pcfg = {});

/// Timing fields are left out when `timing` is false, which makes the
/// document a pure function of the scenario.
[[nodiscard]] Json eval_to_json(const EvalReport& report, bool timing = true);

}  // namespace skillops
