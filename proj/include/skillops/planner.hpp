#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillops/contract.hpp"
#include "skillops/hseg.hpp"
#include "skillops/library.hpp"
#include "skillops/retrieval.hpp"
#include "skillops/trace.hpp"

namespace skillops {

struct TaskSpec {
    std::string id;
    std::string goal_text;
    TypeSet state_facts;
    std::map<std::string, std::string> gold_args;
    std::optional<std::vector<std::string>> gold_plan;

    bool operator==(const TaskSpec&) const = default;
};

struct PlannerConfig {
    double lambda = 0.5;
    double theta_score = 0.0;
    std::size_t bm25_k = 10;
    std::size_t keep_top = 5;
    std::size_t horizon = 20;
    std::size_t beam_width = 8;
    std::size_t max_repairs = 2;
    double comp_threshold = 0.3;

    /// Throws Error(ConfigInvalid).
    void validate() const;
};

struct ScoredSkill {
    SkillId id;
    double bm25 = 0.0;       // raw
    double bm25_norm = 0.0;  // min-max over the library for this query
    double sem = 0.0;
    double score = 0.0;      // hybrid r
};

enum class InsertedKind { validator, adapter };

std::string_view to_string(InsertedKind kind);

struct PlanStep {
    SkillId skill;
    std::map<std::string, std::string> bindings;
    std::optional<InsertedKind> inserted;

    bool operator==(const PlanStep&) const = default;
};

struct Plan {
    std::vector<PlanStep> steps;
    double total_score = 0.0;

    /// Ids of the library (non-inserted) steps, the sequence plans are graded on.
    [[nodiscard]] std::vector<std::string> actions() const;

    bool operator==(const Plan&) const = default;
};

[[nodiscard]] double score_skill(const SkillContract& s, const TaskSpec& task, double lambda, double bm25_norm,
                                 double sem);

/// Shares one BM25 index across queries against a fixed library.
class SkillMatcher {
  public:
    explicit SkillMatcher(const Library& lib);

    /// Hybrid ranking of the BM25 top-bm25_k, without the precondition or
    /// threshold filters. Sorted by score descending, then id.
    [[nodiscard]] std::vector<ScoredSkill> rank(const std::string& query, const PlannerConfig& cfg) const;

    /// rank() filtered by r >= theta_score and P ⊆ state_facts, cut to keep_top.
    [[nodiscard]] std::vector<ScoredSkill> match(const TaskSpec& task, const PlannerConfig& cfg) const;

  private:
    const Library* m_lib;
    Bm25Index m_bm25;
    std::vector<HashingVectorizer::SparseVector> m_vectors;
};

/// Throws EmptyLibrary.
[[nodiscard]] std::vector<ScoredSkill> match_skills(const Library& lib, const TaskSpec& task,
                                                    const PlannerConfig& cfg);

/// Beam search for the score-maximizing simple path whose transitions all
/// carry dep and comp. Throws NoFeasiblePlan on an empty candidate set.
[[nodiscard]] Plan stitch(std::span<const ScoredSkill> candidates, const Hseg& g, const PlannerConfig& cfg);

/// Exhaustive reference for stitch: same objective and tie-breaks, all simple paths.
[[nodiscard]] Plan stitch_exhaustive(std::span<const ScoredSkill> candidates, const Hseg& g, std::size_t horizon);

/// Adds a validator step after each unvalidated non-terminal step and an
/// adapter step on each dep-without-comp transition. Throws PlanInvalid if
/// a transition lacks dep, AdapterTypeUnsatisfiable if no adapter fits.
[[nodiscard]] Plan insert_validators_adapters(const Plan& plan, const Hseg& g, const Library& lib);

/// True iff every pair of consecutive library steps has dep and comp, or dep
/// plus an adapter step for that edge between them.
[[nodiscard]] bool plan_is_valid(const Plan& plan, const Hseg& g);

/// Last write wins for repeated keys.
[[nodiscard]] PlanStep bind_arguments(const SkillContract& s,
                                      std::span<const std::pair<std::string, std::string>> args);
[[nodiscard]] PlanStep bind_arguments(const SkillContract& s, const std::map<std::string, std::string>& args);

struct StepResult {
    Outcome outcome = Outcome::success;
    std::optional<std::string> error_code;
};

struct AttemptContext {
    std::size_t attempt = 0;                // 0 for the first call of a step
    bool substitution = false;              // running an alt neighbour
    std::optional<std::string> feedback;    // error code handed to a repair re-invocation
};

using Executor = std::function<StepResult(const TaskSpec&, const PlanStep&, const AttemptContext&)>;

/// Runs the plan in order. A failed library step tries its alt neighbours
/// (ascending id) then repair re-invocations, at most max_repairs recovery
/// calls in total; an unrecovered step ends the run. A failed inserted step
/// is logged against the library step before it and also ends the run.
[[nodiscard]] ExecutionTrace execute_with_repair(const Plan& plan, const TaskSpec& task, const Executor& executor,
                                                 const Hseg& g, std::size_t max_repairs);

[[nodiscard]] bool grade_plan(std::span<const std::string> predicted, std::span<const std::string> gold);

/// Succeeds unless the skill has no artifacts at all, is scripted to fail, or
/// is scripted to fail transiently for its first k attempts.
class SimulatedExecutor {
  public:
    explicit SimulatedExecutor(const Library& lib, std::set<SkillId> failing = {},
                               std::map<SkillId, std::size_t> transient = {});

    StepResult operator()(const TaskSpec& task, const PlanStep& step, const AttemptContext& ctx) const;

  private:
    const Library* m_lib;
    std::set<SkillId> m_failing;
    std::map<SkillId, std::size_t> m_transient;
};

struct TaskRun {
    std::vector<ScoredSkill> candidates;
    Plan plan;
    ExecutionTrace trace;
    bool feasible = false;
    /// Every library step was executed (or substituted) successfully.
    bool completed = false;
};

/// Full task-time loop: match, stitch, insert, bind gold args, execute.
[[nodiscard]] TaskRun run_task(const SkillMatcher& matcher, const Library& lib, const Hseg& g, const TaskSpec& task,
                               const Executor& executor, const PlannerConfig& cfg);

}  // namespace skillops
