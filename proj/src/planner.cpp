#include "skillops/planner.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include "skillops/error.hpp"

namespace skillops {

std::string_view to_string(InsertedKind kind)
{
    return kind == InsertedKind::validator ? "validator" : "adapter";
}

void PlannerConfig::validate() const
{
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(lambda)) {
        throw Error(ErrorCode::ConfigInvalid, "planner lambda must lie in [0, 1]");
    }
    if (!in_unit(theta_score)) {
        throw Error(ErrorCode::ConfigInvalid, "planner theta_score must lie in [0, 1]");
    }
    if (!in_unit(comp_threshold)) {
        throw Error(ErrorCode::ConfigInvalid, "planner comp_threshold must lie in [0, 1]");
    }
    if (keep_top < 1 || bm25_k < keep_top) {
        throw Error(ErrorCode::ConfigInvalid, "planner needs bm25_k >= keep_top >= 1");
    }
    if (horizon < 1 || beam_width < 1) {
        throw Error(ErrorCode::ConfigInvalid, "planner horizon and beam_width must be at least 1");
    }
}

std::vector<std::string> Plan::actions() const
{
    std::vector<std::string> out;
    for (const auto& s : steps) {
        if (!s.inserted) {
            out.push_back(s.skill.str());
        }
    }
    return out;
}

double score_skill(const SkillContract& /*s*/, const TaskSpec& /*task*/, double lambda, double bm25_norm, double sem)
{
    return lambda * bm25_norm + (1.0 - lambda) * sem;
}

// ---------------------------------------------------------------- matching

SkillMatcher::SkillMatcher(const Library& lib) : m_lib(&lib), m_bm25(lib.skills)
{
    m_vectors.reserve(lib.skills.size());
    for (const auto& s : lib.skills) {
        m_vectors.push_back(HashingVectorizer::transform(tokenize(retrieval_text(s))));
    }
}

std::vector<ScoredSkill> SkillMatcher::rank(const std::string& query, const PlannerConfig& cfg) const
{
    cfg.validate();
    const auto& skills = m_lib->skills;
    if (skills.empty()) {
        throw Error(ErrorCode::EmptyLibrary, "cannot match against an empty library");
    }
    const auto tokens = tokenize(query);
    const auto raw = m_bm25.scores(tokens);
    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it;
    const double hi = *hi_it;

    std::vector<std::size_t> order(skills.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (raw[a] != raw[b]) {
            return raw[a] > raw[b];
        }
        return skills[a].id < skills[b].id;
    });
    order.resize(std::min(order.size(), cfg.bm25_k));

    const auto qvec = HashingVectorizer::transform(tokens);
    TaskSpec probe;
    probe.goal_text = query;
    std::vector<ScoredSkill> out;
    out.reserve(order.size());
    for (auto i : order) {
        ScoredSkill c;
        c.id = skills[i].id;
        c.bm25 = raw[i];
        if (hi > lo) {
            c.bm25_norm = (raw[i] - lo) / (hi - lo);
        } else {
            c.bm25_norm = hi > 0.0 ? 1.0 : 0.0;
        }
        c.sem = HashingVectorizer::cosine(qvec, m_vectors[i]);
        c.score = score_skill(skills[i], probe, cfg.lambda, c.bm25_norm, c.sem);
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const ScoredSkill& a, const ScoredSkill& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return a.id < b.id;
    });
    return out;
}

std::vector<ScoredSkill> SkillMatcher::match(const TaskSpec& task, const PlannerConfig& cfg) const
{
    auto ranked = rank(task.goal_text, cfg);
    std::vector<ScoredSkill> out;
    for (auto& c : ranked) {
        if (out.size() >= cfg.keep_top) {
            break;
        }
        if (c.score < cfg.theta_score) {
            continue;
        }
        const auto* s = m_lib->find(c.id);
        if (std::includes(task.state_facts.begin(), task.state_facts.end(), s->preconditions.begin(),
                          s->preconditions.end())) {
            out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<ScoredSkill> match_skills(const Library& lib, const TaskSpec& task, const PlannerConfig& cfg)
{
    if (lib.skills.empty()) {
        throw Error(ErrorCode::EmptyLibrary, "cannot match against an empty library");
    }
    return SkillMatcher(lib).match(task, cfg);
}

// ---------------------------------------------------------------- stitching

namespace {

// Candidate-local view of the graph: node i is candidates[i].
struct StitchProblem {
    std::vector<double> score;
    std::vector<SkillId> ids;
    std::vector<std::vector<std::uint32_t>> next;  // dep ∧ comp successors, ascending id
};

StitchProblem make_problem(std::span<const ScoredSkill> candidates, const Hseg& g)
{
    StitchProblem p;
    std::vector<Hseg::Index> node;
    for (const auto& c : candidates) {
        if (std::find(p.ids.begin(), p.ids.end(), c.id) != p.ids.end()) {
            continue;  // a repeated candidate adds nothing
        }
        p.ids.push_back(c.id);
        p.score.push_back(c.score);
        node.push_back(g.require(c.id));
    }
    const auto n = static_cast<std::uint32_t>(p.ids.size());
    p.next.resize(n);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = 0; b < n; ++b) {
            if (a != b && g.has_edge(node[a], node[b], EdgeType::dep) &&
                g.has_edge(node[a], node[b], EdgeType::comp)) {
                p.next[a].push_back(b);
            }
        }
        std::sort(p.next[a].begin(), p.next[a].end(),
                  [&](std::uint32_t x, std::uint32_t y) { return p.ids[x] < p.ids[y]; });
    }
    return p;
}

struct Path {
    std::vector<std::uint32_t> nodes;
    double gain = 0.0;
};

// Higher score, then shorter, then lexicographically smaller at first divergence.
bool better(const Path& a, const Path& b, const StitchProblem& p)
{
    if (a.gain != b.gain) {
        return a.gain > b.gain;
    }
    if (a.nodes.size() != b.nodes.size()) {
        return a.nodes.size() < b.nodes.size();
    }
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        if (a.nodes[i] != b.nodes[i]) {
            return p.ids[a.nodes[i]] < p.ids[b.nodes[i]];
        }
    }
    return false;
}

Plan to_plan(const Path& path, const StitchProblem& p)
{
    Plan plan;
    for (auto i : path.nodes) {
        plan.steps.push_back({p.ids[i], {}, std::nullopt});
    }
    plan.total_score = path.gain;
    return plan;
}

// Upper bound on the gain still collectable from `v` with `rem` more steps,
// with the fewest extra steps reaching it. Exact (best simple extension
// avoiding `mask`) for small candidate sets, otherwise the walk bound that
// ignores revisits and reports no step count.
struct Completion {
    double gain = 0.0;
    std::size_t steps = 0;
};

class CompletionBound {
  public:
    static constexpr std::size_t kExactLimit = 12;

    CompletionBound(const StitchProblem& p, std::size_t horizon) : m_p(p), m_exact(p.ids.size() <= kExactLimit)
    {
        if (!m_exact) {
            const std::size_t n = p.ids.size();
            m_walk.assign(horizon + 1, std::vector<double>(n, 0.0));
            for (std::size_t k = 1; k <= horizon; ++k) {
                for (std::size_t v = 0; v < n; ++v) {
                    double b = 0.0;
                    for (auto u : p.next[v]) {
                        b = std::max(b, p.score[u] + m_walk[k - 1][u]);
                    }
                    m_walk[k][v] = b;
                }
            }
        }
    }

    [[nodiscard]] bool exact() const noexcept { return m_exact; }

    Completion operator()(std::uint32_t v, std::uint32_t mask, std::size_t rem)
    {
        if (!m_exact) {
            return {m_walk[rem][v], 0};
        }
        return exact(v, mask, rem);
    }

  private:
    Completion exact(std::uint32_t v, std::uint32_t mask, std::size_t rem)
    {
        if (rem == 0) {
            return {};
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(rem) << 40) | (static_cast<std::uint64_t>(mask) << 8) | v;
        if (auto it = m_memo.find(key); it != m_memo.end()) {
            return it->second;
        }
        Completion b;
        for (auto u : m_p.next[v]) {
            if ((mask & (1U << u)) == 0) {
                const auto rest = exact(u, mask | (1U << u), rem - 1);
                const Completion c{m_p.score[u] + rest.gain, rest.steps + 1};
                if (c.gain > b.gain || (c.gain == b.gain && c.steps < b.steps)) {
                    b = c;
                }
            }
        }
        m_memo.emplace(key, b);
        return b;
    }

    const StitchProblem& m_p;
    bool m_exact;
    std::vector<std::vector<double>> m_walk;
    std::unordered_map<std::uint64_t, Completion> m_memo;
};

struct Partial {
    Path path;
    std::vector<char> visited;
    std::uint32_t mask = 0;
    double bound = 0.0;
    std::size_t bound_len = 0;
};

}  // namespace

Plan stitch(std::span<const ScoredSkill> candidates, const Hseg& g, const PlannerConfig& cfg)
{
    cfg.validate();
    if (candidates.empty()) {
        throw Error(ErrorCode::NoFeasiblePlan, "no candidate skill survived matching");
    }
    const auto p = make_problem(candidates, g);
    const std::size_t n = p.ids.size();
    CompletionBound bound(p, cfg.horizon);

    // With the exact bound, ranking equal bounds by completion length and then
    // by prefix keeps the prefix of the preferred optimum at the top of every
    // level, so tie-breaks agree with exhaustive search.
    auto rank = [&](const Partial& a, const Partial& b) {
        if (a.bound != b.bound) {
            return a.bound > b.bound;
        }
        if (!bound.exact()) {
            return better(a.path, b.path, p);
        }
        if (a.bound_len != b.bound_len) {
            return a.bound_len < b.bound_len;
        }
        for (std::size_t i = 0; i < a.path.nodes.size(); ++i) {
            if (a.path.nodes[i] != b.path.nodes[i]) {
                return p.ids[a.path.nodes[i]] < p.ids[b.path.nodes[i]];
            }
        }
        return false;
    };

    std::vector<Partial> beam;
    for (std::uint32_t v = 0; v < n; ++v) {
        Partial s;
        s.path.nodes = {v};
        s.path.gain = p.score[v];
        s.visited.assign(n, 0);
        s.visited[v] = 1;
        s.mask = n <= CompletionBound::kExactLimit ? (1U << v) : 0;
        const auto c = bound(v, s.mask, cfg.horizon - 1);
        s.bound = s.path.gain + c.gain;
        s.bound_len = 1 + c.steps;
        beam.push_back(std::move(s));
    }
    Path best = beam.front().path;
    for (const auto& s : beam) {
        if (better(s.path, best, p)) {
            best = s.path;
        }
    }
    std::sort(beam.begin(), beam.end(), rank);
    if (beam.size() > cfg.beam_width) {
        beam.resize(cfg.beam_width);
    }

    for (std::size_t len = 2; len <= cfg.horizon && !beam.empty(); ++len) {
        std::vector<Partial> grown;
        for (const auto& s : beam) {
            const auto last = s.path.nodes.back();
            for (auto u : p.next[last]) {
                if (s.visited[u] != 0) {
                    continue;
                }
                Partial t = s;
                t.path.nodes.push_back(u);
                t.path.gain += p.score[u];
                t.visited[u] = 1;
                if (n <= CompletionBound::kExactLimit) {
                    t.mask |= 1U << u;
                }
                const auto c = bound(u, t.mask, cfg.horizon - len);
                t.bound = t.path.gain + c.gain;
                t.bound_len = len + c.steps;
                if (better(t.path, best, p)) {
                    best = t.path;
                }
                grown.push_back(std::move(t));
            }
        }
        std::sort(grown.begin(), grown.end(), rank);
        if (grown.size() > cfg.beam_width) {
            grown.resize(cfg.beam_width);
        }
        beam = std::move(grown);
    }
    return to_plan(best, p);
}

Plan stitch_exhaustive(std::span<const ScoredSkill> candidates, const Hseg& g, std::size_t horizon)
{
    if (candidates.empty()) {
        throw Error(ErrorCode::NoFeasiblePlan, "no candidate skill survived matching");
    }
    if (horizon < 1) {
        throw Error(ErrorCode::ConfigInvalid, "horizon must be at least 1");
    }
    const auto p = make_problem(candidates, g);
    Path best;
    best.nodes = {0};
    best.gain = p.score[0];
    Path cur;
    std::vector<char> visited(p.ids.size(), 0);
    auto dfs = [&](auto& self, std::uint32_t v) -> void {
        cur.nodes.push_back(v);
        cur.gain += p.score[v];
        visited[v] = 1;
        if (better(cur, best, p)) {
            best = cur;
        }
        if (cur.nodes.size() < horizon) {
            for (auto u : p.next[v]) {
                if (visited[u] == 0) {
                    self(self, u);
                }
            }
        }
        visited[v] = 0;
        cur.gain -= p.score[v];
        cur.nodes.pop_back();
    };
    for (std::uint32_t v = 0; v < p.ids.size(); ++v) {
        cur = Path{};
        dfs(dfs, v);
    }
    return to_plan(best, p);
}

// ---------------------------------------------------------------- stage 3

Plan insert_validators_adapters(const Plan& plan, const Hseg& g, const Library& lib)
{
    std::vector<const PlanStep*> core;
    for (const auto& s : plan.steps) {
        if (!s.inserted) {
            core.push_back(&s);
        }
    }
    Plan out;
    out.total_score = plan.total_score;
    for (std::size_t t = 0; t < core.size(); ++t) {
        const auto& step = *core[t];
        const auto* s = lib.find(step.skill);
        if (s == nullptr) {
            throw Error(ErrorCode::UnknownSkillId, "plan step '" + step.skill.str() + "' is not in the library");
        }
        out.steps.push_back(step);
        if (t + 1 == core.size()) {
            break;
        }
        if (!s->has_validator()) {
            out.steps.push_back({s->id, step.bindings, InsertedKind::validator});
        }
        const auto& nid = core[t + 1]->skill;
        const auto a = g.require(s->id);
        const auto b = g.require(nid);
        if (!g.has_edge(a, b, EdgeType::dep)) {
            throw Error(ErrorCode::PlanInvalid,
                        "transition '" + s->id.str() + "' -> '" + nid.str() + "' has no dep edge");
        }
        if (g.has_edge(a, b, EdgeType::comp)) {
            continue;
        }
        const auto* next = lib.find(nid);
        if (next == nullptr) {
            throw Error(ErrorCode::UnknownSkillId, "plan step '" + nid.str() + "' is not in the library");
        }
        auto rec = make_adapter(*s, *next);
        if (!std::includes(next->preconditions.begin(), next->preconditions.end(), rec.artifact_types.begin(),
                           rec.artifact_types.end())) {
            throw Error(ErrorCode::AdapterTypeUnsatisfiable,
                        "adapter '" + rec.id.str() + "' does not satisfy the preconditions of '" + nid.str() + "'");
        }
        out.steps.push_back({rec.id, {}, InsertedKind::adapter});
    }
    return out;
}

bool plan_is_valid(const Plan& plan, const Hseg& g)
{
    const PlanStep* prev = nullptr;
    bool bridged = false;
    for (const auto& s : plan.steps) {
        if (s.inserted) {
            if (prev != nullptr && *s.inserted == InsertedKind::adapter) {
                bridged = true;
            }
            continue;
        }
        if (prev != nullptr) {
            auto a = g.index_of(prev->skill);
            auto b = g.index_of(s.skill);
            if (!a || !b || !g.has_edge(*a, *b, EdgeType::dep)) {
                return false;
            }
            if (!g.has_edge(*a, *b, EdgeType::comp) && !bridged) {
                return false;
            }
        }
        prev = &s;
        bridged = false;
    }
    return true;
}

PlanStep bind_arguments(const SkillContract& s, std::span<const std::pair<std::string, std::string>> args)
{
    PlanStep step;
    step.skill = s.id;
    for (const auto& [k, v] : args) {
        step.bindings[k] = v;
    }
    return step;
}

PlanStep bind_arguments(const SkillContract& s, const std::map<std::string, std::string>& args)
{
    PlanStep step;
    step.skill = s.id;
    step.bindings = args;
    return step;
}

// ---------------------------------------------------------------- stage 4

namespace {

struct ExecOutcome {
    ExecutionTrace trace;
    bool completed = true;
};

ExecOutcome execute_impl(const Plan& plan, const TaskSpec& task, const Executor& executor, const Hseg& g,
                         std::size_t max_repairs)
{
    ExecOutcome out;
    std::size_t counter = 0;
    auto log = [&](const SkillId& id, const StepResult& r) {
        out.trace.entries.push_back({task.id, id, counter++, r.outcome, r.error_code});
    };
    const PlanStep* last_core = nullptr;
    for (const auto& step : plan.steps) {
        if (step.inserted) {
            auto r = executor(task, step, AttemptContext{});
            if (r.outcome == Outcome::failure) {
                log(last_core != nullptr ? last_core->skill : step.skill, r);
                out.completed = false;
                return out;
            }
            continue;
        }
        last_core = &step;
        auto r = executor(task, step, AttemptContext{});
        log(step.skill, r);
        if (r.outcome == Outcome::success) {
            continue;
        }
        std::size_t attempts = 0;
        bool recovered = false;
        std::optional<std::string> feedback = r.error_code;

        std::vector<SkillId> alts;
        if (auto node = g.index_of(step.skill)) {
            for (auto a : g.out(*node, EdgeType::alt)) {
                alts.push_back(g.nodes()[a]);
            }
            std::sort(alts.begin(), alts.end());
        }
        for (const auto& alt : alts) {
            if (attempts >= max_repairs) {
                break;
            }
            ++attempts;
            PlanStep sub = step;
            sub.skill = alt;
            auto ra = executor(task, sub, AttemptContext{attempts, true, feedback});
            log(alt, ra);
            if (ra.outcome == Outcome::success) {
                recovered = true;
                break;
            }
        }
        while (!recovered && attempts < max_repairs) {
            ++attempts;
            auto rr = executor(task, step, AttemptContext{attempts, false, feedback});
            log(step.skill, rr);
            if (rr.outcome == Outcome::success) {
                recovered = true;
            } else if (rr.error_code) {
                feedback = rr.error_code;
            }
        }
        if (!recovered) {
            out.completed = false;
            return out;
        }
    }
    return out;
}

}  // namespace

ExecutionTrace execute_with_repair(const Plan& plan, const TaskSpec& task, const Executor& executor, const Hseg& g,
                                   std::size_t max_repairs)
{
    return execute_impl(plan, task, executor, g, max_repairs).trace;
}

bool grade_plan(std::span<const std::string> predicted, std::span<const std::string> gold)
{
    return std::equal(predicted.begin(), predicted.end(), gold.begin(), gold.end());
}

SimulatedExecutor::SimulatedExecutor(const Library& lib, std::set<SkillId> failing,
                                     std::map<SkillId, std::size_t> transient)
    : m_lib(&lib), m_failing(std::move(failing)), m_transient(std::move(transient))
{
}

StepResult SimulatedExecutor::operator()(const TaskSpec& /*task*/, const PlanStep& step,
                                         const AttemptContext& ctx) const
{
    if (step.inserted) {
        return {};
    }
    if (m_failing.contains(step.skill)) {
        return {Outcome::failure, "scripted_failure"};
    }
    if (auto it = m_transient.find(step.skill); it != m_transient.end() && ctx.attempt < it->second) {
        return {Outcome::failure, "transient_failure"};
    }
    const auto* s = m_lib->find(step.skill);
    if (s == nullptr) {
        return {Outcome::failure, "unknown_skill"};
    }
    if (s->artifact_dirs.empty()) {
        return {Outcome::failure, "missing_artifact"};
    }
    return {};
}

TaskRun run_task(const SkillMatcher& matcher, const Library& lib, const Hseg& g, const TaskSpec& task,
                 const Executor& executor, const PlannerConfig& cfg)
{
    TaskRun run;
    run.candidates = matcher.match(task, cfg);
    if (run.candidates.empty()) {
        return run;
    }
    run.feasible = true;
    auto plan = insert_validators_adapters(stitch(run.candidates, g, cfg), g, lib);
    for (auto& step : plan.steps) {
        if (!step.inserted) {
            for (const auto& [k, v] : task.gold_args) {
                step.bindings[k] = v;
            }
        }
    }
    run.plan = std::move(plan);
    auto exec = execute_impl(run.plan, task, executor, g, cfg.max_repairs);
    run.trace = std::move(exec.trace);
    run.completed = exec.completed;
    return run;
}

}  // namespace skillops
