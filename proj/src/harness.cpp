#include "skillops/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "skillops/error.hpp"
#include "skillops/library_io.hpp"
#include "skillops/rng.hpp"

namespace skillops {

// ---------------------------------------------------------------- traces

ExecutionTrace parse_trace(std::string_view text)
{
    ExecutionTrace trace;
    std::unordered_map<std::string, std::size_t> last_step;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        auto line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::MalformedTraceLine, "line " + std::to_string(line_no) + ": " + why);
        };
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception&) {
            fail("not valid JSON");
        }
        if (!j.is_object()) {
            fail("record must be a JSON object");
        }
        TraceEntry e;
        try {
            e.task_id = j.at("task_id").get<std::string>();
            const auto skill = j.at("skill_id").get<std::string>();
            if (!SkillId::is_valid(skill)) {
                fail("invalid skill_id '" + skill + "'");
            }
            e.skill = SkillId(skill);
            const auto& step = j.at("step");
            if (!step.is_number_integer() || step.get<long long>() < 0) {
                fail("step must be a non-negative integer");
            }
            e.step = step.get<std::size_t>();
            const auto outcome = j.at("outcome").get<std::string>();
            if (outcome == "success") {
                e.outcome = Outcome::success;
            } else if (outcome == "failure") {
                e.outcome = Outcome::failure;
            } else {
                fail("unknown outcome '" + outcome + "'");
            }
            if (j.contains("error_code") && !j.at("error_code").is_null()) {
                e.error_code = j.at("error_code").get<std::string>();
            }
        } catch (const Json::exception& ex) {
            fail(ex.what());
        }
        auto [it, fresh] = last_step.try_emplace(e.task_id, e.step);
        if (!fresh) {
            if (e.step <= it->second) {
                fail("step " + std::to_string(e.step) + " does not increase within task '" + e.task_id + "'");
            }
            it->second = e.step;
        }
        trace.entries.push_back(std::move(e));
    }
    return trace;
}

ExecutionTrace load_trace(const std::filesystem::path& path)
{
    return parse_trace(read_file(path));
}

std::string format_trace(const ExecutionTrace& trace)
{
    std::string out;
    for (const auto& e : trace.entries) {
        out += trace_entry_to_json(e).dump();
        out += '\n';
    }
    return out;
}

void save_trace(const ExecutionTrace& trace, const std::filesystem::path& path)
{
    write_file(path, format_trace(trace));
}

// ---------------------------------------------------------------- metrics

double precision_at_k(std::span<const SkillId> ranked, const std::set<SkillId>& relevant, std::size_t k)
{
    if (k == 0) {
        throw Error(ErrorCode::ConfigInvalid, "precision@k needs k >= 1");
    }
    std::size_t hits = 0;
    const std::size_t top = std::min(k, ranked.size());
    for (std::size_t i = 0; i < top; ++i) {
        hits += relevant.contains(ranked[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

Interval wilson_ci(std::size_t successes, std::size_t n, double z)
{
    if (n == 0 || successes > n) {
        throw Error(ErrorCode::ConfigInvalid, "wilson_ci needs 0 <= successes <= n and n >= 1");
    }
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    // The closed form can miss the exact boundary by an ulp.
    if (successes == 0) {
        ci.lower = 0.0;
    }
    if (successes == n) {
        ci.upper = 1.0;
    }
    return ci;
}

// ---------------------------------------------------------------- simulation

std::optional<std::string> simulated_fault(const SkillContract& s)
{
    if (s.artifact_dirs.empty()) {
        return "missing_artifact";
    }
    for (const auto& f : s.artifact_dirs.references) {
        const std::string_view name = f.name;
        constexpr std::string_view suffix = "_deprecated.md";
        if (name.size() >= suffix.size() && name.substr(name.size() - suffix.size()) == suffix) {
            return "stale_reference";
        }
    }
    return std::nullopt;
}

ExecutionTrace simulate_traffic(const Library& lib, std::size_t calls)
{
    ExecutionTrace trace;
    trace.entries.reserve(lib.skills.size() * calls);
    for (const auto& s : lib.skills) {
        const auto fault = simulated_fault(s);
        for (std::size_t i = 0; i < calls; ++i) {
            trace.entries.push_back({"traffic-" + s.id.str(), s.id, i,
                                     fault ? Outcome::failure : Outcome::success, fault});
        }
    }
    return trace;
}

SimulatedExecutor environment_executor(const Library& lib)
{
    std::set<SkillId> failing;
    for (const auto& s : lib.skills) {
        if (simulated_fault(s)) {
            failing.insert(s.id);
        }
    }
    return SimulatedExecutor(lib, std::move(failing));
}

Library clean_subset(const Library& lib)
{
    Library out;
    for (const auto& s : lib.skills) {
        auto it = lib.provenance.find(s.id);
        if (it == lib.provenance.end() || it->second == "clean") {
            out.skills.push_back(s);
            out.provenance[s.id] = "clean";
        }
    }
    for (const auto& a : lib.adapters) {
        if (out.find(a.src) != nullptr && out.find(a.dst) != nullptr) {
            out.adapters.push_back(a);
        }
    }
    return out;
}

std::vector<RetrievalQuery> goal_queries(const Library& lib)
{
    std::map<std::string, std::set<SkillId>> by_goal;
    for (const auto& s : lib.skills) {
        auto it = lib.provenance.find(s.id);
        if (it == lib.provenance.end() || it->second == "clean") {
            by_goal[s.goal].insert(s.id);
        }
    }
    std::vector<RetrievalQuery> out;
    for (auto& [goal, ids] : by_goal) {
        out.push_back({goal, std::move(ids)});
    }
    return out;
}

std::vector<double> precision_per_query(const Library& lib, std::span<const RetrievalQuery> queries, std::size_t k,
                                        const PlannerConfig& cfg)
{
    const SkillMatcher matcher(lib);
    std::vector<double> out;
    out.reserve(queries.size());
    for (const auto& q : queries) {
        std::vector<SkillId> ranked;
        for (const auto& c : matcher.rank(q.text, cfg)) {
            ranked.push_back(c.id);
        }
        out.push_back(precision_at_k(ranked, q.relevant, k));
    }
    return out;
}

std::vector<RetrievalQuery> clone_confusion_queries(const Library& lib, const PlannerConfig& cfg)
{
    const SkillMatcher matcher(lib);
    std::vector<RetrievalQuery> out;
    for (auto& q : goal_queries(lib)) {
        bool degraded_seen = false;
        bool confused = false;
        std::size_t present = 0;
        for (const auto& c : matcher.rank(q.text, cfg)) {
            if (q.relevant.contains(c.id)) {
                ++present;
                confused = confused || degraded_seen;
                continue;
            }
            auto it = lib.provenance.find(c.id);
            degraded_seen = degraded_seen || (it != lib.provenance.end() && it->second.rfind("degraded:", 0) == 0);
        }
        // A relevant skill pushed out of the ranking entirely also counts.
        confused = confused || (degraded_seen && present < q.relevant.size());
        if (confused) {
            out.push_back(std::move(q));
        }
    }
    return out;
}

std::vector<TaskSpec> make_tasks(const Library& lib, const Library& reference, std::size_t count, std::uint64_t seed,
                                 const PlannerConfig& cfg)
{
    const auto clean = clean_subset(lib);
    std::vector<TaskSpec> out;
    if (clean.skills.empty() || reference.skills.empty()) {
        return out;
    }
    Rng rng(seed ^ 0x7a5c);
    const auto g = build_hseg(reference, {cfg.comp_threshold, DepMode::subset});
    const SkillMatcher matcher(reference);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& s = clean.skills[rng.bounded(clean.skills.size())];
        TaskSpec t;
        auto num = std::to_string(i);
        num.insert(0, num.size() < 3 ? 3 - num.size() : 0, '0');
        t.id = "task-" + num;
        t.goal_text = s.goal;
        for (const auto& tag : s.tags) {
            t.goal_text += " " + tag;
        }
        t.state_facts = s.preconditions;
        t.state_facts.insert(TypeTag(std::string(kRegularTags[rng.bounded(kRegularTags.size())])));
        if (auto space = s.goal.find(' '); space != std::string::npos) {
            t.gold_args["target"] = s.goal.substr(space + 1);
        }
        auto candidates = matcher.match(t, cfg);
        std::vector<std::string> gold;
        if (!candidates.empty()) {
            gold = stitch(candidates, g, cfg).actions();
        }
        t.gold_plan = std::move(gold);
        out.push_back(std::move(t));
    }
    return out;
}

// ---------------------------------------------------------------- pipeline

Scenario scenario_by_name(const std::string& name)
{
    Scenario s;
    s.name = name;
    if (name == "clean-200") {
        s.size = 200;
        s.noise_rate = 0.0;
        return s;
    }
    if (name == "noisy-500") {
        s.size = 500;
        s.noise_rate = 0.60;
        return s;
    }
    if (name.rfind("scale-", 0) == 0) {
        std::size_t n = 0;
        try {
            n = std::stoul(name.substr(6));
        } catch (const std::exception&) {
            throw Error(ErrorCode::ConfigInvalid, "bad scenario size in '" + name + "'");
        }
        auto rate = noise_schedule(n);
        if (!rate) {
            throw Error(ErrorCode::ConfigInvalid, "no noise schedule entry for size " + std::to_string(n));
        }
        s.size = n;
        s.noise_rate = *rate;
        return s;
    }
    throw Error(ErrorCode::ConfigInvalid, "unknown scenario '" + name + "'");
}

std::vector<std::string> scenario_names()
{
    std::vector<std::string> out = {"clean-200", "noisy-500"};
    for (std::size_t n : {200, 250, 500, 750, 1000, 1250, 1500, 1750, 2000}) {
        out.push_back("scale-" + std::to_string(n));
    }
    return out;
}

std::optional<std::uint64_t> seed_override()
{
    const char* v = std::getenv("SKILLOPS_SEED");
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    const std::string s(v);
    if (s.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorCode::ConfigInvalid, "SKILLOPS_SEED must be an unsigned integer, got '" + s + "'");
    }
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "SKILLOPS_SEED is out of range");
    }
}

namespace {

PlanStats run_tasks(const Library& lib, std::span<const TaskSpec> tasks, const PlannerConfig& cfg, bool& all_valid)
{
    PlanStats stats;
    const auto g = build_hseg(lib, {cfg.comp_threshold, DepMode::subset});
    const SkillMatcher matcher(lib);
    const auto exec = environment_executor(lib);
    for (const auto& t : tasks) {
        auto run = run_task(matcher, lib, g, t, exec, cfg);
        ++stats.n;
        if (!run.feasible) {
            continue;
        }
        all_valid = all_valid && plan_is_valid(run.plan, g);
        const auto actions = run.plan.actions();
        if (run.completed && t.gold_plan && grade_plan(actions, *t.gold_plan)) {
            ++stats.successes;
        }
    }
    if (stats.n > 0) {
        stats.ci = wilson_ci(stats.successes, stats.n);
    }
    return stats;
}

double mean(const std::vector<double>& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Json plan_stats_json(const PlanStats& p)
{
    return {{"successes", p.successes},
            {"n", p.n},
            {"rate", p.n == 0 ? 0.0 : static_cast<double>(p.successes) / static_cast<double>(p.n)},
            {"wilson_95", {p.ci.lower, p.ci.upper}}};
}

}  // namespace

EvalReport run_pipeline(const Scenario& scenario, const MaintenanceConfig& mcfg, const PlannerConfig& pcfg)
{
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    EvalReport r;
    r.scenario = scenario.name;
    r.seed = scenario.seed;
    r.size = scenario.size;
    r.noise_rate = scenario.noise_rate;

    GenConfig gen;
    gen.seed = scenario.seed;
    gen.target_size = scenario.size;
    gen.noise_rate = scenario.noise_rate;
    gen.source = synth_source(kDefaultSourceSize, scenario.seed);
    const auto raw = build_library(gen);
    r.composition = composition(raw);

    const auto trace = simulate_traffic(raw, scenario.traffic_calls);
    const auto tm = clock::now();
    auto maintained = run_maintenance(raw, trace, mcfg);
    r.maintenance_ms = std::chrono::duration<double, std::milli>(clock::now() - tm).count();
    r.maintenance = maintained.report;

    const auto queries = goal_queries(raw);
    r.queries = queries.size();
    r.precision_raw = mean(precision_per_query(raw, queries, 5, pcfg));
    r.precision_maintained = mean(precision_per_query(maintained.library, queries, 5, pcfg));
    r.confusion_queries = clone_confusion_queries(raw, pcfg).size();

    const auto reference = clean_subset(raw);
    const auto tasks = make_tasks(raw, reference, scenario.tasks, scenario.seed, pcfg);
    r.plans_raw = run_tasks(raw, tasks, pcfg, r.all_plans_valid);
    r.plans_maintained = run_tasks(maintained.library, tasks, pcfg, r.all_plans_valid);

    // Nothing in the pipeline can reach a model; the count is carried through as a structural check.
    r.external_model_calls = maintained.report.external_model_calls;
    if (r.external_model_calls != 0) {
        throw Error(ErrorCode::ConfigInvalid, "pipeline made external model calls");
    }
    r.total_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    return r;
}

Json eval_to_json(const EvalReport& r, bool timing)
{
    Json by_type = Json::object();
    for (auto t : kDegradationTypes) {
        auto it = r.composition.by_type.find(t);
        by_type[std::string(to_string(t))] = it == r.composition.by_type.end() ? 0 : it->second;
    }
    Json m = maintenance_report_to_json(r.maintenance);
    m.erase("actions");
    Json out = {{"scenario", r.scenario},
                {"seed", r.seed},
                {"size", r.size},
                {"noise_rate", r.noise_rate},
                {"composition", {{"clean", r.composition.clean}, {"degraded", r.composition.degraded},
                                 {"by_type", by_type}}},
                {"maintenance", m},
                {"retrieval",
                 {{"queries", r.queries},
                  {"precision_at_5_raw", r.precision_raw},
                  {"precision_at_5_maintained", r.precision_maintained},
                  {"clone_confusion_queries", r.confusion_queries}}},
                {"plans", {{"raw", plan_stats_json(r.plans_raw)},
                           {"maintained", plan_stats_json(r.plans_maintained)},
                           {"all_valid", r.all_plans_valid}}},
                {"external_model_calls", r.external_model_calls}};
    if (timing) {
        out["timing_ms"] = {{"maintenance", r.maintenance_ms}, {"total", r.total_ms}};
    }
    return out;
}

}  // namespace skillops
