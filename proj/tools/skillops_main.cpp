// skillops command-line front end. Every subcommand prints JSON (or writes
// it to --out); exit 0 on success, 1 when a graded check fails, 2 on usage
// or input errors.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "skillops/cgpd.hpp"
#include "skillops/debtgen.hpp"
#include "skillops/error.hpp"
#include "skillops/harness.hpp"
#include "skillops/health.hpp"
#include "skillops/hseg.hpp"
#include "skillops/json_io.hpp"
#include "skillops/library_io.hpp"
#include "skillops/maint.hpp"
#include "skillops/planner.hpp"

namespace fs = std::filesystem;
using namespace skillops;

namespace {

constexpr int kExitGraded = 1;
constexpr int kExitUsage = 2;

void emit(const Json& doc, const std::string& out)
{
    const std::string text = doc.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file(out, text);
    }
}

struct CgpdFlags {
    bool enabled = false;
    CgpdConfig cfg;

    void attach(CLI::App* app)
    {
        app->add_flag("--cgpd", enabled, "Propagate local risk along dep edges");
        app->add_option("--alpha", cfg.alpha, "Upstream weight in (0, 1)");
        app->add_option("--tau", cfg.trigger_threshold, "Validator trigger threshold");
        app->add_option("--eps", cfg.tolerance, "Convergence tolerance");
        app->add_option("--max-iters", cfg.max_iters, "Iteration cap");
    }
};

std::uint64_t effective_seed(std::uint64_t flag)
{
    if (auto s = seed_override()) {
        return *s;
    }
    return flag;
}

ExecutionTrace optional_trace(const std::string& path)
{
    return path.empty() ? ExecutionTrace{} : load_trace(path);
}

Json read_json(const std::string& path)
{
    try {
        return Json::parse(read_file(path));
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
    }
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Skill library diagnosis, maintenance and planning"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Write a synthesized clean source library");
    std::size_t synth_n = kDefaultSourceSize;
    std::uint64_t synth_seed = 42;
    std::string synth_out;
    synth->add_option("--n", synth_n, "Number of skills");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output library directory")->required();

    // inject
    auto* inject_cmd = app.add_subcommand("inject", "Build a noise-graded library from a clean source");
    std::string inject_source;
    std::string inject_out;
    std::size_t inject_n = 500;
    std::optional<double> inject_rate;
    std::uint64_t inject_seed = 42;
    std::vector<double> inject_weights;
    inject_cmd->add_option("--source", inject_source, "Clean source library (synthesized when omitted)");
    inject_cmd->add_option("--out", inject_out, "Output library directory")->required();
    inject_cmd->add_option("--n", inject_n, "Target library size");
    inject_cmd->add_option("--noise-rate", inject_rate, "Degraded fraction; defaults to the schedule for N");
    inject_cmd->add_option("--seed", inject_seed, "Generator seed");
    inject_cmd->add_option("--weights", inject_weights, "Six per-type weights")->expected(6)->delimiter(',');

    // diagnose
    auto* diagnose = app.add_subcommand("diagnose", "Report library health");
    std::string diag_lib;
    std::string diag_trace;
    std::string diag_out;
    bool diag_graph = false;
    std::size_t diag_window = kDefaultWindow;
    CgpdFlags diag_cgpd;
    diagnose->add_option("--lib", diag_lib, "Library directory")->required();
    diagnose->add_option("--trace", diag_trace, "Execution trace (JSONL)");
    diagnose->add_option("--out", diag_out, "Write the report here instead of stdout");
    diagnose->add_option("--window", diag_window, "Calls per skill that count");
    diagnose->add_flag("--dump-graph", diag_graph, "Include the graph in the report");
    diag_cgpd.attach(diagnose);

    // maintain
    auto* maintain = app.add_subcommand("maintain", "Run one maintenance pass");
    std::string maint_lib;
    std::string maint_trace;
    std::string maint_out;
    bool maint_no_force = false;
    MaintenanceConfig mcfg;
    CgpdFlags maint_cgpd;
    maintain->add_option("--lib", maint_lib, "Library directory")->required();
    maintain->add_option("--trace", maint_trace, "Execution trace (JSONL)");
    maintain->add_option("--out", maint_out, "Output library directory")->required();
    maintain->add_flag("--force", mcfg.force, "Maintain regardless of the debt gate (default)");
    maintain->add_flag("--no-force", maint_no_force, "Skip the pass when debt is under the gate");
    maintain->add_option("--gate", mcfg.gate, "Debt gate");
    maintain->add_option("--theta-r", mcfg.theta_r);
    maintain->add_option("--theta-f", mcfg.theta_f);
    maintain->add_option("--theta-u", mcfg.theta_u);
    maintain->add_option("--theta-risk", mcfg.theta_risk);
    maint_cgpd.attach(maintain);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Plan and simulate one task");
    std::string plan_lib;
    std::string plan_task;
    std::string plan_out;
    PlannerConfig pcfg;
    plan_cmd->add_option("--lib", plan_lib, "Library directory")->required();
    plan_cmd->add_option("--task", plan_task, "Task JSON")->required();
    plan_cmd->add_option("--out", plan_out, "Write the plan here instead of stdout");
    plan_cmd->add_option("--lambda", pcfg.lambda, "Lexical weight");
    plan_cmd->add_option("--theta", pcfg.theta_score, "Minimum hybrid score");
    plan_cmd->add_option("--beam-width", pcfg.beam_width);
    plan_cmd->add_option("--horizon", pcfg.horizon);
    plan_cmd->add_option("--max-repairs", pcfg.max_repairs);

    // grade
    auto* grade = app.add_subcommand("grade", "Strict-order plan grading");
    std::string grade_plan_path;
    std::string grade_gold;
    grade->add_option("--plan", grade_plan_path, "Predicted plan JSON")->required();
    grade->add_option("--gold", grade_gold, "Gold plan or task JSON")->required();

    // eval-retrieval
    auto* eval = app.add_subcommand("eval-retrieval", "precision@k of hybrid retrieval, raw vs maintained");
    std::string eval_raw;
    std::string eval_maint;
    std::size_t eval_k = 5;
    bool eval_confusion = false;
    std::string eval_out;
    eval->add_option("--raw", eval_raw, "Raw library (provenance defines relevance)")->required();
    eval->add_option("--maintained", eval_maint, "Maintained library");
    eval->add_option("--k", eval_k);
    eval->add_flag("--confusion-only", eval_confusion, "Only queries where a degraded skill outranks a relevant one");
    eval->add_option("--out", eval_out);

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "inject -> maintain -> plan -> grade scenarios");
    std::vector<std::string> pipe_scenarios;
    std::optional<std::uint64_t> pipe_seed;
    std::string pipe_out;
    bool pipe_no_timing = false;
    pipeline->add_option("--scenario", pipe_scenarios, "clean-200, noisy-500 or scale-<N> (repeatable)");
    pipeline->add_option("--seed", pipe_seed);
    pipeline->add_option("--out", pipe_out);
    pipeline->add_flag("--no-timing", pipe_no_timing, "Omit wall-clock fields");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            save_library(synth_source(synth_n, effective_seed(synth_seed)), synth_out);
            emit({{"skills", synth_n}, {"out", synth_out}}, "");
        } else if (*inject_cmd) {
            GenConfig gen;
            gen.seed = effective_seed(inject_seed);
            gen.target_size = inject_n;
            if (inject_rate) {
                gen.noise_rate = *inject_rate;
            } else if (auto r = noise_schedule(inject_n)) {
                gen.noise_rate = *r;
            } else {
                throw Error(ErrorCode::ConfigInvalid, "--noise-rate is required for an untabulated --n");
            }
            gen.source = inject_source.empty() ? synth_source(kDefaultSourceSize, gen.seed) : load_library(inject_source);
            if (!inject_weights.empty()) {
                std::array<double, 6> w{};
                std::copy(inject_weights.begin(), inject_weights.end(), w.begin());
                gen.type_weights = w;
            }
            const auto lib = build_library(gen);
            save_library(lib, inject_out);
            const auto c = composition(lib);
            Json by_type = Json::object();
            for (const auto& [t, n] : c.by_type) {
                by_type[std::string(to_string(t))] = n;
            }
            emit({{"size", lib.size()}, {"clean", c.clean}, {"degraded", c.degraded}, {"by_type", by_type},
                  {"seed", gen.seed}, {"noise_rate", gen.noise_rate}, {"digest", library_digest(lib)}},
                 "");
        } else if (*diagnose) {
            const auto lib = load_library(diag_lib);
            const auto trace = optional_trace(diag_trace);
            const auto g = build_hseg(lib);
            const auto health = library_health(lib, g, trace, {}, diag_window);
            std::optional<RiskMap> risk;
            std::vector<ValidatorTrigger> triggers;
            if (diag_cgpd.enabled) {
                RiskValues local;
                for (const auto& [id, hv] : health.per_skill) {
                    local[id] = local_risk(hv);
                }
                risk = propagate(g, local, diag_cgpd.cfg);
                triggers = trigger_set(g, *risk, lib, diag_cgpd.cfg.trigger_threshold);
            }
            auto doc = health_to_json(health, risk, triggers);
            if (diag_graph) {
                doc["graph"] = graph_to_json(g);
            }
            emit(doc, diag_out);
        } else if (*maintain) {
            const auto lib = load_library(maint_lib);
            const auto trace = optional_trace(maint_trace);
            if (maint_no_force) {
                mcfg.force = false;
            }
            if (maint_cgpd.enabled) {
                mcfg.cgpd = maint_cgpd.cfg;
            }
            const auto result = run_maintenance(lib, trace, mcfg);
            save_library(result.library, maint_out);
            const auto report = maintenance_report_to_json(result.report);
            write_file(fs::path(maint_out) / "maintenance_report.json", report.dump(2) + "\n");
            std::string audit;
            for (const auto& a : result.report.actions) {
                audit += action_to_json(a).dump() + "\n";
            }
            write_file(fs::path(maint_out) / "audit.jsonl", audit);
            emit(report, "");
        } else if (*plan_cmd) {
            const auto lib = load_library(plan_lib);
            const auto task = task_from_json(read_json(plan_task));
            const auto g = build_hseg(lib, {pcfg.comp_threshold, DepMode::subset});
            const SkillMatcher matcher(lib);
            const auto run = run_task(matcher, lib, g, task, environment_executor(lib), pcfg);
            Json candidates = Json::array();
            for (const auto& c : run.candidates) {
                candidates.push_back({{"id", c.id.str()}, {"bm25", c.bm25}, {"bm25_norm", c.bm25_norm},
                                      {"sem", c.sem}, {"score", c.score}});
            }
            Json doc = {{"task_id", task.id}, {"feasible", run.feasible}, {"candidates", candidates},
                        {"plan", plan_to_json(run.plan)}, {"trace", trace_to_json(run.trace)},
                        {"completed", run.completed}};
            emit(doc, plan_out);
            return run.feasible ? 0 : kExitGraded;
        } else if (*grade) {
            const auto predicted = plan_actions_from_json(read_json(grade_plan_path));
            const auto gold = plan_actions_from_json(read_json(grade_gold));
            const bool pass = grade_plan(predicted, gold);
            emit({{"pass", pass}, {"predicted", predicted}, {"gold", gold}}, "");
            return pass ? 0 : kExitGraded;
        } else if (*eval) {
            const auto raw = load_library(eval_raw);
            auto queries = eval_confusion ? clone_confusion_queries(raw) : goal_queries(raw);
            const auto p_raw = precision_per_query(raw, queries, eval_k);
            Json doc = {{"k", eval_k}, {"queries", queries.size()}};
            auto mean = [](const std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) {
                    s += x;
                }
                return v.empty() ? 0.0 : s / static_cast<double>(v.size());
            };
            doc["precision_raw"] = mean(p_raw);
            Json per = Json::array();
            std::vector<double> p_m;
            if (!eval_maint.empty()) {
                p_m = precision_per_query(load_library(eval_maint), queries, eval_k);
                doc["precision_maintained"] = mean(p_m);
            }
            for (std::size_t i = 0; i < queries.size(); ++i) {
                Json q = {{"query", queries[i].text}, {"raw", p_raw[i]}};
                if (!p_m.empty()) {
                    q["maintained"] = p_m[i];
                }
                per.push_back(q);
            }
            doc["per_query"] = per;
            emit(doc, eval_out);
        } else if (*pipeline) {
            if (pipe_scenarios.empty()) {
                pipe_scenarios = {"clean-200", "noisy-500"};
            }
            Json reports = Json::array();
            for (const auto& name : pipe_scenarios) {
                auto sc = scenario_by_name(name);
                if (pipe_seed) {
                    sc.seed = *pipe_seed;
                }
                sc.seed = effective_seed(sc.seed);
                reports.push_back(eval_to_json(run_pipeline(sc), !pipe_no_timing));
            }
            emit({{"scenarios", reports}}, pipe_out);
        }
    } catch (const Error& e) {
        std::cerr << "skillops: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "skillops: " << e.what() << "\n";
        return kExitUsage;
    }
    return 0;
}
