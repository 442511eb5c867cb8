#include "skillops/json_io.hpp"

#include "skillops/error.hpp"

namespace skillops {

namespace {

Json tags(const TypeSet& s)
{
    Json out = Json::array();
    for (const auto& t : s) {
        out.push_back(t.str());
    }
    return out;
}

const char* inserted_name(const std::optional<InsertedKind>& k)
{
    if (!k) {
        return nullptr;
    }
    return *k == InsertedKind::validator ? "validator" : "adapter";
}

}  // namespace

Json graph_to_json(const Hseg& g)
{
    Json nodes = Json::array();
    for (const auto& id : g.nodes()) {
        nodes.push_back(id.str());
    }
    Json edges = Json::array();
    for (const auto& e : g.edges()) {
        edges.push_back({{"src", e.src.str()}, {"dst", e.dst.str()}, {"kind", std::string(to_string(e.kind))}});
    }
    Json adapters = Json::array();
    for (const auto& a : g.adapters()) {
        adapters.push_back({{"id", a.id.str()},
                            {"src", a.src.str()},
                            {"dst", a.dst.str()},
                            {"preconditions", tags(a.preconditions)},
                            {"artifact_types", tags(a.artifact_types)}});
    }
    return {{"nodes", nodes}, {"edges", edges}, {"adapters", adapters}};
}

Json risk_to_json(const RiskMap& risk)
{
    Json values = Json::object();
    for (const auto& [id, v] : risk.values) {
        values[id.str()] = v;
    }
    return {{"values", values},
            {"iterations", risk.iterations_used},
            {"converged", risk.converged},
            {"residuals", risk.residuals}};
}

Json health_to_json(const LibraryHealthReport& report, const std::optional<RiskMap>& risk,
                    const std::vector<ValidatorTrigger>& triggers)
{
    Json per = Json::object();
    for (const auto& [id, hv] : report.per_skill) {
        per[id.str()] = {{"U", hv.U}, {"R", hv.R}, {"C", hv.C}, {"F", hv.F}, {"G", hv.G},
                         {"local_risk", local_risk(hv)}};
    }
    Json out = {{"H", report.H}, {"debt", report.debt}, {"per_skill", per}};
    if (risk) {
        out["cgpd"] = risk_to_json(*risk);
        Json trig = Json::array();
        for (const auto& t : triggers) {
            trig.push_back({{"skill", t.skill.str()}, {"risk", t.risk}});
        }
        out["cgpd"]["triggers"] = trig;
    }
    return out;
}

Json action_to_json(const MaintenanceAction& a)
{
    Json out = {{"kind", std::string(to_string(a.kind()))}};
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, action::Merge>) {
                out["keep"] = op.keep.str();
                out["drop"] = op.drop.str();
            } else if constexpr (std::is_same_v<T, action::Repair> || std::is_same_v<T, action::AddValidator>) {
                out["skill"] = op.skill.str();
                out["source_sibling"] = op.source_sibling ? Json(op.source_sibling->str()) : Json(nullptr);
            } else if constexpr (std::is_same_v<T, action::Retire>) {
                out["skill"] = op.skill.str();
            } else if constexpr (std::is_same_v<T, action::AddAdapter>) {
                out["src"] = op.src.str();
                out["dst"] = op.dst.str();
            } else {
                out["skill"] = op.skill.str();
                out["bindings"] = op.bindings;
            }
        },
        a.op);
    out["reason"] = a.reason;
    out["outcome"] = a.outcome;
    return out;
}

Json maintenance_report_to_json(const MaintenanceReport& r)
{
    Json counts = Json::object();
    for (auto k : kActionKinds) {
        counts[std::string(to_string(k))] = r.count(k);
    }
    Json actions = Json::array();
    for (const auto& a : r.actions) {
        actions.push_back(action_to_json(a));
    }
    Json unmerged = Json::array();
    for (const auto& [a, b] : r.red_unmerged) {
        unmerged.push_back({a.str(), b.str()});
    }
    Json out = {{"size_before", r.size_before},
                {"size_after", r.size_after},
                {"action_counts", counts},
                {"actions", actions},
                {"H_before", r.H_before},
                {"H_after", r.H_after},
                {"external_model_calls", r.external_model_calls},
                {"skipped", r.skipped},
                {"noop_actions", r.noop_actions},
                {"red_unmerged", unmerged}};
    if (r.risk) {
        out["cgpd"] = risk_to_json(*r.risk);
    }
    return out;
}

Json plan_to_json(const Plan& plan)
{
    Json steps = Json::array();
    for (const auto& s : plan.steps) {
        Json step = {{"skill", s.skill.str()}, {"bindings", s.bindings}};
        if (const char* k = inserted_name(s.inserted)) {
            step["inserted"] = k;
        } else {
            step["inserted"] = nullptr;
        }
        steps.push_back(step);
    }
    return {{"steps", steps}, {"total_score", plan.total_score}, {"actions", plan.actions()}};
}

std::vector<std::string> plan_actions_from_json(const Json& j)
{
    try {
        if (j.is_array()) {
            return j.get<std::vector<std::string>>();
        }
        if (j.contains("gold_plan")) {
            return j.at("gold_plan").get<std::vector<std::string>>();
        }
        if (j.contains("actions")) {
            return j.at("actions").get<std::vector<std::string>>();
        }
        if (j.contains("plan")) {
            return plan_actions_from_json(j.at("plan"));
        }
        std::vector<std::string> out;
        for (const auto& s : j.at("steps")) {
            if (s.value("inserted", Json(nullptr)).is_null()) {
                out.push_back(s.at("skill").get<std::string>());
            }
        }
        return out;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("plan document: ") + e.what());
    }
}

TaskSpec task_from_json(const Json& j)
{
    try {
        TaskSpec t;
        t.id = j.at("id").get<std::string>();
        t.goal_text = j.at("goal_text").get<std::string>();
        for (const auto& f : j.value("state_facts", Json::array())) {
            t.state_facts.insert(TypeTag(f.get<std::string>()));
        }
        if (j.contains("gold_args") && !j.at("gold_args").is_null()) {
            t.gold_args = j.at("gold_args").get<std::map<std::string, std::string>>();
        }
        if (j.contains("gold_plan") && !j.at("gold_plan").is_null()) {
            t.gold_plan = j.at("gold_plan").get<std::vector<std::string>>();
        }
        return t;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("task document: ") + e.what());
    }
}

Json task_to_json(const TaskSpec& t)
{
    Json out = {{"id", t.id}, {"goal_text", t.goal_text}, {"state_facts", tags(t.state_facts)},
                {"gold_args", t.gold_args}};
    out["gold_plan"] = t.gold_plan ? Json(*t.gold_plan) : Json(nullptr);
    return out;
}

Json trace_entry_to_json(const TraceEntry& e)
{
    Json out = {{"task_id", e.task_id},
                {"skill_id", e.skill.str()},
                {"step", e.step},
                {"outcome", std::string(to_string(e.outcome))}};
    if (e.error_code) {
        out["error_code"] = *e.error_code;
    }
    return out;
}

Json trace_to_json(const ExecutionTrace& trace)
{
    Json out = Json::array();
    for (const auto& e : trace.entries) {
        out.push_back(trace_entry_to_json(e));
    }
    return out;
}

}  // namespace skillops
