#pragma once

#include <optional>

#include <json.hpp>

#include "skillops/cgpd.hpp"
#include "skillops/health.hpp"
#include "skillops/hseg.hpp"
#include "skillops/maint.hpp"
#include "skillops/planner.hpp"
#include "skillops/trace.hpp"

namespace skillops {

using Json = nlohmann::json;

[[nodiscard]] Json graph_to_json(const Hseg& g);

/// {H, debt, per_skill:{id:{U,R,C,F,G,local_risk}}}, plus "cgpd" when risk is given.
[[nodiscard]] Json health_to_json(const LibraryHealthReport& report, const std::optional<RiskMap>& risk = std::nullopt,
                                  const std::vector<ValidatorTrigger>& triggers = {});

[[nodiscard]] Json risk_to_json(const RiskMap& risk);
[[nodiscard]] Json action_to_json(const MaintenanceAction& action);
[[nodiscard]] Json maintenance_report_to_json(const MaintenanceReport& report);

[[nodiscard]] Json plan_to_json(const Plan& plan);
/// Accepts a plan document or a bare list of action strings. Throws ConfigInvalid.
[[nodiscard]] std::vector<std::string> plan_actions_from_json(const Json& j);

/// Throws ConfigInvalid for a malformed task document.
[[nodiscard]] TaskSpec task_from_json(const Json& j);
[[nodiscard]] Json task_to_json(const TaskSpec& task);

[[nodiscard]] Json trace_entry_to_json(const TraceEntry& e);
[[nodiscard]] Json trace_to_json(const ExecutionTrace& trace);

}  // namespace skillops
