#pragma once

#include "hubmesh/mpc.hpp"
#include "json.hpp"

// ADL hooks so nlohmann::json converts the result types directly. Doubles
// round-trip exactly (shortest-representation printing), which keeps
// serialized episode logs bit-identical under reload.

namespace hubmesh::qp {
const char* status_name(SolveStatus s);
SolveStatus status_from_name(const std::string& name);
}  // namespace hubmesh::qp

namespace hubmesh::dispatch {
void to_json(nlohmann::json& j, const HubStepFlows& f);
void from_json(const nlohmann::json& j, HubStepFlows& f);
void to_json(nlohmann::json& j, const CostBreakdown& c);
void from_json(const nlohmann::json& j, CostBreakdown& c);
void to_json(nlohmann::json& j, const StepControls& s);
void from_json(const nlohmann::json& j, StepControls& s);
}  // namespace hubmesh::dispatch

namespace hubmesh::mpc {
void to_json(nlohmann::json& j, const StepRecord& r);
void from_json(const nlohmann::json& j, StepRecord& r);
void to_json(nlohmann::json& j, const EpisodeLog& log);
void from_json(const nlohmann::json& j, EpisodeLog& log);
void to_json(nlohmann::json& j, const ComparisonRow& row);
void from_json(const nlohmann::json& j, ComparisonRow& row);
void to_json(nlohmann::json& j, const ComparisonTable& t);
void from_json(const nlohmann::json& j, ComparisonTable& t);
}  // namespace hubmesh::mpc
