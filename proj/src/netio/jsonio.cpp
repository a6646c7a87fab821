#include "hubmesh/netio/jsonio.hpp"

#include <stdexcept>

using nlohmann::json;

namespace hubmesh::qp {

const char* status_name(SolveStatus s)
{
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

SolveStatus status_from_name(const std::string& name)
{
    if (name == "optimal") return SolveStatus::Optimal;
    if (name == "max_iter") return SolveStatus::MaxIter;
    if (name == "infeasible") return SolveStatus::Infeasible;
    throw std::invalid_argument("unknown solve status '" + name + "'");
}

}  // namespace hubmesh::qp

namespace hubmesh::dispatch {

void to_json(json& j, const HubStepFlows& f)
{
    j = json{{"conv_input", f.conv_input}, {"soc", f.soc},
             {"charge", f.charge},         {"discharge", f.discharge},
             {"grid_import", f.grid_import}, {"grid_export", f.grid_export},
             {"renewable", f.renewable},   {"slack", f.slack}};
}

void from_json(const json& j, HubStepFlows& f)
{
    j.at("conv_input").get_to(f.conv_input);
    j.at("soc").get_to(f.soc);
    j.at("charge").get_to(f.charge);
    j.at("discharge").get_to(f.discharge);
    j.at("grid_import").get_to(f.grid_import);
    j.at("grid_export").get_to(f.grid_export);
    j.at("renewable").get_to(f.renewable);
    j.at("slack").get_to(f.slack);
}

void to_json(json& j, const CostBreakdown& c)
{
    j = json{{"grid_import", c.grid_import},
             {"grid_export_revenue", c.grid_export_revenue},
             {"gas", c.gas},
             {"fees", c.fees},
             {"slack_penalty", c.slack_penalty}};
}

void from_json(const json& j, CostBreakdown& c)
{
    j.at("grid_import").get_to(c.grid_import);
    j.at("grid_export_revenue").get_to(c.grid_export_revenue);
    j.at("gas").get_to(c.gas);
    j.at("fees").get_to(c.fees);
    j.at("slack_penalty").get_to(c.slack_penalty);
}

void to_json(json& j, const StepControls& s)
{
    j = json{{"dt_hours", s.dt_hours}, {"hubs", s.hubs}, {"trade", s.trade}};
}

void from_json(const json& j, StepControls& s)
{
    j.at("dt_hours").get_to(s.dt_hours);
    j.at("hubs").get_to(s.hubs);
    j.at("trade").get_to(s.trade);
}

}  // namespace hubmesh::dispatch

namespace hubmesh::mpc {

void to_json(json& j, const StepRecord& r)
{
    j = json{{"step", r.step},
             {"clock_hours", r.clock_hours},
             {"plan", r.plan},
             {"realized_demand_e", r.realized_demand_e},
             {"realized_demand_h", r.realized_demand_h},
             {"realized_renewable", r.realized_renewable},
             {"mismatch_grid_kw", r.mismatch_grid_kw},
             {"mismatch_thermal_kw", r.mismatch_thermal_kw},
             {"soc", r.soc},
             {"soc_clamp_kwh", r.soc_clamp_kwh},
             {"step_cost", r.step_cost},
             {"admm_iterations", r.admm_iterations},
             {"plan_cost_total", r.plan_cost_total}};
}

void from_json(const json& j, StepRecord& r)
{
    j.at("step").get_to(r.step);
    j.at("clock_hours").get_to(r.clock_hours);
    j.at("plan").get_to(r.plan);
    j.at("realized_demand_e").get_to(r.realized_demand_e);
    j.at("realized_demand_h").get_to(r.realized_demand_h);
    j.at("realized_renewable").get_to(r.realized_renewable);
    j.at("mismatch_grid_kw").get_to(r.mismatch_grid_kw);
    j.at("mismatch_thermal_kw").get_to(r.mismatch_thermal_kw);
    j.at("soc").get_to(r.soc);
    j.at("soc_clamp_kwh").get_to(r.soc_clamp_kwh);
    j.at("step_cost").get_to(r.step_cost);
    j.at("admm_iterations").get_to(r.admm_iterations);
    j.at("plan_cost_total").get_to(r.plan_cost_total);
}

void to_json(json& j, const EpisodeLog& log)
{
    j = json{{"engine", to_string(log.engine)},
             {"hub_ids", log.hub_ids},
             {"steps", log.steps},
             {"total_hub_cost", log.total_hub_cost},
             {"total_cost", log.total_cost},
             {"grid_import_kwh", log.grid_import_kwh},
             {"grid_export_kwh", log.grid_export_kwh},
             {"unserved_heat_kwh", log.unserved_heat_kwh},
             {"discarded_heat_kwh", log.discarded_heat_kwh}};
}

void from_json(const json& j, EpisodeLog& log)
{
    log.engine = engine_from_string(j.at("engine").get<std::string>());
    j.at("hub_ids").get_to(log.hub_ids);
    j.at("steps").get_to(log.steps);
    j.at("total_hub_cost").get_to(log.total_hub_cost);
    j.at("total_cost").get_to(log.total_cost);
    j.at("grid_import_kwh").get_to(log.grid_import_kwh);
    j.at("grid_export_kwh").get_to(log.grid_export_kwh);
    j.at("unserved_heat_kwh").get_to(log.unserved_heat_kwh);
    j.at("discarded_heat_kwh").get_to(log.discarded_heat_kwh);
}

void to_json(json& j, const ComparisonRow& row)
{
    j = json{{"mode", to_string(row.engine)},
             {"total_cost_chf", row.total_cost_chf},
             {"grid_elec_kwh", row.grid_elec_kwh}};
}

void from_json(const json& j, ComparisonRow& row)
{
    row.engine = engine_from_string(j.at("mode").get<std::string>());
    j.at("total_cost_chf").get_to(row.total_cost_chf);
    j.at("grid_elec_kwh").get_to(row.grid_elec_kwh);
}

void to_json(json& j, const ComparisonTable& t)
{
    j = json{{"rows", t.rows}};
}

void from_json(const json& j, ComparisonTable& t)
{
    j.at("rows").get_to(t.rows);
}

}  // namespace hubmesh::mpc
