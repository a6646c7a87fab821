#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hubmesh/admm.hpp"
#include "hubmesh/dispatch.hpp"
#include "hubmesh/forecast.hpp"

namespace hubmesh::mpc {

enum class Engine { Coordinated, Islanded, Admm };

const char* to_string(Engine e);
Engine engine_from_string(const std::string& name);

/// Episode setup. The network series are the truth on a uniform base grid;
/// samples before start_index are forecast history, the rest feed the plant
/// and the perfect-forecast windows.
struct EpisodeConfig {
    int n_steps = 72;
    std::vector<horizon::GridSegment> grid_spec = horizon::default_grid_spec();
    double base_dt_hours = 1.0;
    std::size_t start_index = 24;
    int weather_refresh_steps = 12;
    std::map<std::string, forecast::Kind> hub_forecast;  // by hub id; absent = perfect
    std::map<std::string, forecast::PvModel> pv_models;  // by "hub_id/device_id"
    horizon::Series irradiance;  // W/m2 truth on the base grid
};

/// True plant state, as opposed to what the controller believes.
struct PlantState {
    double clock_hours = 0.0;
    std::size_t base_index = 0;
    std::vector<std::vector<double>> soc;  // [hub][storage] kWh, within [0, capacity]
    std::vector<dispatch::CostBreakdown> ledger;  // cumulative realized cost per hub
    std::vector<double> grid_import_kwh;          // cumulative electric import per hub
    std::vector<double> grid_export_kwh;
    double unserved_heat_kwh = 0.0;   // thermal deficit with no thermal grid to cover it
    double discarded_heat_kwh = 0.0;  // thermal surplus dumped at the plant

    friend bool operator==(const PlantState&, const PlantState&) = default;
};

/// One control step. realized_renewable holds the production actually
/// applied: available truth for must-take units, min(plan, truth) for
/// curtailable ones. mismatch_grid_kw is the extra electric slack-grid flow
/// closing the realized balance (positive imports); mismatch_thermal_kw is
/// its thermal counterpart (grid flow when the hub has a thermal connection,
/// plant-side unserved/discarded heat otherwise).
struct StepRecord {
    int step = 0;
    double clock_hours = 0.0;
    dispatch::StepControls plan;
    std::vector<double> realized_demand_e;
    std::vector<double> realized_demand_h;
    std::vector<std::vector<double>> realized_renewable;
    std::vector<double> mismatch_grid_kw;
    std::vector<double> mismatch_thermal_kw;
    std::vector<std::vector<double>> soc;     // plant SoC after the step
    std::vector<double> soc_clamp_kwh;        // feedback clamp magnitude per hub
    std::vector<dispatch::CostBreakdown> step_cost;
    int admm_iterations = 0;
    double plan_cost_total = 0.0;  // predicted cost of the whole planned horizon

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EpisodeLog {
    Engine engine = Engine::Coordinated;
    std::vector<std::string> hub_ids;
    std::vector<StepRecord> steps;
    std::vector<dispatch::CostBreakdown> total_hub_cost;
    dispatch::CostBreakdown total_cost;
    std::vector<double> grid_import_kwh;
    std::vector<double> grid_export_kwh;
    double unserved_heat_kwh = 0.0;
    double discarded_heat_kwh = 0.0;

    double total_grid_elec_kwh() const;

    friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// Receding-horizon driver. Keeps the QP factorization (or the ADMM workers
/// and consensus state) alive across steps, so each re-solve is a refresh
/// plus a warm-started solve.
class EpisodeRunner {
public:
    EpisodeRunner(model::Network base, EpisodeConfig cfg, Engine engine,
                  admm::AdmmConfig admm_cfg = {}, qp::SolverSettings qp_settings = {});

    StepRecord step();
    EpisodeLog run();

    const PlantState& plant() const { return state_; }
    const horizon::TimeGrid& grid() const { return grid_; }
    const model::Network& network() const { return base_; }
    int steps_done() const { return step_count_; }

private:
    model::Network forecast_window();
    dispatch::DispatchSolution solve_window(const model::Network& window, int& admm_iters);

    model::Network base_;
    EpisodeConfig cfg_;
    Engine engine_;
    admm::AdmmConfig admm_cfg_;
    qp::SolverSettings qp_settings_;
    horizon::TimeGrid grid_;
    std::size_t horizon_base_steps_ = 0;
    PlantState state_;
    int step_count_ = 0;

    std::optional<dispatch::QpTemplate> tpl_;
    std::unique_ptr<qp::QpSolver> solver_;
    qp::QpResult last_;
    std::vector<std::unique_ptr<admm::LocalHubWorker>> workers_;
    admm::WarmState warm_;

    horizon::Series weather_snapshot_;
    std::size_t weather_origin_ = 0;
};

EpisodeLog run_episode(const model::Network& base, const EpisodeConfig& cfg, Engine engine,
                       const admm::AdmmConfig& admm_cfg = {},
                       const qp::SolverSettings& qp_settings = {});

struct ComparisonRow {
    Engine engine = Engine::Coordinated;
    double total_cost_chf = 0.0;
    double grid_elec_kwh = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
};

ComparisonTable compare_modes(const model::Network& base, const EpisodeConfig& cfg,
                              const std::vector<Engine>& engines,
                              const admm::AdmmConfig& admm_cfg = {},
                              const qp::SolverSettings& qp_settings = {});

}  // namespace hubmesh::mpc
