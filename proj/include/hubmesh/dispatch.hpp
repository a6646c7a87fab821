#pragma once

#include <string>
#include <vector>

#include "hubmesh/horizon.hpp"
#include "hubmesh/model.hpp"
#include "hubmesh/qpsolve.hpp"

namespace hubmesh::dispatch {

enum class Mode { Coordinated, Islanded };

const char* to_string(Mode m);

/// Column layout of the dispatch QP. Variables are grouped per step so the
/// constraint matrix stays banded: within a step block every hub contributes
/// [converter inputs][soc, charge, discharge per storage][import, export per
/// grid][renewables][thermal slack], followed by [trade, fee+, fee-] per link.
struct HubBlock {
    int conv0 = 0;
    int sto0 = 0;
    int grid0 = 0;
    int ren0 = 0;
    int eps = -1;  // offset of the thermal slack, -1 when the hub has no thermal balance
    int n_conv = 0, n_sto = 0, n_grid = 0, n_ren = 0;
};

struct VariableLayout {
    std::size_t steps = 0;
    int block = 0;  // decision variables per step
    std::vector<HubBlock> hubs;
    int link0 = 0;
    int n_links = 0;

    int n_vars() const { return static_cast<int>(steps) * block; }
    int base(std::size_t k) const { return static_cast<int>(k) * block; }

    int conv_input(int h, int c, std::size_t k) const { return base(k) + hubs[h].conv0 + c; }
    int soc(int h, int s, std::size_t k) const { return base(k) + hubs[h].sto0 + 3 * s; }
    int charge(int h, int s, std::size_t k) const { return base(k) + hubs[h].sto0 + 3 * s + 1; }
    int discharge(int h, int s, std::size_t k) const { return base(k) + hubs[h].sto0 + 3 * s + 2; }
    int grid_import(int h, int g, std::size_t k) const { return base(k) + hubs[h].grid0 + 2 * g; }
    int grid_export(int h, int g, std::size_t k) const {
        return base(k) + hubs[h].grid0 + 2 * g + 1;
    }
    int renewable(int h, int r, std::size_t k) const { return base(k) + hubs[h].ren0 + r; }
    int slack(int h, std::size_t k) const {
        return hubs[h].eps < 0 ? -1 : base(k) + hubs[h].eps;
    }
    int trade(int l, std::size_t k) const { return base(k) + link0 + 3 * l; }
    int fee_pos(int l, std::size_t k) const { return base(k) + link0 + 3 * l + 1; }
    int fee_neg(int l, std::size_t k) const { return base(k) + link0 + 3 * l + 2; }
};

/// Assembled QP plus everything needed to refresh it in place. The constraint
/// matrix rows are [structural; identity], so the bound row of variable j is
/// m_struct + j. Receding-horizon re-solves only touch q, l and u.
struct QpTemplate {
    qp::SparseQp qp;
    VariableLayout layout;
    Eigen::Index m_struct = 0;
    Mode mode = Mode::Coordinated;
    std::vector<std::string> row_desc;  // structural rows, for diagnostics
};

/// Requires a validated network whose series are aligned to the grid (length
/// equal to grid.size(); empty series count as zero). Throws
/// std::invalid_argument otherwise.
QpTemplate build_qp(const model::Network& net, const horizon::TimeGrid& grid, Mode mode);

/// Rewrites q, l, u from the network data (demands, prices, profiles,
/// soc_init) without touching P or A. The network must match the structure
/// the template was built from.
void refresh_qp(QpTemplate& tpl, const model::Network& net, const horizon::TimeGrid& grid);

/// One incident link as seen by a single hub.
struct HubLinkView {
    int link_pos = 0;   // index into the network link list
    double sign = 1.0;  // +1 when this hub is hub_a
    model::Carrier carrier = model::Carrier::Electricity;
    double limit = 0.0;
    double fee = 0.0;
};

/// Local subproblem of one hub: its own devices plus a private copy v of each
/// incident trade, held in the hub frame (positive imports into this hub).
/// The consensus penalty contributes rho on the v diagonal of P; its linear
/// part is set per iteration through update_linear_cost. The fee auxiliaries
/// charge only the import side, so summing local costs over hubs reproduces
/// the network fee total.
struct HubQpTemplate {
    qp::SparseQp qp;  // q here excludes the consensus penalty term
    VariableLayout layout;  // single hub at position 0; links are the incident ones
    Eigen::Index m_struct = 0;
    std::vector<HubLinkView> links;
    double rho = 0.0;
    std::vector<std::string> row_desc;
};

HubQpTemplate build_hub_qp(const model::Hub& hub, const std::vector<HubLinkView>& links,
                           const horizon::TimeGrid& grid, double rho);

void refresh_hub_qp(HubQpTemplate& tpl, const model::Hub& hub, const horizon::TimeGrid& grid);

/// All flows of one hub during one step, in the layout's device order.
struct HubStepFlows {
    std::vector<double> conv_input;   // kW per converter
    std::vector<double> soc;          // kWh at the end of the step
    std::vector<double> charge;       // kW per storage
    std::vector<double> discharge;    // kW per storage
    std::vector<double> grid_import;  // kW per grid connection
    std::vector<double> grid_export;  // kW per grid connection
    std::vector<double> renewable;    // kW dispatched
    double slack = 0.0;               // kW on the thermal balance

    friend bool operator==(const HubStepFlows&, const HubStepFlows&) = default;
};

struct CostBreakdown {
    double grid_import = 0.0;          // CHF paid for non-gas imports
    double grid_export_revenue = 0.0;  // CHF earned from exports
    double gas = 0.0;                  // CHF paid on gas-carrier connections
    double fees = 0.0;                 // CHF of network fees
    double slack_penalty = 0.0;        // CHF from the quadratic thermal slack

    double total() const {
        return grid_import - grid_export_revenue + gas + fees + slack_penalty;
    }

    friend bool operator==(const CostBreakdown&, const CostBreakdown&) = default;
};

struct DispatchSolution {
    horizon::TimeGrid grid;
    std::vector<std::string> hub_ids;
    std::vector<std::vector<HubStepFlows>> hub_flows;  // [hub][step]
    std::vector<std::vector<double>> trade;            // [link][step], kW into hub_a
    CostBreakdown cost;                                // network totals
    std::vector<CostBreakdown> hub_cost;               // fees attributed to the importer
    qp::SolveStatus status = qp::SolveStatus::MaxIter;
    int iterations = 0;
    double objective = 0.0;  // raw QP objective at the reported point
};

/// Step-0 slice of a solution, the only part actually applied to the plant.
struct StepControls {
    double dt_hours = 0.0;
    std::vector<HubStepFlows> hubs;
    std::vector<double> trade;

    friend bool operator==(const StepControls&, const StepControls&) = default;
};

/// Tariff data needed to price a solution without the full network.
struct CostParams {
    struct HubTariffs {
        std::vector<model::Carrier> grid_carrier;
        std::vector<horizon::Series> price_import;
        std::vector<horizon::Series> price_export;
        double slack_weight = 1e3;
    };
    std::vector<HubTariffs> hubs;
    std::vector<double> link_fee;
    std::vector<int> link_hub_a, link_hub_b;
};

CostParams cost_params(const model::Network& net);

/// Recomputes the network cost from raw flows. fees = fee * |trade| * dt,
/// counted once per link.
CostBreakdown evaluate_cost(const DispatchSolution& sol, const CostParams& params,
                            const horizon::TimeGrid& grid);

/// Per-hub breakdowns; the fee of each link lands on whichever hub imports.
std::vector<CostBreakdown> evaluate_hub_costs(const DispatchSolution& sol,
                                              const CostParams& params,
                                              const horizon::TimeGrid& grid);

/// Worst residual per constraint family, recomputed from the model (not from
/// the QP matrices).
struct FeasibilityReport {
    double balance_kw = 0.0;    // load balances, all carriers
    double dynamics_kwh = 0.0;  // storage dynamics
    double bound_kw = 0.0;      // device, grid and soc bounds
    double trade_kw = 0.0;      // trade limit overshoot
    std::string worst;
    double tol = 1e-6;

    bool ok() const {
        return balance_kw <= tol && dynamics_kwh <= tol && bound_kw <= tol && trade_kw <= tol;
    }
};

FeasibilityReport check_feasibility(const DispatchSolution& sol, const model::Network& net,
                                    const horizon::TimeGrid& grid, double tol = 1e-6);

/// Reads one hub's flows out of a primal vector. Works for network layouts
/// (hub_pos selects the hub) and hub-local layouts (hub_pos 0).
std::vector<HubStepFlows> extract_hub_flows(const Eigen::VectorXd& x,
                                            const VariableLayout& layout, int hub_pos);

/// Turns a QP result into a DispatchSolution with costs filled in. Throws
/// std::runtime_error naming the worst structural row when the solver
/// certified infeasibility.
DispatchSolution extract_solution(const qp::QpResult& result, const QpTemplate& tpl,
                                  const model::Network& net, const horizon::TimeGrid& grid);

/// build_qp + solve + extract in one call.
DispatchSolution solve(const model::Network& net, const horizon::TimeGrid& grid, Mode mode,
                       const qp::SolverSettings& settings = {});

/// Cuts a window out of base-grid series data (uniform base_dt_hours steps,
/// starting at start_index) and resamples every series onto the grid. Storage
/// soc_init values are passed through unchanged.
model::Network window_network(const model::Network& base, double base_dt_hours,
                              std::size_t start_index, const horizon::TimeGrid& grid);

}  // namespace hubmesh::dispatch

namespace hubmesh::horizon {

/// Extracts the step-0 controls, the only ones applied on the plant.
dispatch::StepControls first_step_control(const dispatch::DispatchSolution& sol);

}  // namespace hubmesh::horizon
