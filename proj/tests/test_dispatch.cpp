#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "hubmesh/dispatch.hpp"
#include "hubmesh/netio/scenario.hpp"
#include "support/oracles.hpp"

using namespace hubmesh;
using horizon::Series;
using horizon::TimeGrid;
using horizon::Unit;
using model::Carrier;

namespace {

qp::SolverSettings tight()
{
    qp::SolverSettings s;
    s.tol_abs = 1e-9;
    s.tol_rel = 1e-9;
    s.max_iter = 100000;
    return s;
}

model::Hub consumer_hub(const std::string& id, double demand_kw, double price, std::size_t n)
{
    model::Hub hub;
    hub.id = id;
    model::GridConnection g;
    g.carrier = Carrier::Electricity;
    g.price_import = Series::constant(Unit::ChfPerKwh, price, n);
    g.price_export = Series::constant(Unit::ChfPerKwh, 0.05, n);
    g.import_max = 100.0;
    g.export_max = 100.0;
    g.is_slack = true;
    hub.grids.push_back(g);
    if (demand_kw != 0.0) hub.demand_e = Series::constant(Unit::Kw, demand_kw, n);
    return hub;
}

/// Spec'd two-hub instance: hub a generates from gas at 0.10 CHF/kWh, hub b
/// needs 4 kW and pays 0.30 to its own grid; the link costs 0.05 per kWh.
model::Network chp_pair(std::size_t n)
{
    model::Network net;

    model::Hub a = consumer_hub("a", 0.0, 0.30, n);
    model::Converter chp;
    chp.id = "chp";
    chp.input_share = {{Carrier::Gas, 1.0}};
    chp.output_gain = {{Carrier::Electricity, 1.0}};
    chp.input_max = 10.0;
    a.converters.push_back(chp);
    model::GridConnection gas;
    gas.carrier = Carrier::Gas;
    gas.price_import = Series::constant(Unit::ChfPerKwh, 0.10, n);
    gas.price_export = Series::constant(Unit::ChfPerKwh, 0.0, n);
    gas.import_max = 100.0;
    a.grids.push_back(gas);
    net.hubs.push_back(a);

    net.hubs.push_back(consumer_hub("b", 4.0, 0.30, n));

    model::TradeLink link;
    link.id = 0;
    link.hub_a = "a";
    link.hub_b = "b";
    link.carrier = Carrier::Electricity;
    link.limit = 10.0;
    link.fee = 0.05;
    net.links.push_back(link);
    return net;
}

model::Network windowed_exp1(const TimeGrid& grid)
{
    const auto sc = netio::load_scenario(oracle::data_path("exp1.json"));
    return dispatch::window_network(sc.network, sc.episode.base_dt_hours,
                                    sc.episode.start_index, grid);
}

}  // namespace

TEST_CASE("a single hub imports exactly its demand")
{
    const std::size_t n = 4;
    model::Network net;
    net.hubs.push_back(consumer_hub("solo", 5.0, 0.25, n));
    const TimeGrid grid = horizon::make_grid({{static_cast<int>(n), 1.0}});

    const auto sol = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    for (std::size_t k = 0; k < n; ++k) {
        CHECK(sol.hub_flows[0][k].grid_import[0] == doctest::Approx(5.0).epsilon(1e-6));
        CHECK(std::abs(sol.hub_flows[0][k].grid_export[0]) <= 1e-6);
    }
    CHECK(sol.cost.total() == doctest::Approx(5.0 * 0.25 * 4.0).epsilon(1e-6));
    CHECK(sol.cost.grid_import == doctest::Approx(5.0).epsilon(1e-6));
    CHECK(sol.cost.fees == 0.0);
    CHECK(std::abs(sol.objective - sol.cost.total()) <= 1e-6 * (1.0 + std::abs(sol.cost.total())));
    CHECK(sol.trade.empty());
}

TEST_CASE("cheap on-site generation is traded to the neighbour when coordinated")
{
    const auto net = chp_pair(1);
    const TimeGrid grid({1.0});

    const auto coord = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(coord.status == qp::SolveStatus::Optimal);
    // trade is measured into hub a, so 4 kW flowing a -> b reads -4
    CHECK(coord.trade[0][0] == doctest::Approx(-4.0).epsilon(1e-5));
    CHECK(coord.cost.total() == doctest::Approx(0.60).epsilon(1e-5));
    CHECK(coord.cost.gas == doctest::Approx(0.40).epsilon(1e-5));
    CHECK(coord.cost.fees == doctest::Approx(0.20).epsilon(1e-5));

    // the fee lands on the importer
    CHECK(coord.hub_cost[0].fees == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(coord.hub_cost[1].fees == doctest::Approx(0.20).epsilon(1e-5));

    const auto isl = dispatch::solve(net, grid, dispatch::Mode::Islanded, tight());
    REQUIRE(isl.status == qp::SolveStatus::Optimal);
    for (const auto& link : isl.trade)
        for (double v : link) CHECK(std::abs(v) <= 1e-7);
    CHECK(isl.cost.total() == doctest::Approx(1.20).epsilon(1e-5));
    CHECK(coord.cost.total() < isl.cost.total());
}

TEST_CASE("evaluate_cost prices hand-built flows")
{
    const std::size_t n = 2;
    model::Network net;
    net.hubs.push_back(consumer_hub("solo", 1.0, 0.25, n));
    const TimeGrid grid({1.0, 1.0});
    const auto params = dispatch::cost_params(net);

    dispatch::DispatchSolution sol;
    sol.grid = grid;
    sol.hub_ids = {"solo"};
    dispatch::HubStepFlows step;
    step.grid_import = {1.0};
    step.grid_export = {0.0};
    sol.hub_flows = {{step, step}};

    const auto cost = dispatch::evaluate_cost(sol, params, grid);
    CHECK(cost.grid_import == doctest::Approx(0.50).epsilon(1e-12));
    CHECK(cost.total() == doctest::Approx(0.50).epsilon(1e-12));

    step.grid_import = {0.0};
    sol.hub_flows = {{step, step}};
    const auto zero = dispatch::evaluate_cost(sol, params, grid);
    CHECK(zero.total() == 0.0);
}

TEST_CASE("reported breakdown matches the raw objective on a real window")
{
    const TimeGrid grid = horizon::make_grid({{6, 1.0}});
    const auto net = windowed_exp1(grid);
    const auto sol = dispatch::solve(net, grid, dispatch::Mode::Coordinated);
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    CHECK(std::abs(sol.objective - sol.cost.total()) <= 1e-6 * (1.0 + std::abs(sol.cost.total())));
}

TEST_CASE("per-hub costs add up to the network total")
{
    const auto sc = netio::load_scenario(oracle::data_path("golden/g2.json"));
    const TimeGrid grid = horizon::make_grid(sc.episode.grid_spec);
    const auto net = dispatch::window_network(sc.network, sc.episode.base_dt_hours,
                                              sc.episode.start_index, grid);
    const auto sol = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(sol.status == qp::SolveStatus::Optimal);

    double sum = 0.0;
    for (const auto& hc : sol.hub_cost) sum += hc.total();
    CHECK(sum == doctest::Approx(sol.cost.total()).epsilon(1e-9));

    const auto recomputed = dispatch::evaluate_cost(sol, dispatch::cost_params(net), grid);
    CHECK(recomputed.total() == doctest::Approx(sol.cost.total()).epsilon(1e-12));

    const auto report = dispatch::check_feasibility(sol, net, grid, 1e-5);
    INFO("worst: ", report.worst);
    CHECK(report.ok());
}

TEST_CASE("check_feasibility flags unmet demand and trade overshoot")
{
    const std::size_t n = 1;
    const TimeGrid grid({1.0});

    SUBCASE("all-zero flows leave the balance short")
    {
        model::Network net;
        net.hubs.push_back(consumer_hub("solo", 1.0, 0.25, n));
        dispatch::DispatchSolution sol;
        sol.grid = grid;
        sol.hub_ids = {"solo"};
        dispatch::HubStepFlows step;
        step.grid_import = {0.0};
        step.grid_export = {0.0};
        sol.hub_flows = {{step}};
        const auto report = dispatch::check_feasibility(sol, net, grid);
        CHECK(report.balance_kw == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(report.ok());
        CHECK(report.worst.find("balance") != std::string::npos);
    }

    SUBCASE("a trade beyond the link limit is reported in kW")
    {
        auto net = chp_pair(n);
        auto sol = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
        REQUIRE(sol.status == qp::SolveStatus::Optimal);
        sol.trade[0][0] = 11.0;
        const auto report = dispatch::check_feasibility(sol, net, grid);
        CHECK(report.trade_kw == doctest::Approx(1.0).epsilon(1e-9));
        CHECK_FALSE(report.ok());
    }
}

TEST_CASE("unserved heat falls on the quadratic slack")
{
    const std::size_t n = 2;
    model::Network net;
    auto hub = consumer_hub("solo", 0.0, 0.25, n);
    hub.demand_h = Series::constant(Unit::Kw, 2.0, n);
    net.hubs.push_back(hub);
    const TimeGrid grid({1.0, 1.0});

    const auto sol = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(sol.status == qp::SolveStatus::Optimal);
    for (std::size_t k = 0; k < n; ++k)
        CHECK(sol.hub_flows[0][k].slack == doctest::Approx(2.0).epsilon(1e-6));
    // default slack weight 1e3 CHF/kWh^2: 2 steps of 1e3 * 2^2 * 1h
    CHECK(sol.cost.slack_penalty == doctest::Approx(8000.0).epsilon(1e-5));

    const auto report = dispatch::check_feasibility(sol, net, grid, 1e-5);
    INFO("worst: ", report.worst);
    CHECK(report.ok());
}

TEST_CASE("with the slack pinned to zero the cost is homogeneous in demand")
{
    const std::size_t n = 3;
    const TimeGrid grid({1.0, 1.0, 1.0});
    model::Network net;
    net.hubs.push_back(consumer_hub("solo", 0.0, 0.25, n));
    net.hubs[0].demand_e = Series(Unit::Kw, {2.0, 5.0, 3.0});
    net.hubs[0].grids[0].price_export = Series::constant(Unit::ChfPerKwh, 0.0, n);

    const auto base = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(base.status == qp::SolveStatus::Optimal);

    for (double& d : net.hubs[0].demand_e.v) d *= 2.0;
    const auto doubled = dispatch::solve(net, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(doubled.status == qp::SolveStatus::Optimal);
    CHECK(doubled.cost.total() == doctest::Approx(2.0 * base.cost.total()).epsilon(1e-7));
}

TEST_CASE("refresh_qp reproduces a freshly assembled problem")
{
    const std::size_t n = 4;
    const TimeGrid grid = horizon::make_grid({{static_cast<int>(n), 1.0}});
    auto net = chp_pair(n);

    auto tpl = dispatch::build_qp(net, grid, dispatch::Mode::Coordinated);

    net.hubs[1].demand_e = Series(Unit::Kw, {4.0, 6.0, 2.0, 5.0});
    net.hubs[1].grids[0].price_import = Series::constant(Unit::ChfPerKwh, 0.22, n);
    dispatch::refresh_qp(tpl, net, grid);

    const auto fresh = dispatch::build_qp(net, grid, dispatch::Mode::Coordinated);
    CHECK((tpl.qp.q - fresh.qp.q).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((tpl.qp.l - fresh.qp.l).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((tpl.qp.u - fresh.qp.u).cwiseAbs().maxCoeff() <= 1e-14);

    const auto a = qp::solve(tpl.qp, tight());
    const auto b = qp::solve(fresh.qp, tight());
    REQUIRE(a.status == qp::SolveStatus::Optimal);
    CHECK((a.x - b.x).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("build_qp rejects an invalid network")
{
    auto net = chp_pair(2);
    net.links[0].hub_b = "a";
    CHECK_THROWS_AS(dispatch::build_qp(net, TimeGrid({1.0, 1.0}), dispatch::Mode::Coordinated),
                    std::invalid_argument);
}

TEST_CASE("window_network resamples onto the horizon grid")
{
    const std::size_t base_n = 72;
    model::Network net;
    net.hubs.push_back(consumer_hub("solo", 0.0, 0.25, base_n));
    std::vector<double> ramp(base_n);
    for (std::size_t i = 0; i < base_n; ++i) ramp[i] = static_cast<double>(i);
    net.hubs[0].demand_e = Series(Unit::Kw, ramp);
    model::Storage sto;
    sto.id = "battery";
    sto.carrier = Carrier::Electricity;
    sto.capacity = 10.0;
    sto.soc_min = 1.0;
    sto.soc_max = 9.0;
    sto.soc_init = 3.3;
    sto.charge_max = 2.0;
    sto.discharge_max = 2.0;
    net.hubs[0].storages.push_back(sto);

    const TimeGrid grid = horizon::make_grid({{2, 1.0}, {1, 2.0}});
    const auto win = dispatch::window_network(net, 1.0, 5, grid);
    REQUIRE(win.hubs[0].demand_e.size() == 3);
    CHECK(win.hubs[0].demand_e[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(win.hubs[0].demand_e[1] == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(win.hubs[0].demand_e[2] == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(win.hubs[0].storages[0].soc_init == 3.3);

    CHECK_THROWS_WITH_AS(dispatch::window_network(net, 1.0, 70, grid),
                         doctest::Contains("too short"), std::invalid_argument);
}
