#include "doctest.h"

#include "hubmesh/netio/results.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hubmesh/netio/scenario.hpp"
#include "support/oracles.hpp"

using namespace hubmesh;

namespace {

struct TempDir {
    std::filesystem::path dir;

    TempDir()
    {
        dir = std::filesystem::temp_directory_path() / "hubmesh_test_results";
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }
};

struct CsvRow {
    std::string time, hub, device, carrier;
    double value = 0.0;
    double cost = 0.0;
};

std::vector<CsvRow> parse_dispatch(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    REQUIRE(std::getline(in, line));
    REQUIRE(line == "time,hub,device,carrier,value_kW,cost_CHF");

    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 6);
        rows.push_back({cells[0], cells[1], cells[2], cells[3], std::strtod(cells[4].c_str(), nullptr),
                        std::strtod(cells[5].c_str(), nullptr)});
    }
    return rows;
}

/// Every (time, hub, carrier) group must sum to zero: that is the balance the
/// rows are defined to expose.
void check_balanced(const std::vector<CsvRow>& rows, double tol)
{
    std::map<std::string, double> group;
    for (const auto& r : rows) group[r.time + "|" + r.hub + "|" + r.carrier] += r.value;
    REQUIRE(!group.empty());
    for (const auto& [key, sum] : group) {
        INFO("group ", key);
        CHECK(std::abs(sum) <= tol);
    }
}

qp::SolverSettings tight()
{
    qp::SolverSettings s;
    s.tol_abs = 1e-9;
    s.tol_rel = 1e-9;
    s.max_iter = 100000;
    return s;
}

mpc::EpisodeLog short_episode(model::Network& net_out)
{
    std::mt19937 rng(404);
    net_out = oracle::random_network(rng, 3, 40);
    mpc::EpisodeConfig cfg;
    cfg.n_steps = 4;
    cfg.grid_spec = {{4, 1.0}};
    cfg.start_index = 24;
    cfg.hub_forecast["hub0"] = forecast::Kind::Persistence;
    return mpc::run_episode(net_out, cfg, mpc::Engine::Coordinated, {}, tight());
}

}  // namespace

TEST_CASE("comparison tables render one row per mode")
{
    mpc::ComparisonTable table;
    table.rows.push_back({mpc::Engine::Coordinated, 79.8483, 245.125});
    table.rows.push_back({mpc::Engine::Islanded, 96.25, 300.0});
    table.rows.push_back({mpc::Engine::Admm, 0.1, 3046.5});

    std::ostringstream os;
    netio::write_comparison_csv(table, os);
    CHECK(os.str() == "mode,total_cost_chf,grid_elec_kwh\n"
                      "coordinated,79.8483,245.125\n"
                      "islanded,96.25,300\n"
                      "admm,0.1,3046.5\n");

    std::ostringstream empty;
    netio::write_comparison_csv({}, empty);
    CHECK(empty.str() == "mode,total_cost_chf,grid_elec_kwh\n");
}

TEST_CASE("episode logs survive a JSON round trip bitwise")
{
    model::Network net;
    const mpc::EpisodeLog log = short_episode(net);
    REQUIRE(log.steps.size() == 4);

    TempDir td;
    const auto path = (td.dir / "episode.json").string();
    netio::save_episode_log(log, path);
    const mpc::EpisodeLog again = netio::load_episode_log(path);
    CHECK(again == log);
}

TEST_CASE("loading a bad episode file is an error")
{
    TempDir td;
    CHECK_THROWS_WITH_AS((void)netio::load_episode_log((td.dir / "nope.json").string()),
                         doctest::Contains("cannot open"), std::runtime_error);

    const auto bad = (td.dir / "bad.json").string();
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_WITH_AS((void)netio::load_episode_log(bad), doctest::Contains("not valid JSON"),
                         std::runtime_error);
}

TEST_CASE("dispatch rows from an episode balance per hub and carrier")
{
    model::Network net;
    const mpc::EpisodeLog log = short_episode(net);

    const std::int64_t epoch = netio::parse_iso8601("2021-06-01T00:00:00");
    std::ostringstream os;
    netio::write_dispatch_csv(log, net, epoch, os);
    const auto rows = parse_dispatch(os.str());
    REQUIRE(!rows.empty());

    // the clock starts at start_index, 24 h past the series anchor
    CHECK(rows.front().time == "2021-06-02T00:00:00");
    check_balanced(rows, 1e-6);

    // the cost column reproduces the ledger's cash flows; the soft slack
    // penalty is not a cash flow and stays out of the CSV
    double cash = 0.0;
    for (const auto& r : rows) cash += r.cost;
    const auto& t = log.total_cost;
    const double ledger_cash = t.grid_import - t.grid_export_revenue + t.gas + t.fees;
    CHECK(cash == doctest::Approx(ledger_cash).epsilon(1e-7));
}

TEST_CASE("dispatch rows from a single solution balance too")
{
    std::mt19937 rng(7);
    const auto base = oracle::random_network(rng, 2, 12);
    const auto grid = horizon::make_grid({{4, 1.0}});
    const auto window = dispatch::window_network(base, 1.0, 0, grid);
    const auto sol = dispatch::solve(window, grid, dispatch::Mode::Coordinated, tight());
    REQUIRE(sol.status == qp::SolveStatus::Optimal);

    std::ostringstream os;
    netio::write_dispatch_csv(sol, window, netio::parse_iso8601("2022-01-01T00:00:00"), os);
    const auto rows = parse_dispatch(os.str());
    REQUIRE(!rows.empty());
    CHECK(rows.front().time == "2022-01-01T00:00:00");
    check_balanced(rows, 1e-6);

    bool saw_grid = false, saw_demand = false, saw_link = false;
    for (const auto& r : rows) {
        saw_grid = saw_grid || r.device == "grid0";
        saw_demand = saw_demand || r.device == "demand_e";
        saw_link = saw_link || r.device == "link0";
    }
    CHECK(saw_grid);
    CHECK(saw_demand);
    CHECK(saw_link);

    double cash = 0.0;
    for (const auto& r : rows) cash += r.cost;
    const auto& t = sol.cost;
    CHECK(cash == doctest::Approx(t.grid_import - t.grid_export_revenue + t.gas + t.fees)
                      .epsilon(1e-7));
}

TEST_CASE("emit_results writes the expected files")
{
    TempDir td;
    model::Network net;
    const mpc::EpisodeLog log = short_episode(net);

    const auto out_dir = (td.dir / "run1").string();
    netio::emit_results(log, net, 0, out_dir);
    CHECK(netio::load_episode_log(out_dir + "/episode.json") == log);
    std::ifstream csv(out_dir + "/dispatch.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "time,hub,device,carrier,value_kW,cost_CHF");

    mpc::ComparisonTable table;
    table.rows.push_back({mpc::Engine::Admm, 1.5, 2.5});
    netio::emit_results(table, out_dir);
    std::ifstream cmp(out_dir + "/comparison.csv");
    REQUIRE(cmp.good());
    std::stringstream buf;
    buf << cmp.rdbuf();
    CHECK(buf.str() == "mode,total_cost_chf,grid_elec_kwh\nadmm,1.5,2.5\n");
}
