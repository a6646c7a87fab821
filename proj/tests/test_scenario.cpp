#include "doctest.h"

#include "hubmesh/netio/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "support/oracles.hpp"

using namespace hubmesh;
using netio::Scenario;
using netio::load_scenario;
using netio::save_scenario;

namespace {

/// Scratch directory for generated scenario and CSV files.
struct TempDir {
    std::filesystem::path dir;

    TempDir()
    {
        dir = std::filesystem::temp_directory_path() / "hubmesh_test_scenario";
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }

    std::string file(const std::string& name, const std::string& text) const
    {
        const auto p = dir / name;
        std::ofstream out(p);
        out << text;
        return p.string();
    }
};

/// One hub on a 4 h hourly grid, two MPC steps. Constant series get length
/// start_index + n_steps + horizon = 0 + 2 + 4 = 6.
std::string minimal(const std::string& hubs, const std::string& extra = "")
{
    return std::string(R"({"schema": 1, "grid": "4x1",)") +
           R"("episode": {"n_steps": 2, "start_index": 0},)" + R"("hubs": )" + hubs + extra + "}";
}

const char* kPlainHub = R"([{"id": "h0", "demand_e_kw": 3.0, "grids": [
    {"carrier": "Electricity", "price_import_chf_per_kwh": 0.25,
     "import_max_kw": 100, "slack": true}]}])";

std::string hourly_csv(int rows, const std::string& column, double first, double step)
{
    std::string text = "time," + column + "\n";
    for (int r = 0; r < rows; ++r) {
        text += netio::format_iso8601(1609459200 + 3600ll * r) + "," +
                std::to_string(first + step * r) + "\n";
    }
    return text;
}

}  // namespace

TEST_CASE("the shipped experiment file loads sorted and validated")
{
    const Scenario sc = load_scenario(oracle::data_path("exp1.json"));
    CHECK(sc.schema == 1);
    CHECK(sc.name == "exp1");
    CHECK(sc.start == "2023-04-02T10:00:00");

    REQUIRE(sc.network.hubs.size() == 4);
    CHECK(sc.network.hubs[0].id == "hub1");
    CHECK(sc.network.hubs[1].id == "hub2");
    CHECK(sc.network.hubs[2].id == "hub3");
    CHECK(sc.network.hubs[3].id == "nest");
    CHECK(model::validate_network(sc.network).ok());

    REQUIRE(sc.network.links.size() == 6);
    for (std::size_t i = 0; i < sc.network.links.size(); ++i)
        CHECK(sc.network.links[i].id == static_cast<int>(i));

    CHECK(sc.episode.n_steps == 72);
    CHECK(sc.episode.base_dt_hours == 1.0);
    CHECK(sc.episode.start_index == 24);
    CHECK(sc.episode.weather_refresh_steps == 12);
    CHECK(sc.episode.grid_spec == netio::parse_grid_spec("12x1,12x2,6x6"));
    REQUIRE(sc.episode.hub_forecast.count("nest") == 1);
    CHECK(sc.episode.hub_forecast.at("nest") == forecast::Kind::Persistence);

    // every truth series shares the 168-row csv
    CHECK(sc.episode.irradiance.size() == 168);
    CHECK(sc.network.hubs[3].demand_e.size() == 168);
    REQUIRE(sc.episode.pv_models.count("nest/pv") == 1);
    CHECK(sc.episode.pv_models.at("nest/pv").peak_kw == 20.0);
    CHECK(sc.episode.pv_models.at("nest/pv").coef_kw_per_wm2 == 0.024);

    CHECK(sc.admm.rho == 1.0);
    CHECK(sc.admm.max_iter == 500);
}

TEST_CASE("series accept a constant, an inline array or a csv reference")
{
    TempDir td;
    td.file("load.csv", hourly_csv(6, "load", 1.0, 1.0));
    const auto path = td.file("sc.json", minimal(R"([{"id": "h0",
        "demand_e_kw": {"csv": "load.csv", "column": "load"},
        "grids": [{"carrier": "Electricity",
                   "price_import_chf_per_kwh": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
                   "export_max_kw": 5,
                   "price_export_chf_per_kwh": 0.05,
                   "import_max_kw": 100, "slack": true}]}])"));

    const Scenario sc = load_scenario(path);
    REQUIRE(sc.network.hubs.size() == 1);
    const auto& hub = sc.network.hubs[0];

    REQUIRE(hub.demand_e.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(hub.demand_e[i] == 1.0 + static_cast<double>(i));

    REQUIRE(hub.grids.size() == 1);
    REQUIRE(hub.grids[0].price_import.size() == 6);
    CHECK(hub.grids[0].price_import[0] == 0.1);
    CHECK(hub.grids[0].price_import[5] == 0.6);
    REQUIRE(hub.grids[0].price_export.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(hub.grids[0].price_export[i] == 0.05);
}

TEST_CASE("load errors name the offending file or JSON path")
{
    TempDir td;

    SUBCASE("missing scenario file")
    {
        CHECK_THROWS_WITH_AS((void)load_scenario(td.dir / "nope.json"),
                             doctest::Contains("cannot open"), std::runtime_error);
    }
    SUBCASE("invalid JSON")
    {
        const auto p = td.file("sc.json", "schema: 1");
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("not valid JSON"),
                             std::runtime_error);
    }
    SUBCASE("unsupported schema version")
    {
        const auto p = td.file("sc.json", R"({"schema": 2, "hubs": []})");
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("unsupported version 2"),
                             std::runtime_error);
    }
    SUBCASE("no hubs")
    {
        const auto p = td.file("sc.json", minimal("[]"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p),
                             doctest::Contains("needs at least one hub at /hubs"),
                             std::runtime_error);
    }
    SUBCASE("missing required field")
    {
        const auto p = td.file("sc.json", minimal(R"([{"demand_e_kw": 3.0}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p),
                             doctest::Contains("missing required field at /hubs/0/id"),
                             std::runtime_error);
    }
    SUBCASE("unknown carrier")
    {
        const auto p = td.file("sc.json", minimal(R"([{"id": "h0", "storages": [
            {"id": "s", "carrier": "Plasma", "capacity_kwh": 10, "soc_init_kwh": 5,
             "charge_max_kw": 2, "discharge_max_kw": 2}]}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("unknown carrier 'Plasma'"),
                             std::runtime_error);
    }
    SUBCASE("missing data file")
    {
        const auto p = td.file("sc.json", minimal(
            R"([{"id": "h0", "demand_e_kw": {"csv": "ghost.csv", "column": "load"}}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("cannot open data file"),
                             std::runtime_error);
    }
    SUBCASE("data file starting at the wrong time")
    {
        std::string csv = "time,load\n";
        for (int r = 0; r < 6; ++r)
            csv += netio::format_iso8601(1609545600 + 3600ll * r) + ",1\n";
        td.file("late.csv", csv);
        const auto p = td.file("sc.json", minimal(
            R"([{"id": "h0", "demand_e_kw": {"csv": "late.csv", "column": "load"}}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("starts at 2021-01-02"),
                             std::runtime_error);
    }
    SUBCASE("data file at the wrong resolution")
    {
        std::string csv = "time,load\n";
        for (int r = 0; r < 6; ++r)
            csv += netio::format_iso8601(1609459200 + 1800ll * r) + ",1\n";
        td.file("fast.csv", csv);
        const auto p = td.file("sc.json", minimal(
            R"([{"id": "h0", "demand_e_kw": {"csv": "fast.csv", "column": "load"}}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("sampled every 1800 s"),
                             std::runtime_error);
    }
    SUBCASE("missing csv column")
    {
        td.file("load.csv", hourly_csv(6, "load", 1.0, 0.0));
        const auto p = td.file("sc.json", minimal(
            R"([{"id": "h0", "demand_e_kw": {"csv": "load.csv", "column": "nope"}}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p),
                             doctest::Contains("column 'nope' not in"), std::runtime_error);
    }
    SUBCASE("duplicate link id")
    {
        const auto p = td.file("sc.json", minimal(
            R"([{"id": "a", "demand_e_kw": 1.0, "grids": [{"carrier": "Electricity",
                 "price_import_chf_per_kwh": 0.2, "import_max_kw": 50, "slack": true}]},
                {"id": "b", "demand_e_kw": 1.0, "grids": [{"carrier": "Electricity",
                 "price_import_chf_per_kwh": 0.2, "import_max_kw": 50, "slack": true}]}])",
            R"(, "links": [{"id": 1, "hub_a": "a", "hub_b": "b", "limit_kw": 5},
                           {"id": 1, "hub_a": "b", "hub_b": "a", "limit_kw": 5}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("duplicate link id 1"),
                             std::runtime_error);
    }
    SUBCASE("link to an unknown hub")
    {
        const auto p = td.file("sc.json", minimal(kPlainHub,
            R"(, "links": [{"hub_a": "h0", "hub_b": "ghost", "limit_kw": 5}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p),
                             doctest::Contains("unknown hub 'ghost' at /links/0/hub_b"),
                             std::runtime_error);
    }
    SUBCASE("network validation failures are reported")
    {
        const auto p = td.file("sc.json", minimal(R"([{"id": "h0",
            "demand_e_kw": -1.0,
            "grids": [{"carrier": "Electricity", "price_import_chf_per_kwh": 0.25,
                       "import_max_kw": 100, "slack": true}]}])"));
        CHECK_THROWS_WITH_AS((void)load_scenario(p), doctest::Contains("failed validation"),
                             std::runtime_error);
    }
}

TEST_CASE("zero-limit links are dropped and the rest renumbered")
{
    TempDir td;
    const auto p = td.file("sc.json", minimal(
        R"([{"id": "a", "demand_e_kw": 1.0, "grids": [{"carrier": "Electricity",
             "price_import_chf_per_kwh": 0.2, "import_max_kw": 50, "slack": true}]},
            {"id": "b", "demand_e_kw": 1.0, "grids": [{"carrier": "Electricity",
             "price_import_chf_per_kwh": 0.2, "import_max_kw": 50, "slack": true}]}])",
        R"(, "links": [{"id": 5, "hub_a": "a", "hub_b": "b", "limit_kw": 10},
                       {"id": 2, "hub_a": "a", "hub_b": "b", "limit_kw": 0},
                       {"id": 9, "hub_a": "b", "hub_b": "a", "limit_kw": 3,
                        "fee_chf_per_kwh": 0.01}])"));

    const Scenario sc = load_scenario(p);
    REQUIRE(sc.network.links.size() == 2);
    CHECK(sc.network.links[0].id == 0);
    CHECK(sc.network.links[0].limit == 10.0);
    CHECK(sc.network.links[0].hub_a == "a");
    CHECK(sc.network.links[1].id == 1);
    CHECK(sc.network.links[1].limit == 3.0);
    CHECK(sc.network.links[1].hub_a == "b");
    CHECK(sc.network.links[1].fee == 0.01);
}

TEST_CASE("unknown keys are ignored")
{
    TempDir td;
    const auto p = td.file("sc.json",
        std::string(R"({"schema": 1, "grid": "4x1", "notes": "synthetic", "color": "blue",)") +
        R"("episode": {"n_steps": 2, "start_index": 0, "mood": "sunny"},)" +
        R"("hubs": [{"id": "h0", "demand_e_kw": 3.0, "shoe_size": 44, "grids": [
            {"carrier": "Electricity", "price_import_chf_per_kwh": 0.25,
             "import_max_kw": 100, "slack": true, "voltage": 400}]}]})");
    const Scenario sc = load_scenario(p);
    CHECK(sc.network.hubs.size() == 1);
    CHECK(sc.episode.n_steps == 2);
}

TEST_CASE("solver configuration is parsed into both solver layers")
{
    TempDir td;
    const auto p = td.file("sc.json", minimal(kPlainHub,
        R"(, "solver": {"rho": 2.5, "tol_primal": 1e-5, "tol_dual": 2e-5, "max_iter": 321,
                        "adapt": false, "parallel": false,
                        "qp": {"tol_abs": 1e-8, "tol_rel": 1e-9, "max_iter": 4321,
                               "rho": 0.3, "alpha": 1.5, "adaptive_rho": false}})"));

    const Scenario sc = load_scenario(p);
    CHECK(sc.admm.rho == 2.5);
    CHECK(sc.admm.tol_primal == 1e-5);
    CHECK(sc.admm.tol_dual == 2e-5);
    CHECK(sc.admm.max_iter == 321);
    CHECK(sc.admm.adapt == false);
    CHECK(sc.admm.parallel == false);
    CHECK(sc.qp.tol_abs == 1e-8);
    CHECK(sc.qp.tol_rel == 1e-9);
    CHECK(sc.qp.max_iter == 4321);
    CHECK(sc.qp.rho == 0.3);
    CHECK(sc.qp.alpha == 1.5);
    CHECK(sc.qp.adaptive_rho == false);
    // the hub-local QPs inside ADMM run with the same settings
    CHECK(sc.admm.qp.max_iter == 4321);
    CHECK(sc.admm.qp.tol_abs == 1e-8);
}

TEST_CASE("the grid field accepts a spec string, pairs and objects")
{
    TempDir td;
    const std::vector<horizon::GridSegment> want = {{12, 1.0}, {6, 2.0}};

    auto p = td.file("a.json", std::string(R"({"schema": 1, "grid": [[12, 1], [6, 2]],)") +
                                   R"("episode": {"n_steps": 1, "start_index": 0},)" +
                                   R"("hubs": )" + kPlainHub + "}");
    CHECK(load_scenario(p).episode.grid_spec == want);

    p = td.file("b.json",
                std::string(R"({"schema": 1, "grid": [{"count": 12, "dt_hours": 1},)") +
                    R"({"count": 6, "dt_hours": 2}],)" +
                    R"("episode": {"n_steps": 1, "start_index": 0}, "hubs": )" + kPlainHub + "}");
    CHECK(load_scenario(p).episode.grid_spec == want);

    p = td.file("c.json", std::string(R"({"schema": 1, "grid": "12x1,6x2",)") +
                              R"("episode": {"n_steps": 1, "start_index": 0}, "hubs": )" +
                              kPlainHub + "}");
    CHECK(load_scenario(p).episode.grid_spec == want);
}

TEST_CASE("a saved scenario reloads to the identical network")
{
    TempDir td;
    const Scenario sc = load_scenario(oracle::data_path("exp1.json"));
    const auto p = (td.dir / "roundtrip.json").string();
    save_scenario(sc, p);

    const Scenario again = load_scenario(p);
    CHECK(again.network == sc.network);
    CHECK(again.schema == sc.schema);
    CHECK(again.name == sc.name);
    CHECK(again.start == sc.start);
    CHECK(again.episode.n_steps == sc.episode.n_steps);
    CHECK(again.episode.base_dt_hours == sc.episode.base_dt_hours);
    CHECK(again.episode.start_index == sc.episode.start_index);
    CHECK(again.episode.weather_refresh_steps == sc.episode.weather_refresh_steps);
    CHECK(again.episode.grid_spec == sc.episode.grid_spec);
    CHECK(again.episode.hub_forecast == sc.episode.hub_forecast);
    CHECK(again.episode.irradiance == sc.episode.irradiance);
    REQUIRE(again.episode.pv_models.count("nest/pv") == 1);
    CHECK(again.episode.pv_models.at("nest/pv").peak_kw ==
          sc.episode.pv_models.at("nest/pv").peak_kw);
    CHECK(again.episode.pv_models.at("nest/pv").coef_kw_per_wm2 ==
          sc.episode.pv_models.at("nest/pv").coef_kw_per_wm2);
    CHECK(again.admm.rho == sc.admm.rho);
    CHECK(again.admm.max_iter == sc.admm.max_iter);
    CHECK(again.qp.tol_abs == sc.qp.tol_abs);
    CHECK(again.qp.max_iter == sc.qp.max_iter);
}

TEST_CASE("grid specs round trip through text")
{
    const auto spec = netio::parse_grid_spec("12x1,12x2,6x6");
    REQUIRE(spec.size() == 3);
    CHECK(spec[0] == horizon::GridSegment{12, 1.0});
    CHECK(spec[1] == horizon::GridSegment{12, 2.0});
    CHECK(spec[2] == horizon::GridSegment{6, 6.0});
    CHECK(netio::format_grid_spec(spec) == "12x1,12x2,6x6");

    const auto fine = netio::parse_grid_spec("4x0.25");
    REQUIRE(fine.size() == 1);
    CHECK(fine[0].count == 4);
    CHECK(fine[0].dt_hours == 0.25);
    CHECK(netio::format_grid_spec(fine) == "4x0.25");

    CHECK_THROWS_AS((void)netio::parse_grid_spec("12"), std::invalid_argument);
    CHECK_THROWS_AS((void)netio::parse_grid_spec("abx3"), std::invalid_argument);
    CHECK_THROWS_AS((void)netio::parse_grid_spec("3xq"), std::invalid_argument);
    CHECK_THROWS_AS((void)netio::parse_grid_spec(""), std::invalid_argument);
}

TEST_CASE("timestamps round trip through ISO-8601")
{
    CHECK(netio::parse_iso8601("1970-01-01T00:00:00") == 0);
    CHECK(netio::parse_iso8601("2021-01-01T00:00:00") == 1609459200);
    CHECK(netio::format_iso8601(1609459200 + 3661) == "2021-01-01T01:01:01");
    CHECK(netio::parse_iso8601(netio::format_iso8601(1680430000)) == 1680430000);
    CHECK_THROWS_AS((void)netio::parse_iso8601("yesterday"), std::runtime_error);

    Scenario sc;
    CHECK(sc.start_epoch() == 1609459200);
    sc.start = "2023-04-02T10:00:00";
    CHECK(sc.start_epoch() == netio::parse_iso8601("2023-04-02T10:00:00"));
}
