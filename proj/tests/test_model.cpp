#include <random>
#include <stdexcept>

#include "doctest.h"
#include "hubmesh/model.hpp"
#include "hubmesh/netio/scenario.hpp"

using namespace hubmesh;
using model::Carrier;
using horizon::Series;
using horizon::Unit;

namespace {

model::Hub plain_hub(const std::string& id, std::size_t n = 4)
{
    model::Hub hub;
    hub.id = id;
    model::GridConnection g;
    g.carrier = Carrier::Electricity;
    g.price_import = Series::constant(Unit::ChfPerKwh, 0.25, n);
    g.price_export = Series::constant(Unit::ChfPerKwh, 0.08, n);
    g.import_max = 100.0;
    g.export_max = 100.0;
    g.is_slack = true;
    hub.grids.push_back(g);
    hub.demand_e = Series::constant(Unit::Kw, 3.0, n);
    return hub;
}

model::Network two_hub_net()
{
    model::Network net;
    net.hubs.push_back(plain_hub("a"));
    net.hubs.push_back(plain_hub("b"));
    model::TradeLink link;
    link.id = 0;
    link.hub_a = "a";
    link.hub_b = "b";
    link.limit = 10.0;
    link.fee = 0.02;
    net.links.push_back(link);
    return net;
}

bool has_violation(const model::ValidationReport& rep, const std::string& code)
{
    for (const auto& v : rep.violations)
        if (v.code == code) return true;
    return false;
}

}  // namespace

TEST_CASE("validate_network accepts a well-formed two-hub instance")
{
    const auto rep = model::validate_network(two_hub_net());
    CHECK(rep.ok());
    CHECK(rep.to_string().empty());
}

TEST_CASE("validate_network flags a self-trade link")
{
    auto net = two_hub_net();
    net.links[0].hub_b = "a";
    const auto rep = model::validate_network(net);
    CHECK_FALSE(rep.ok());
    CHECK(has_violation(rep, "self-trade"));
}

TEST_CASE("validate_network flags bad storage bounds")
{
    auto net = two_hub_net();
    model::Storage sto;
    sto.id = "tank";
    sto.capacity = 10.0;
    sto.soc_min = 1.0;
    sto.soc_max = 8.0;
    sto.soc_init = 9.0;  // above soc_max
    sto.charge_max = 5.0;
    sto.discharge_max = 5.0;
    net.hubs[0].storages.push_back(sto);
    const auto rep = model::validate_network(net);
    CHECK(has_violation(rep, "storage bounds"));
}

TEST_CASE("validate_network covers the remaining invariants")
{
    SUBCASE("link endpoint must exist")
    {
        auto net = two_hub_net();
        net.links[0].hub_b = "ghost";
        CHECK(has_violation(model::validate_network(net), "unknown hub"));
    }
    SUBCASE("every hub needs exactly one electric slack")
    {
        auto net = two_hub_net();
        net.hubs[0].grids[0].is_slack = false;
        CHECK(has_violation(model::validate_network(net), "elec slack"));
        net.hubs[0].grids[0].is_slack = true;
        net.hubs[0].grids.push_back(net.hubs[0].grids[0]);
        CHECK(has_violation(model::validate_network(net), "elec slack"));
    }
    SUBCASE("export price may not exceed import price")
    {
        auto net = two_hub_net();
        net.hubs[1].grids[0].price_export[2] = 0.9;
        CHECK(has_violation(model::validate_network(net), "price arbitrage"));
    }
    SUBCASE("converter shares must sum to one")
    {
        auto net = two_hub_net();
        model::Converter c;
        c.id = "hp";
        c.input_share = {{Carrier::Electricity, 0.4}};
        c.output_gain = {{Carrier::HeatMT, 3.0}};
        c.input_max = 5.0;
        net.hubs[0].converters.push_back(c);
        CHECK(has_violation(model::validate_network(net), "converter share"));
    }
    SUBCASE("negative demand is rejected")
    {
        auto net = two_hub_net();
        net.hubs[0].demand_e[1] = -0.5;
        CHECK(has_violation(model::validate_network(net), "demand negative"));
    }
    SUBCASE("duplicate device ids within a hub are rejected")
    {
        auto net = two_hub_net();
        model::RenewableSource r;
        r.id = "pv";
        r.profile = Series::constant(Unit::Kw, 1.0, 4);
        net.hubs[0].renewables.push_back(r);
        net.hubs[0].renewables.push_back(r);
        CHECK(has_violation(model::validate_network(net), "duplicate device"));
    }
    SUBCASE("gas trade links are rejected")
    {
        auto net = two_hub_net();
        net.links[0].carrier = Carrier::Gas;
        CHECK(has_violation(model::validate_network(net), "link carrier"));
    }
}

TEST_CASE("validate_network accepts every shipped scenario")
{
    for (const char* rel : {"exp1.json", "exp2.json", "golden/g1.json", "golden/g2.json",
                            "golden/g3.json", "golden/g4.json", "golden/g5.json"}) {
        const auto sc = netio::load_scenario(std::string(HUBMESH_DATA_DIR) + "/" + rel);
        const auto rep = model::validate_network(sc.network);
        INFO(rel, ": ", rep.to_string());
        CHECK(rep.ok());
    }
}

TEST_CASE("storage_step follows the discrete dynamics")
{
    model::Storage s;
    s.capacity = 20.0;
    s.soc_max = 20.0;
    s.eta_charge = 0.95;
    s.eta_discharge = 0.9;
    s.decay = 1.0;
    s.charge_max = 5.0;
    s.discharge_max = 5.0;

    CHECK(model::storage_step(s, 0.0, 1.0, 0.0, 1.0) == doctest::Approx(0.95));
    CHECK(model::storage_step(s, 5.0, 0.0, 0.0, 1.0) == doctest::Approx(5.0));

    s.decay = 0.99;
    CHECK(model::storage_step(s, 10.0, 0.0, 2.0, 1.0) ==
          doctest::Approx(7.6777777777777778).epsilon(1e-12));
}

TEST_CASE("storage_step rejects out-of-bound flows")
{
    model::Storage s;
    s.charge_max = 2.0;
    s.discharge_max = 2.0;
    CHECK_THROWS_AS(model::storage_step(s, 0.0, 3.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(model::storage_step(s, 0.0, -1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(model::storage_step(s, 0.0, 0.0, 2.5, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(model::storage_step(s, 0.0, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("storage_step is linear in state and flows")
{
    model::Storage s;
    s.capacity = 50.0;
    s.soc_max = 50.0;
    s.eta_charge = 0.93;
    s.eta_discharge = 0.88;
    s.decay = 0.97;
    s.charge_max = 10.0;
    s.discharge_max = 10.0;

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x1 = u(rng), c1 = u(rng), d1 = u(rng);
        const double x2 = u(rng), c2 = u(rng), d2 = u(rng);
        const double dt = 0.5 + 0.25 * trial / 20.0;
        const double both = model::storage_step(s, x1 + x2, c1 + c2, d1 + d2, dt);
        const double parts =
            model::storage_step(s, x1, c1, d1, dt) + model::storage_step(s, x2, c2, d2, dt);
        CHECK(both == doctest::Approx(parts).epsilon(1e-12));
    }
}

TEST_CASE("converter_output scales gains by the total input")
{
    model::Converter hp;
    hp.id = "hp";
    hp.input_share = {{Carrier::Electricity, 1.0}};
    hp.output_gain = {{Carrier::HeatMT, 3.0}};
    hp.input_max = 5.0;
    const auto out = model::converter_output(hp, 1.0);
    REQUIRE(out.size() == 1);
    CHECK(out.at(Carrier::HeatMT) == doctest::Approx(3.0));

    model::Converter hx;
    hx.id = "hx";
    hx.input_share = {{Carrier::HeatMT, 1.0}};
    hx.output_gain = {{Carrier::HeatHT, 0.95}};
    hx.input_max = 10.0;
    CHECK(model::converter_output(hx, 2.0).at(Carrier::HeatHT) == doctest::Approx(1.9));

    for (const auto& [carrier, value] : model::converter_output(hp, 0.0)) CHECK(value == 0.0);
    CHECK_THROWS_AS(model::converter_output(hp, 6.0), std::invalid_argument);
    CHECK_THROWS_AS(model::converter_output(hp, -0.5), std::invalid_argument);
}

TEST_CASE("converter_output is positively homogeneous")
{
    model::Converter chp;
    chp.id = "chp";
    chp.input_share = {{Carrier::Gas, 1.0}};
    chp.output_gain = {{Carrier::Electricity, 0.38}, {Carrier::HeatMT, 0.45}};
    chp.input_max = 100.0;

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double base = 1.0 + 40.0 * u(rng);
        const double lam = u(rng);
        const auto one = model::converter_output(chp, base);
        const auto scaled = model::converter_output(chp, lam * base);
        for (const auto& [carrier, value] : one)
            CHECK(scaled.at(carrier) == doctest::Approx(lam * value).epsilon(1e-12));
    }
}

TEST_CASE("incidence pairs +1 and -1 so trades cancel network-wide")
{
    model::Network net;
    net.hubs.push_back(plain_hub("a"));
    net.hubs.push_back(plain_hub("b"));
    net.hubs.push_back(plain_hub("c"));
    net.links.push_back({0, "a", "b", Carrier::Electricity, 10.0, 0.01});
    net.links.push_back({1, "b", "c", Carrier::Electricity, 10.0, 0.01});
    net.links.push_back({2, "c", "a", Carrier::HeatMT, 5.0, 0.005});

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    std::vector<double> trade(net.links.size());
    for (auto& v : trade) v = u(rng);

    for (Carrier carrier : {Carrier::Electricity, Carrier::HeatMT}) {
        double total = 0.0;
        for (int h = 0; h < 3; ++h)
            for (const auto& [li, sign] : net.incidence(h, carrier)) {
                CHECK(std::abs(sign) == 1.0);
                total += sign * trade[static_cast<std::size_t>(li)];
            }
        CHECK(total == doctest::Approx(0.0).epsilon(1e-15));
    }

    CHECK(net.incident_links(1) == std::vector<int>{0, 1});
    CHECK(net.hub_index("c") == 2);
    CHECK(net.hub_index("zzz") == -1);
    CHECK(net.incidence(0, Carrier::Electricity).size() == 1);
    CHECK(net.incidence(0, Carrier::HeatMT).size() == 1);
}
