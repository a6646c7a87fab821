#include "hubmesh/netio/results.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "hubmesh/netio/jsonio.hpp"
#include "hubmesh/netio/log.hpp"
#include "hubmesh/netio/scenario.hpp"

namespace hubmesh::netio {

namespace {

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double sample(const horizon::Series& s, std::size_t i)
{
    return i < s.size() ? s[i] : 0.0;
}

void row(std::ostream& out, const std::string& time, const std::string& hub,
         const std::string& device, model::Carrier carrier, double value, double cost)
{
    out << time << ',' << hub << ',' << device << ',' << model::to_string(carrier) << ','
        << fmt(value) << ',' << fmt(cost) << '\n';
}

const char* kHeader = "time,hub,device,carrier,value_kW,cost_CHF\n";

/// Grid flows with the forecast mismatch folded onto the balancing
/// connections, mirroring what the plant ledger priced.
void effective_grid_flows(const model::Hub& hub, const dispatch::HubStepFlows& f,
                          double mismatch_grid, double mismatch_thermal,
                          std::vector<double>& imp, std::vector<double>& expv)
{
    imp = f.grid_import;
    expv = f.grid_export;
    int elec_slack = -1, heat_conn = -1;
    for (std::size_t g = 0; g < hub.grids.size(); ++g) {
        if (hub.grids[g].carrier == model::Carrier::Electricity && hub.grids[g].is_slack)
            elec_slack = static_cast<int>(g);
        if (hub.grids[g].carrier == model::Carrier::HeatMT && heat_conn < 0)
            heat_conn = static_cast<int>(g);
    }
    if (elec_slack >= 0) {
        const auto g = static_cast<std::size_t>(elec_slack);
        const double net = imp[g] - expv[g] + mismatch_grid;
        imp[g] = std::max(net, 0.0);
        expv[g] = std::max(-net, 0.0);
    }
    if (heat_conn >= 0) {
        const auto g = static_cast<std::size_t>(heat_conn);
        const double net = imp[g] - expv[g] + mismatch_thermal;
        imp[g] = std::max(net, 0.0);
        expv[g] = std::max(-net, 0.0);
    }
}

void converter_rows(std::ostream& out, const std::string& time, const model::Hub& hub,
                    const std::vector<double>& conv_input)
{
    for (std::size_t c = 0; c < hub.converters.size(); ++c) {
        const auto& conv = hub.converters[c];
        for (const auto& [carrier, gain] : conv.output_gain)
            row(out, time, hub.id, conv.id, carrier, gain * conv_input[c], 0.0);
        for (const auto& [carrier, share] : conv.input_share)
            row(out, time, hub.id, conv.id, carrier, -share * conv_input[c], 0.0);
    }
}

void storage_rows(std::ostream& out, const std::string& time, const model::Hub& hub,
                  const dispatch::HubStepFlows& f)
{
    for (std::size_t s = 0; s < hub.storages.size(); ++s)
        row(out, time, hub.id, hub.storages[s].id, hub.storages[s].carrier,
            f.discharge[s] - f.charge[s], 0.0);
}

void link_rows(std::ostream& out, const std::string& time, const model::Network& net,
               const std::vector<double>& trade, double dt_hours)
{
    for (std::size_t li = 0; li < net.links.size(); ++li) {
        const auto& link = net.links[li];
        const std::string device = "link" + std::to_string(link.id);
        const double flow = trade[li];
        const double fee = dt_hours * link.fee * std::abs(flow);
        row(out, time, link.hub_a, device, link.carrier, flow, flow > 0.0 ? fee : 0.0);
        row(out, time, link.hub_b, device, link.carrier, -flow, flow < 0.0 ? fee : 0.0);
    }
}

}  // namespace

void write_dispatch_csv(const mpc::EpisodeLog& log, const model::Network& net,
                        std::int64_t start_epoch_s, std::ostream& out)
{
    out << kHeader;
    for (const auto& rec : log.steps) {
        const double dt = rec.plan.dt_hours;
        const auto b = static_cast<std::size_t>(std::llround(rec.clock_hours / dt));
        const std::string time =
            format_iso8601(start_epoch_s + std::llround(rec.clock_hours * 3600.0));
        for (std::size_t h = 0; h < net.hubs.size(); ++h) {
            const auto& hub = net.hubs[h];
            const auto& f = rec.plan.hubs[h];
            converter_rows(out, time, hub, f.conv_input);
            storage_rows(out, time, hub, f);

            std::vector<double> imp, expv;
            effective_grid_flows(hub, f, rec.mismatch_grid_kw[h], rec.mismatch_thermal_kw[h],
                                 imp, expv);
            bool has_heat_conn = false;
            for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                const auto& gc = hub.grids[g];
                has_heat_conn = has_heat_conn || gc.carrier == model::Carrier::HeatMT;
                const double cost = dt * (imp[g] * sample(gc.price_import, b) -
                                          expv[g] * sample(gc.price_export, b));
                row(out, time, hub.id, "grid" + std::to_string(g), gc.carrier, imp[g] - expv[g],
                    cost);
            }
            for (std::size_t r = 0; r < hub.renewables.size(); ++r)
                row(out, time, hub.id, hub.renewables[r].id, hub.renewables[r].carrier,
                    rec.realized_renewable[h][r], 0.0);
            if (!hub.demand_e.empty())
                row(out, time, hub.id, "demand_e", model::Carrier::Electricity,
                    -rec.realized_demand_e[h], 0.0);
            if (!hub.demand_h.empty())
                row(out, time, hub.id, "demand_h", model::Carrier::HeatMT,
                    -rec.realized_demand_h[h], 0.0);
            if (!has_heat_conn && rec.mismatch_thermal_kw[h] != 0.0)
                row(out, time, hub.id, "unserved", model::Carrier::HeatMT,
                    rec.mismatch_thermal_kw[h], 0.0);
        }
        link_rows(out, time, net, rec.plan.trade, dt);
    }
}

void write_dispatch_csv(const dispatch::DispatchSolution& sol, const model::Network& window,
                        std::int64_t start_epoch_s, std::ostream& out)
{
    out << kHeader;
    const auto& grid = sol.grid;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double dt = grid.dt_hours[k];
        const std::string time = format_iso8601(
            start_epoch_s + std::llround((grid.t0_hours + grid.step_start(k)) * 3600.0));
        for (std::size_t h = 0; h < window.hubs.size(); ++h) {
            const auto& hub = window.hubs[h];
            const auto& f = sol.hub_flows[h][k];
            converter_rows(out, time, hub, f.conv_input);
            storage_rows(out, time, hub, f);
            for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                const auto& gc = hub.grids[g];
                const double cost = dt * (f.grid_import[g] * sample(gc.price_import, k) -
                                          f.grid_export[g] * sample(gc.price_export, k));
                row(out, time, hub.id, "grid" + std::to_string(g), gc.carrier,
                    f.grid_import[g] - f.grid_export[g], cost);
            }
            for (std::size_t r = 0; r < hub.renewables.size(); ++r)
                row(out, time, hub.id, hub.renewables[r].id, hub.renewables[r].carrier,
                    f.renewable[r], 0.0);
            if (!hub.demand_e.empty())
                row(out, time, hub.id, "demand_e", model::Carrier::Electricity,
                    -sample(hub.demand_e, k), 0.0);
            if (!hub.demand_h.empty())
                row(out, time, hub.id, "demand_h", model::Carrier::HeatMT,
                    -sample(hub.demand_h, k), 0.0);
            if (f.slack != 0.0)
                row(out, time, hub.id, "slack", model::Carrier::HeatMT, f.slack, 0.0);
        }
        std::vector<double> trade(window.links.size(), 0.0);
        for (std::size_t li = 0; li < window.links.size(); ++li) trade[li] = sol.trade[li][k];
        link_rows(out, time, window, trade, dt);
    }
}

void write_comparison_csv(const mpc::ComparisonTable& table, std::ostream& out)
{
    out << "mode,total_cost_chf,grid_elec_kwh\n";
    for (const auto& r : table.rows)
        out << mpc::to_string(r.engine) << ',' << fmt(r.total_cost_chf) << ','
            << fmt(r.grid_elec_kwh) << '\n';
}

void save_episode_log(const mpc::EpisodeLog& log, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("results: cannot write '" + path + "'");
    out << nlohmann::json(log).dump(1) << "\n";
}

mpc::EpisodeLog load_episode_log(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("results: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("results: '" + path + "' is not valid JSON: " + e.what());
    }
    return doc.get<mpc::EpisodeLog>();
}

void emit_results(const mpc::EpisodeLog& log, const model::Network& net,
                  std::int64_t start_epoch_s, const std::string& out_dir)
{
    std::filesystem::create_directories(out_dir);
    save_episode_log(log, out_dir + "/episode.json");
    std::ofstream csv(out_dir + "/dispatch.csv");
    if (!csv) throw std::runtime_error("results: cannot write '" + out_dir + "/dispatch.csv'");
    write_dispatch_csv(log, net, start_epoch_s, csv);
    log_info("wrote " + out_dir + "/episode.json and dispatch.csv");
}

void emit_results(const mpc::ComparisonTable& table, const std::string& out_dir)
{
    std::filesystem::create_directories(out_dir);
    std::ofstream csv(out_dir + "/comparison.csv");
    if (!csv) throw std::runtime_error("results: cannot write '" + out_dir + "/comparison.csv'");
    write_comparison_csv(table, csv);
    log_info("wrote " + out_dir + "/comparison.csv");
}

}  // namespace hubmesh::netio
