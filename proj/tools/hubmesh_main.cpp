#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hubmesh/netio/jsonio.hpp"
#include "hubmesh/netio/log.hpp"
#include "hubmesh/netio/results.hpp"
#include "hubmesh/netio/scenario.hpp"
#include "hubmesh/netio/wire.hpp"

namespace {

using namespace hubmesh;

struct CommonArgs {
    std::string scenario;
    std::string mode = "coordinated";
    std::string grid;
    std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_mode = true)
{
    cmd->add_option("--scenario", args.scenario, "Scenario JSON file")->required();
    if (with_mode)
        cmd->add_option("--mode", args.mode, "coordinated|islanded|admm")
            ->default_val("coordinated");
    cmd->add_option("--grid", args.grid, "Horizon override, e.g. 12x1,12x2,6x6");
    cmd->add_option("--out", args.out, "Output directory");
}

netio::Scenario load(const CommonArgs& args)
{
    auto sc = netio::load_scenario(args.scenario);
    if (!args.grid.empty()) sc.episode.grid_spec = netio::parse_grid_spec(args.grid);
    return sc;
}

horizon::TimeGrid scenario_grid(const netio::Scenario& sc)
{
    const double t0 = static_cast<double>(sc.episode.start_index) * sc.episode.base_dt_hours;
    return horizon::make_grid(sc.episode.grid_spec, t0);
}

void print_cost(const dispatch::CostBreakdown& cost)
{
    std::printf("  grid import   %12.4f CHF\n", cost.grid_import);
    std::printf("  export revenue%12.4f CHF\n", cost.grid_export_revenue);
    std::printf("  gas           %12.4f CHF\n", cost.gas);
    std::printf("  fees          %12.4f CHF\n", cost.fees);
    std::printf("  slack penalty %12.4f CHF\n", cost.slack_penalty);
    std::printf("  total         %12.4f CHF\n", cost.total());
}

void write_solution(const netio::Scenario& sc, const model::Network& window,
                    const dispatch::DispatchSolution& sol, const std::string& mode,
                    const std::string& out)
{
    if (out.empty()) return;
    std::filesystem::create_directories(out);
    std::ofstream csv(out + "/dispatch.csv");
    netio::write_dispatch_csv(sol, window, sc.start_epoch(), csv);
    nlohmann::json summary = {{"mode", mode},
                              {"status", qp::status_name(sol.status)},
                              {"iterations", sol.iterations},
                              {"objective", sol.objective},
                              {"cost", sol.cost},
                              {"hub_cost", sol.hub_cost},
                              {"hub_ids", sol.hub_ids}};
    std::ofstream js(out + "/summary.json");
    js << summary.dump(1) << "\n";
    std::printf("wrote %s/dispatch.csv and summary.json\n", out.c_str());
}

int cmd_solve(const CommonArgs& args)
{
    const auto sc = load(args);
    const auto grid = scenario_grid(sc);
    const auto window = dispatch::window_network(sc.network, sc.episode.base_dt_hours,
                                                 sc.episode.start_index, grid);
    dispatch::DispatchSolution sol;
    if (args.mode == "admm" || args.mode == "consensus") {
        auto res = admm::run(window, grid, sc.admm);
        std::printf("admm: %s after %d iterations (rho %.3g)\n",
                    res.trace.converged ? "converged" : "hit the iteration cap",
                    res.trace.iterations, res.trace.rho_final);
        sol = std::move(res.solution);
    } else {
        const auto mode = args.mode == "islanded" ? dispatch::Mode::Islanded
                                                  : dispatch::Mode::Coordinated;
        sol = dispatch::solve(window, grid, mode, sc.qp);
        std::printf("%s: %s after %d iterations\n", args.mode.c_str(),
                    qp::status_name(sol.status), sol.iterations);
    }
    print_cost(sol.cost);
    write_solution(sc, window, sol, args.mode, args.out);
    return 0;
}

int cmd_mpc_run(const CommonArgs& args, int steps_override)
{
    auto sc = load(args);
    if (steps_override > 0) sc.episode.n_steps = steps_override;
    const auto engine = mpc::engine_from_string(args.mode);
    const auto log = mpc::run_episode(sc.network, sc.episode, engine, sc.admm, sc.qp);
    std::printf("%s episode, %zu steps\n", mpc::to_string(engine), log.steps.size());
    print_cost(log.total_cost);
    std::printf("  grid electricity import %.4f kWh\n", log.total_grid_elec_kwh());
    if (log.unserved_heat_kwh > 0.0 || log.discarded_heat_kwh > 0.0)
        std::printf("  unserved heat %.4f kWh, discarded %.4f kWh\n", log.unserved_heat_kwh,
                    log.discarded_heat_kwh);
    if (!args.out.empty()) netio::emit_results(log, sc.network, sc.start_epoch(), args.out);
    return 0;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& modes, int steps_override)
{
    auto sc = load(args);
    if (steps_override > 0) sc.episode.n_steps = steps_override;
    std::vector<mpc::Engine> engines;
    if (modes.empty()) {
        engines = {mpc::Engine::Coordinated, mpc::Engine::Islanded, mpc::Engine::Admm};
    } else {
        for (const auto& m : modes) engines.push_back(mpc::engine_from_string(m));
    }
    const auto table = mpc::compare_modes(sc.network, sc.episode, engines, sc.admm, sc.qp);
    std::printf("%-12s  %14s  %14s\n", "mode", "total_cost_chf", "grid_elec_kwh");
    for (const auto& row : table.rows)
        std::printf("%-12s  %14.4f  %14.4f\n", mpc::to_string(row.engine), row.total_cost_chf,
                    row.grid_elec_kwh);
    if (!args.out.empty()) netio::emit_results(table, args.out);
    return 0;
}

int cmd_serve(const CommonArgs& args, const std::string& bind, int port,
              const std::string& port_file)
{
    const auto sc = load(args);
    const auto grid = scenario_grid(sc);
    const auto window = dispatch::window_network(sc.network, sc.episode.base_dt_hours,
                                                 sc.episode.start_index, grid);
    netio::ServeOptions opts;
    opts.bind = bind;
    opts.port = port;
    opts.on_listening = [&](int bound) {
        std::printf("listening on %s:%d\n", bind.c_str(), bound);
        std::fflush(stdout);
        if (!port_file.empty()) {
            std::ofstream pf(port_file);
            pf << bound << "\n";
        }
    };
    auto res = netio::coordinator_serve(window, grid, sc.admm, opts);
    std::printf("admm over tcp: %s after %d iterations\n",
                res.trace.converged ? "converged" : "hit the iteration cap",
                res.trace.iterations);
    print_cost(res.solution.cost);
    write_solution(sc, window, res.solution, "admm", args.out);
    return 0;
}

int cmd_agent(const CommonArgs& args, const std::string& hub_id, const std::string& host,
              int port)
{
    const auto sc = load(args);
    const auto grid = scenario_grid(sc);
    const auto window = dispatch::window_network(sc.network, sc.episode.base_dt_hours,
                                                 sc.episode.start_index, grid);
    const int h = window.hub_index(hub_id);
    if (h < 0) {
        std::fprintf(stderr, "hubmesh: scenario has no hub '%s'\n", hub_id.c_str());
        return 1;
    }
    netio::AgentOptions opts;
    opts.host = host;
    opts.port = port;
    netio::agent_serve(window.hubs[static_cast<std::size_t>(h)],
                       admm::link_views(window, h), grid, opts, sc.qp);
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hubmesh: multi-carrier energy hub dispatch"};
    app.require_subcommand(1);

    CommonArgs solve_args, mpc_args, cmp_args, serve_args, agent_args;
    int mpc_steps = 0, cmp_steps = 0;
    std::vector<std::string> cmp_modes;
    std::string bind = "127.0.0.1", host = "127.0.0.1", port_file, hub_id;
    int serve_port = 0, agent_port = 0;

    auto* solve = app.add_subcommand("solve", "Open-loop dispatch over one horizon");
    add_common(solve, solve_args);

    auto* mpc_run = app.add_subcommand("mpc-run", "Receding-horizon episode against the plant");
    add_common(mpc_run, mpc_args);
    mpc_run->add_option("--steps", mpc_steps, "Override the episode length");

    auto* compare = app.add_subcommand("compare", "Run full episodes in several modes");
    add_common(compare, cmp_args, false);
    compare->add_option("--mode", cmp_modes, "Modes to include (repeatable; default all)");
    compare->add_option("--steps", cmp_steps, "Override the episode length");

    auto* serve = app.add_subcommand("serve", "Coordinate distributed agents over TCP");
    add_common(serve, serve_args, false);
    serve->add_option("--bind", bind, "Bind address")->default_val("127.0.0.1");
    serve->add_option("--port", serve_port, "Port (0 = ephemeral)")->default_val(0);
    serve->add_option("--port-file", port_file, "Write the bound port to this file");

    auto* agent = app.add_subcommand("agent", "Run one hub as a remote agent");
    add_common(agent, agent_args, false);
    agent->add_option("--hub", hub_id, "Hub id to serve")->required();
    agent->add_option("--host", host, "Coordinator host")->default_val("127.0.0.1");
    agent->add_option("--port", agent_port, "Coordinator port")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(solve_args);
        if (mpc_run->parsed()) return cmd_mpc_run(mpc_args, mpc_steps);
        if (compare->parsed()) return cmd_compare(cmp_args, cmp_modes, cmp_steps);
        if (serve->parsed()) return cmd_serve(serve_args, bind, serve_port, port_file);
        if (agent->parsed()) return cmd_agent(agent_args, hub_id, host, agent_port);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "hubmesh: %s\n", e.what());
        return 1;
    }
    return 0;
}
