#include "hubmesh/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hubmesh::mpc {

namespace {

double at(const horizon::Series& s, std::size_t k)
{
    return s.empty() ? 0.0 : s[k];
}

void require_len(const horizon::Series& s, std::size_t n, const std::string& what)
{
    if (!s.empty() && s.size() < n)
        throw std::invalid_argument("mpc: series " + what + " needs >= " + std::to_string(n) +
                                    " base samples, has " + std::to_string(s.size()));
}

void add_to(dispatch::CostBreakdown& a, const dispatch::CostBreakdown& b)
{
    a.grid_import += b.grid_import;
    a.grid_export_revenue += b.grid_export_revenue;
    a.gas += b.gas;
    a.fees += b.fees;
    a.slack_penalty += b.slack_penalty;
}

std::size_t integral_steps(double hours, double dt, const char* what)
{
    const double ratio = hours / dt;
    const auto n = static_cast<long long>(std::llround(ratio));
    if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
        throw std::invalid_argument(std::string("mpc: ") + what +
                                    " must be a multiple of the base resolution");
    return static_cast<std::size_t>(n);
}

}  // namespace

const char* to_string(Engine e)
{
    switch (e) {
        case Engine::Coordinated: return "coordinated";
        case Engine::Islanded: return "islanded";
        case Engine::Admm: return "admm";
    }
    return "?";
}

Engine engine_from_string(const std::string& name)
{
    if (name == "coordinated" || name == "centralized") return Engine::Coordinated;
    if (name == "islanded") return Engine::Islanded;
    if (name == "admm" || name == "consensus") return Engine::Admm;
    throw std::invalid_argument("mpc: unknown mode '" + name +
                                "' (expected coordinated|islanded|admm)");
}

double EpisodeLog::total_grid_elec_kwh() const
{
    double total = 0.0;
    for (double v : grid_import_kwh) total += v;
    return total;
}

EpisodeRunner::EpisodeRunner(model::Network base, EpisodeConfig cfg, Engine engine,
                             admm::AdmmConfig admm_cfg, qp::SolverSettings qp_settings)
    : base_(std::move(base)),
      cfg_(std::move(cfg)),
      engine_(engine),
      admm_cfg_(admm_cfg),
      qp_settings_(qp_settings)
{
    const auto report = model::validate_network(base_);
    if (!report.ok()) throw std::invalid_argument("mpc: invalid network:\n" + report.to_string());
    if (cfg_.n_steps < 1) throw std::invalid_argument("mpc: n_steps must be >= 1");
    if (!(cfg_.base_dt_hours > 0.0))
        throw std::invalid_argument("mpc: base resolution must be positive");
    if (cfg_.weather_refresh_steps < 1)
        throw std::invalid_argument("mpc: weather refresh cadence must be >= 1");

    grid_ = horizon::make_grid(cfg_.grid_spec,
                               static_cast<double>(cfg_.start_index) * cfg_.base_dt_hours);
    if (std::abs(grid_.dt_hours.front() - cfg_.base_dt_hours) > 1e-12)
        throw std::invalid_argument(
            "mpc: the first grid step must match the base resolution (control interval)");
    horizon_base_steps_ = integral_steps(grid_.span_hours(), cfg_.base_dt_hours, "horizon span");

    const std::size_t day = integral_steps(24.0, cfg_.base_dt_hours, "24 h");
    bool weather_needed = false;
    for (const auto& [id, kind] : cfg_.hub_forecast) {
        const int h = base_.hub_index(id);
        if (h < 0) throw std::invalid_argument("mpc: forecast entry for unknown hub " + id);
        if (kind == forecast::Kind::Persistence) {
            if (cfg_.start_index < day)
                throw std::invalid_argument("mpc: hub " + id +
                                            " uses persistence but start_index leaves less "
                                            "than 24 h of history");
            for (const auto& r : base_.hubs[static_cast<std::size_t>(h)].renewables)
                if (cfg_.pv_models.count(id + "/" + r.id)) weather_needed = true;
        }
    }
    for (const auto& [key, model] : cfg_.pv_models) {
        const auto cut = key.find('/');
        const int h = cut == std::string::npos ? -1 : base_.hub_index(key.substr(0, cut));
        bool found = false;
        if (h >= 0)
            for (const auto& r : base_.hubs[static_cast<std::size_t>(h)].renewables)
                found = found || r.id == key.substr(cut + 1);
        if (!found)
            throw std::invalid_argument("mpc: pv model for unknown device '" + key + "'");
        if (model.peak_kw < 0.0 || model.coef_kw_per_wm2 < 0.0)
            throw std::invalid_argument("mpc: pv model for '" + key + "' has negative fields");
    }
    if (weather_needed)
        require_len(cfg_.irradiance,
                    cfg_.start_index + static_cast<std::size_t>(cfg_.n_steps), "irradiance");
    if (weather_needed && cfg_.irradiance.empty())
        throw std::invalid_argument("mpc: pv models configured but no irradiance series");

    const std::size_t need_truth = cfg_.start_index + static_cast<std::size_t>(cfg_.n_steps);
    const std::size_t need_window = need_truth + horizon_base_steps_;
    for (const auto& hub : base_.hubs) {
        auto kind = forecast::Kind::Perfect;
        if (auto it = cfg_.hub_forecast.find(hub.id); it != cfg_.hub_forecast.end())
            kind = it->second;
        const std::size_t need = kind == forecast::Kind::Perfect ? need_window : need_truth;
        require_len(hub.demand_e, need, hub.id + "/demand_e");
        require_len(hub.demand_h, need, hub.id + "/demand_h");
        for (const auto& r : hub.renewables) {
            const bool modelled = cfg_.pv_models.count(hub.id + "/" + r.id) > 0;
            require_len(r.profile,
                        kind == forecast::Kind::Perfect || modelled ? need_window : need,
                        hub.id + "/" + r.id);
        }
        for (std::size_t g = 0; g < hub.grids.size(); ++g) {
            require_len(hub.grids[g].price_import, need_window,
                        hub.id + "/grid[" + std::to_string(g) + "]/price_import");
            require_len(hub.grids[g].price_export, need_window,
                        hub.id + "/grid[" + std::to_string(g) + "]/price_export");
        }
        for (const auto& s : hub.storages)
            require_len(s.drain, need_truth, hub.id + "/" + s.id + "/drain");
    }

    state_.clock_hours = static_cast<double>(cfg_.start_index) * cfg_.base_dt_hours;
    state_.base_index = cfg_.start_index;
    state_.soc.resize(base_.hubs.size());
    state_.ledger.resize(base_.hubs.size());
    state_.grid_import_kwh.assign(base_.hubs.size(), 0.0);
    state_.grid_export_kwh.assign(base_.hubs.size(), 0.0);
    for (std::size_t h = 0; h < base_.hubs.size(); ++h) {
        state_.soc[h].resize(base_.hubs[h].storages.size());
        for (std::size_t s = 0; s < base_.hubs[h].storages.size(); ++s)
            state_.soc[h][s] = base_.hubs[h].storages[s].soc_init;
    }
}

model::Network EpisodeRunner::forecast_window()
{
    const std::size_t b = state_.base_index;
    const std::size_t H = horizon_base_steps_;
    const double dt = cfg_.base_dt_hours;
    const auto day = integral_steps(24.0, dt, "24 h");

    model::Network win = base_;
    for (std::size_t h = 0; h < win.hubs.size(); ++h) {
        auto& hub = win.hubs[h];
        auto kind = forecast::Kind::Perfect;
        if (auto it = cfg_.hub_forecast.find(hub.id); it != cfg_.hub_forecast.end())
            kind = it->second;

        auto look_ahead = [&](const horizon::Series& truth, const std::string& what) {
            if (truth.empty()) return truth;
            if (kind == forecast::Kind::Perfect) return truth.slice(b, H);
            forecast::ForecastRequest req;
            req.series_id = what;
            req.origin_hours = state_.clock_hours;
            req.resolution_hours = dt;
            req.horizon_hours = static_cast<double>(H) * dt;
            return forecast::forecast_persistence(truth.slice(b - day, day), req);
        };

        hub.demand_e = look_ahead(hub.demand_e, hub.id + "/demand_e");
        hub.demand_h = look_ahead(hub.demand_h, hub.id + "/demand_h");
        for (auto& r : hub.renewables) {
            const auto key = hub.id + "/" + r.id;
            const auto pv = cfg_.pv_models.find(key);
            if (kind == forecast::Kind::Persistence && pv != cfg_.pv_models.end()) {
                if (weather_snapshot_.empty() ||
                    step_count_ % cfg_.weather_refresh_steps == 0) {
                    if (weather_origin_ != b || weather_snapshot_.empty()) {
                        forecast::ForecastRequest req;
                        req.series_id = "irradiance";
                        req.origin_hours = state_.clock_hours;
                        req.resolution_hours = dt;
                        req.horizon_hours =
                            static_cast<double>(H + static_cast<std::size_t>(
                                                        cfg_.weather_refresh_steps)) *
                            dt;
                        weather_snapshot_ = forecast::forecast_persistence(
                            cfg_.irradiance.slice(b - day, day), req);
                        weather_origin_ = b;
                    }
                }
                r.profile = forecast::pv_output(
                    pv->second, weather_snapshot_.slice(b - weather_origin_, H));
            } else {
                r.profile = look_ahead(r.profile, key);
            }
        }
        for (auto& g : hub.grids) {
            if (!g.price_import.empty()) g.price_import = g.price_import.slice(b, H);
            if (!g.price_export.empty()) g.price_export = g.price_export.slice(b, H);
        }
        for (std::size_t s = 0; s < hub.storages.size(); ++s) {
            auto& sto = hub.storages[s];
            sto.soc_init = std::clamp(state_.soc[h][s], sto.soc_min, sto.soc_max);
            sto.drain = {};  // plant-side draw stays invisible to the controller
        }
    }
    return dispatch::window_network(win, dt, 0, grid_);
}

dispatch::DispatchSolution EpisodeRunner::solve_window(const model::Network& window,
                                                       int& admm_iters)
{
    admm_iters = 0;
    if (engine_ == Engine::Admm) {
        if (workers_.empty()) {
            for (std::size_t h = 0; h < window.hubs.size(); ++h)
                workers_.push_back(std::make_unique<admm::LocalHubWorker>(
                    window.hubs[h], admm::link_views(window, static_cast<int>(h)), grid_,
                    admm_cfg_.rho, admm_cfg_.qp));
        } else {
            for (std::size_t h = 0; h < window.hubs.size(); ++h)
                workers_[h]->refresh(window.hubs[h]);
        }
        std::vector<admm::HubWorker*> ptrs;
        ptrs.reserve(workers_.size());
        for (auto& w : workers_) ptrs.push_back(w.get());
        auto res = admm::run(window, grid_, admm_cfg_, ptrs, &warm_);
        admm_iters = res.trace.iterations;
        return std::move(res.solution);
    }

    const auto mode =
        engine_ == Engine::Islanded ? dispatch::Mode::Islanded : dispatch::Mode::Coordinated;
    if (!tpl_) {
        tpl_ = dispatch::build_qp(window, grid_, mode);
        solver_ = std::make_unique<qp::QpSolver>(tpl_->qp, qp_settings_);
    } else {
        dispatch::refresh_qp(*tpl_, window, grid_);
        solver_->update_linear_cost(tpl_->qp.q);
        solver_->update_bounds(tpl_->qp.l, tpl_->qp.u);
    }
    const auto [x0, y0] = qp::warm_start_from(last_, tpl_->qp);
    last_ = solver_->solve(x0, y0);
    return dispatch::extract_solution(last_, *tpl_, window, grid_);
}

StepRecord EpisodeRunner::step()
{
    if (step_count_ >= cfg_.n_steps) throw std::logic_error("mpc: episode already finished");
    const std::size_t b = state_.base_index;
    const double dt = cfg_.base_dt_hours;
    const std::size_t n_hubs = base_.hubs.size();

    StepRecord rec;
    rec.step = step_count_;
    rec.clock_hours = state_.clock_hours;
    rec.soc_clamp_kwh.assign(n_hubs, 0.0);
    for (std::size_t h = 0; h < n_hubs; ++h)
        for (std::size_t s = 0; s < base_.hubs[h].storages.size(); ++s) {
            const auto& sto = base_.hubs[h].storages[s];
            rec.soc_clamp_kwh[h] +=
                std::abs(state_.soc[h][s] - std::clamp(state_.soc[h][s], sto.soc_min,
                                                       sto.soc_max));
        }

    const auto window = forecast_window();
    auto sol = solve_window(window, rec.admm_iterations);
    rec.plan_cost_total = sol.cost.total();
    rec.plan = horizon::first_step_control(sol);

    rec.realized_demand_e.resize(n_hubs);
    rec.realized_demand_h.resize(n_hubs);
    rec.realized_renewable.resize(n_hubs);
    rec.mismatch_grid_kw.assign(n_hubs, 0.0);
    rec.mismatch_thermal_kw.assign(n_hubs, 0.0);
    rec.step_cost.resize(n_hubs);
    rec.soc.resize(n_hubs);

    for (std::size_t h = 0; h < n_hubs; ++h) {
        const auto& hub = base_.hubs[h];
        const auto& f = rec.plan.hubs[h];
        rec.realized_demand_e[h] = at(hub.demand_e, b);
        rec.realized_demand_h[h] = at(hub.demand_h, b);
        auto& ren = rec.realized_renewable[h];
        ren.resize(hub.renewables.size());
        for (std::size_t r = 0; r < hub.renewables.size(); ++r) {
            const double avail = at(hub.renewables[r].profile, b);
            ren[r] = hub.renewables[r].curtailable ? std::min(f.renewable[r], avail) : avail;
        }
    }

    // close each realized carrier balance; the grids absorb what the forecast missed
    for (std::size_t h = 0; h < n_hubs; ++h) {
        const auto& hub = base_.hubs[h];
        const auto& f = rec.plan.hubs[h];
        for (model::Carrier carrier : model::kAllCarriers) {
            double sum = 0.0;
            bool touched = false;
            for (std::size_t c = 0; c < hub.converters.size(); ++c) {
                const auto& conv = hub.converters[c];
                if (auto it = conv.output_gain.find(carrier); it != conv.output_gain.end()) {
                    sum += it->second * f.conv_input[c];
                    touched = true;
                }
                if (auto it = conv.input_share.find(carrier); it != conv.input_share.end()) {
                    sum -= it->second * f.conv_input[c];
                    touched = true;
                }
            }
            for (std::size_t s = 0; s < hub.storages.size(); ++s) {
                if (hub.storages[s].carrier != carrier) continue;
                sum += f.discharge[s] - f.charge[s];
                touched = true;
            }
            for (std::size_t g = 0; g < hub.grids.size(); ++g) {
                if (hub.grids[g].carrier != carrier) continue;
                sum += f.grid_import[g] - f.grid_export[g];
                touched = true;
            }
            for (std::size_t r = 0; r < hub.renewables.size(); ++r) {
                if (hub.renewables[r].carrier != carrier) continue;
                sum += rec.realized_renewable[h][r];
                touched = true;
            }
            for (const auto& [li, sign] : base_.incidence(static_cast<int>(h), carrier)) {
                sum += sign * rec.plan.trade.at(static_cast<std::size_t>(li));
                touched = true;
            }
            double demand = 0.0;
            if (carrier == model::Carrier::Electricity) {
                demand = rec.realized_demand_e[h];
                touched = touched || !hub.demand_e.empty();
            }
            if (carrier == model::Carrier::HeatMT) {
                demand = rec.realized_demand_h[h];
                touched = touched || !hub.demand_h.empty();
            }
            if (!touched) continue;

            const double deficit = demand - sum;
            if (carrier == model::Carrier::Electricity) {
                rec.mismatch_grid_kw[h] = deficit;
            } else if (carrier == model::Carrier::HeatMT) {
                rec.mismatch_thermal_kw[h] = deficit;
            } else if (std::abs(deficit) > 1e-3) {
                // other carriers never see forecast error, only solver slop
                throw std::runtime_error("mpc: realized " +
                                         std::string(model::to_string(carrier)) +
                                         " imbalance at hub " + hub.id +
                                         " has no balancing rule");
            }
        }
    }

    // price the realized flows at the truth tariffs
    for (std::size_t h = 0; h < n_hubs; ++h) {
        const auto& hub = base_.hubs[h];
        const auto& f = rec.plan.hubs[h];
        auto& cost = rec.step_cost[h];

        std::vector<double> imp(f.grid_import), expv(f.grid_export);
        int elec_slack = -1, heat_conn = -1;
        for (std::size_t g = 0; g < hub.grids.size(); ++g) {
            if (hub.grids[g].carrier == model::Carrier::Electricity && hub.grids[g].is_slack)
                elec_slack = static_cast<int>(g);
            if (hub.grids[g].carrier == model::Carrier::HeatMT && heat_conn < 0)
                heat_conn = static_cast<int>(g);
        }
        if (elec_slack >= 0) {
            const auto g = static_cast<std::size_t>(elec_slack);
            const double net = imp[g] - expv[g] + rec.mismatch_grid_kw[h];
            imp[g] = std::max(net, 0.0);
            expv[g] = std::max(-net, 0.0);
        }
        if (heat_conn >= 0) {
            const auto g = static_cast<std::size_t>(heat_conn);
            const double net = imp[g] - expv[g] + rec.mismatch_thermal_kw[h];
            imp[g] = std::max(net, 0.0);
            expv[g] = std::max(-net, 0.0);
        } else {
            state_.unserved_heat_kwh += dt * std::max(rec.mismatch_thermal_kw[h], 0.0);
            state_.discarded_heat_kwh += dt * std::max(-rec.mismatch_thermal_kw[h], 0.0);
        }

        for (std::size_t g = 0; g < hub.grids.size(); ++g) {
            const auto& gc = hub.grids[g];
            const double paid = dt * imp[g] * at(gc.price_import, b);
            if (gc.carrier == model::Carrier::Gas)
                cost.gas += paid;
            else
                cost.grid_import += paid;
            cost.grid_export_revenue += dt * expv[g] * at(gc.price_export, b);
            if (gc.carrier == model::Carrier::Electricity) {
                state_.grid_import_kwh[h] += dt * imp[g];
                state_.grid_export_kwh[h] += dt * expv[g];
            }
        }
    }
    for (std::size_t li = 0; li < base_.links.size(); ++li) {
        const double flow = rec.plan.trade.at(li);
        if (flow == 0.0) continue;
        const auto& link = base_.links[li];
        const int payer = base_.hub_index(flow > 0.0 ? link.hub_a : link.hub_b);
        rec.step_cost[static_cast<std::size_t>(payer)].fees += dt * link.fee * std::abs(flow);
    }
    for (std::size_t h = 0; h < n_hubs; ++h) add_to(state_.ledger[h], rec.step_cost[h]);

    // integrate the true storage state and clamp to the physical envelope
    for (std::size_t h = 0; h < n_hubs; ++h) {
        const auto& hub = base_.hubs[h];
        const auto& f = rec.plan.hubs[h];
        rec.soc[h].resize(hub.storages.size());
        for (std::size_t s = 0; s < hub.storages.size(); ++s) {
            const auto& sto = hub.storages[s];
            double next = std::pow(sto.decay, dt) * state_.soc[h][s] +
                          dt * (sto.eta_charge * f.charge[s] -
                                f.discharge[s] / sto.eta_discharge) -
                          dt * at(sto.drain, b);
            next = std::clamp(next, 0.0, sto.capacity);
            state_.soc[h][s] = next;
            rec.soc[h][s] = next;
        }
    }

    state_.base_index += 1;
    state_.clock_hours += dt;
    ++step_count_;
    return rec;
}

EpisodeLog EpisodeRunner::run()
{
    if (step_count_ != 0) throw std::logic_error("mpc: run() needs a fresh episode");
    EpisodeLog log;
    log.engine = engine_;
    for (const auto& hub : base_.hubs) log.hub_ids.push_back(hub.id);
    log.steps.reserve(static_cast<std::size_t>(cfg_.n_steps));
    while (step_count_ < cfg_.n_steps) log.steps.push_back(step());
    log.total_hub_cost = state_.ledger;
    for (const auto& cb : state_.ledger) add_to(log.total_cost, cb);
    log.grid_import_kwh = state_.grid_import_kwh;
    log.grid_export_kwh = state_.grid_export_kwh;
    log.unserved_heat_kwh = state_.unserved_heat_kwh;
    log.discarded_heat_kwh = state_.discarded_heat_kwh;
    return log;
}

EpisodeLog run_episode(const model::Network& base, const EpisodeConfig& cfg, Engine engine,
                       const admm::AdmmConfig& admm_cfg, const qp::SolverSettings& qp_settings)
{
    EpisodeRunner runner(base, cfg, engine, admm_cfg, qp_settings);
    return runner.run();
}

ComparisonTable compare_modes(const model::Network& base, const EpisodeConfig& cfg,
                              const std::vector<Engine>& engines,
                              const admm::AdmmConfig& admm_cfg,
                              const qp::SolverSettings& qp_settings)
{
    ComparisonTable table;
    for (Engine e : engines) {
        const auto log = run_episode(base, cfg, e, admm_cfg, qp_settings);
        table.rows.push_back({e, log.total_cost.total(), log.total_grid_elec_kwh()});
    }
    return table;
}

}  // namespace hubmesh::mpc
