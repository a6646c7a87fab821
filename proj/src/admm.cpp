#include "hubmesh/admm.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

namespace hubmesh::admm {

namespace {

double local_cost(const model::Hub& hub, const horizon::TimeGrid& grid,
                  const dispatch::HubQpTemplate& tpl, const Eigen::VectorXd& x)
{
    double cost = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double dt = grid.dt_hours[k];
        for (std::size_t g = 0; g < hub.grids.size(); ++g) {
            const auto& gc = hub.grids[g];
            const double pi = gc.price_import.empty() ? 0.0 : gc.price_import[k];
            const double pe = gc.price_export.empty() ? 0.0 : gc.price_export[k];
            cost += dt * (x[tpl.layout.grid_import(0, static_cast<int>(g), k)] * pi -
                          x[tpl.layout.grid_export(0, static_cast<int>(g), k)] * pe);
        }
        const int je = tpl.layout.slack(0, k);
        if (je >= 0) cost += hub.slack_weight * dt * x[je] * x[je];
        for (std::size_t il = 0; il < tpl.links.size(); ++il) {
            const double v = x[tpl.layout.trade(static_cast<int>(il), k)];
            if (v > 0.0) cost += dt * tpl.links[il].fee * v;
        }
    }
    return cost;
}

}  // namespace

const char* to_string(Phase p)
{
    return p == Phase::Iterate ? "iterate" : "polish";
}

double consensus_pair(double v_a, double v_b, double limit)
{
    return std::clamp(0.5 * (v_a - v_b), -limit, limit);
}

double dual_step(double lambda, double v, double z_hub_frame)
{
    return lambda + (v - z_hub_frame);
}

LocalHubWorker::LocalHubWorker(model::Hub hub, std::vector<dispatch::HubLinkView> links,
                               horizon::TimeGrid grid, double rho, qp::SolverSettings settings)
    : hub_(std::move(hub)), links_(std::move(links)), grid_(std::move(grid)), settings_(settings)
{
    rebuild(rho);
}

void LocalHubWorker::rebuild(double rho)
{
    tpl_ = dispatch::build_hub_qp(hub_, links_, grid_, rho);
    solver_ = std::make_unique<qp::QpSolver>(tpl_.qp, settings_);
    pinned_ = false;
}

void LocalHubWorker::refresh(const model::Hub& hub)
{
    hub_ = hub;
    dispatch::refresh_hub_qp(tpl_, hub_, grid_);
    solver_->update_linear_cost(tpl_.qp.q);
    solver_->update_bounds(tpl_.qp.l, tpl_.qp.u);
    pinned_ = false;
}

LocalReply LocalHubWorker::round(const RoundParams& params)
{
    const std::size_t K = grid_.size();
    const std::size_t L = links_.size();
    if (params.z.size() != L * K || params.lambda.size() != L * K)
        throw std::invalid_argument("LocalHubWorker: round slice size mismatch for hub " +
                                    hub_.id);
    if (params.rho != tpl_.rho) rebuild(params.rho);

    Eigen::VectorXd q = tpl_.qp.q;
    for (std::size_t il = 0; il < L; ++il) {
        for (std::size_t k = 0; k < K; ++k) {
            const int col = tpl_.layout.trade(static_cast<int>(il), k);
            q[col] -= params.rho * (params.z[il * K + k] - params.lambda[il * K + k]);
        }
    }
    solver_->update_linear_cost(q);

    if (params.phase == Phase::Polish) {
        Eigen::VectorXd l = tpl_.qp.l;
        Eigen::VectorXd u = tpl_.qp.u;
        for (std::size_t il = 0; il < L; ++il) {
            for (std::size_t k = 0; k < K; ++k) {
                const int col = tpl_.layout.trade(static_cast<int>(il), k);
                l[tpl_.m_struct + col] = params.z[il * K + k];
                u[tpl_.m_struct + col] = params.z[il * K + k];
            }
        }
        solver_->update_bounds(l, u);
        pinned_ = true;
    } else if (pinned_) {
        solver_->update_bounds(tpl_.qp.l, tpl_.qp.u);
        pinned_ = false;
    }

    const auto [x0, y0] = qp::warm_start_from(last_, tpl_.qp);
    last_ = solver_->solve(x0, y0);

    LocalReply reply;
    reply.iter = params.iter;
    reply.status = last_.status;
    reply.v.resize(L * K);
    for (std::size_t il = 0; il < L; ++il)
        for (std::size_t k = 0; k < K; ++k)
            reply.v[il * K + k] = last_.x[tpl_.layout.trade(static_cast<int>(il), k)];
    reply.cost = local_cost(hub_, grid_, tpl_, last_.x);
    if (params.phase == Phase::Polish)
        reply.flows = dispatch::extract_hub_flows(last_.x, tpl_.layout, 0);
    return reply;
}

std::vector<dispatch::HubLinkView> link_views(const model::Network& net, int hub_pos)
{
    std::vector<dispatch::HubLinkView> views;
    const auto& hub_id = net.hubs.at(static_cast<std::size_t>(hub_pos)).id;
    for (std::size_t li = 0; li < net.links.size(); ++li) {
        const auto& link = net.links[li];
        if (link.hub_a != hub_id && link.hub_b != hub_id) continue;
        dispatch::HubLinkView v;
        v.link_pos = static_cast<int>(li);
        v.sign = link.hub_a == hub_id ? 1.0 : -1.0;
        v.carrier = link.carrier;
        v.limit = link.limit;
        v.fee = link.fee;
        views.push_back(v);
    }
    return views;
}

AdmmResult run(const model::Network& net, const horizon::TimeGrid& grid, const AdmmConfig& cfg,
               const std::vector<HubWorker*>& workers, WarmState* warm)
{
    const auto report = model::validate_network(net);
    if (!report.ok()) throw std::invalid_argument("admm: invalid network:\n" + report.to_string());
    if (!(cfg.rho > 0.0) || !(cfg.tol_primal > 0.0) || !(cfg.tol_dual > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("admm: bad config");
    if (workers.size() != net.hubs.size())
        throw std::invalid_argument("admm: need one worker per hub");

    const std::size_t H = net.hubs.size();
    const std::size_t L = net.links.size();
    const std::size_t K = grid.size();

    std::vector<std::vector<dispatch::HubLinkView>> views(H);
    for (std::size_t h = 0; h < H; ++h) {
        views[h] = link_views(net, static_cast<int>(h));
        if (workers[h]->link_count() != static_cast<int>(views[h].size()))
            throw std::invalid_argument("admm: worker for hub " + net.hubs[h].id +
                                        " disagrees on incident link count");
    }

    std::vector<double> z(L * K, 0.0);
    std::vector<std::vector<double>> lambda(H);
    for (std::size_t h = 0; h < H; ++h) lambda[h].assign(views[h].size() * K, 0.0);
    double rho = cfg.rho;
    if (warm && warm->z.size() == z.size() && warm->lambda.size() == H) {
        bool sizes_ok = true;
        for (std::size_t h = 0; h < H; ++h)
            sizes_ok = sizes_ok && warm->lambda[h].size() == lambda[h].size();
        if (sizes_ok) {
            z = warm->z;
            lambda = warm->lambda;
            if (warm->rho > 0.0) rho = warm->rho;
        }
    }

    auto do_round = [&](int iter, Phase phase) {
        std::vector<RoundParams> params(H);
        for (std::size_t h = 0; h < H; ++h) {
            auto& p = params[h];
            p.iter = iter;
            p.phase = phase;
            p.rho = rho;
            p.z.resize(views[h].size() * K);
            p.lambda = lambda[h];
            for (std::size_t il = 0; il < views[h].size(); ++il) {
                const auto& view = views[h][il];
                for (std::size_t k = 0; k < K; ++k)
                    p.z[il * K + k] =
                        view.sign * z[static_cast<std::size_t>(view.link_pos) * K + k];
            }
        }
        std::vector<LocalReply> replies(H);
        if (cfg.parallel && H > 1) {
            std::vector<std::future<LocalReply>> futures;
            futures.reserve(H);
            for (std::size_t h = 0; h < H; ++h)
                futures.push_back(std::async(std::launch::async, [&workers, &params, h] {
                    return workers[h]->round(params[h]);
                }));
            for (std::size_t h = 0; h < H; ++h) replies[h] = futures[h].get();
        } else {
            for (std::size_t h = 0; h < H; ++h) replies[h] = workers[h]->round(params[h]);
        }
        for (std::size_t h = 0; h < H; ++h) {
            if (replies[h].iter != iter)
                throw std::runtime_error("admm: stale reply from hub " + net.hubs[h].id);
            if (replies[h].v.size() != views[h].size() * K)
                throw std::runtime_error("admm: malformed reply from hub " + net.hubs[h].id);
        }
        return replies;
    };

    ConvergenceTrace trace;
    bool converged = false;
    int iters_done = 0;
    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        iters_done = iter;
        const auto replies = do_round(iter, Phase::Iterate);

        double dual = 0.0;
        for (std::size_t li = 0; li < L; ++li) {
            const auto& link = net.links[li];
            const int ha = net.hub_index(link.hub_a);
            const int hb = net.hub_index(link.hub_b);
            int ia = -1, ib = -1;
            for (std::size_t il = 0; il < views[static_cast<std::size_t>(ha)].size(); ++il)
                if (views[static_cast<std::size_t>(ha)][il].link_pos == static_cast<int>(li))
                    ia = static_cast<int>(il);
            for (std::size_t il = 0; il < views[static_cast<std::size_t>(hb)].size(); ++il)
                if (views[static_cast<std::size_t>(hb)][il].link_pos == static_cast<int>(li))
                    ib = static_cast<int>(il);
            for (std::size_t k = 0; k < K; ++k) {
                const double va = replies[static_cast<std::size_t>(ha)]
                                      .v[static_cast<std::size_t>(ia) * K + k];
                const double vb = replies[static_cast<std::size_t>(hb)]
                                      .v[static_cast<std::size_t>(ib) * K + k];
                const double z_new = consensus_pair(va, vb, link.limit);
                dual = std::max(dual, std::abs(z_new - z[li * K + k]));
                z[li * K + k] = z_new;
            }
        }
        dual *= rho;

        double primal = 0.0;
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t il = 0; il < views[h].size(); ++il) {
                const auto& view = views[h][il];
                for (std::size_t k = 0; k < K; ++k) {
                    const double zh =
                        view.sign * z[static_cast<std::size_t>(view.link_pos) * K + k];
                    const double v = replies[h].v[il * K + k];
                    primal = std::max(primal, std::abs(v - zh));
                    lambda[h][il * K + k] = dual_step(lambda[h][il * K + k], v, zh);
                }
            }
        }

        trace.iters.push_back({iter, primal, dual, rho});
        if (primal <= cfg.tol_primal && dual <= cfg.tol_dual) {
            converged = true;
            break;
        }

        if (cfg.adapt) {
            double next = rho;
            if (primal > 10.0 * dual)
                next = rho * 2.0;
            else if (dual > 10.0 * primal)
                next = rho * 0.5;
            next = std::clamp(next, cfg.rho * 1e-3, cfg.rho * 1e4);
            if (next != rho) {
                const double scale = rho / next;
                for (auto& lam : lambda)
                    for (double& x : lam) x *= scale;
                rho = next;
            }
        }
    }
    trace.converged = converged;
    trace.iterations = iters_done;
    trace.rho_final = rho;

    const auto polish = do_round(iters_done + 1, Phase::Polish);

    dispatch::DispatchSolution sol;
    sol.grid = grid;
    sol.iterations = iters_done;
    sol.status = converged ? qp::SolveStatus::Optimal : qp::SolveStatus::MaxIter;
    for (std::size_t h = 0; h < H; ++h) {
        sol.hub_ids.push_back(net.hubs[h].id);
        if (polish[h].flows.size() != K)
            throw std::runtime_error("admm: polish reply from hub " + net.hubs[h].id +
                                     " carries no solution");
        sol.hub_flows.push_back(polish[h].flows);
        if (polish[h].status != qp::SolveStatus::Optimal) sol.status = qp::SolveStatus::MaxIter;
    }
    sol.trade.resize(L);
    for (std::size_t li = 0; li < L; ++li) {
        sol.trade[li].resize(K);
        for (std::size_t k = 0; k < K; ++k) sol.trade[li][k] = z[li * K + k];
    }
    const auto params = dispatch::cost_params(net);
    sol.hub_cost = dispatch::evaluate_hub_costs(sol, params, grid);
    sol.cost = dispatch::evaluate_cost(sol, params, grid);
    sol.objective = sol.cost.total();

    if (warm) {
        warm->z = z;
        warm->lambda = lambda;
        warm->rho = rho;
    }
    return {std::move(sol), std::move(trace)};
}

AdmmResult run(const model::Network& net, const horizon::TimeGrid& grid, const AdmmConfig& cfg)
{
    std::vector<std::unique_ptr<LocalHubWorker>> owned;
    owned.reserve(net.hubs.size());
    for (std::size_t h = 0; h < net.hubs.size(); ++h)
        owned.push_back(std::make_unique<LocalHubWorker>(
            net.hubs[h], link_views(net, static_cast<int>(h)), grid, cfg.rho, cfg.qp));
    std::vector<HubWorker*> workers;
    workers.reserve(owned.size());
    for (auto& w : owned) workers.push_back(w.get());
    return run(net, grid, cfg, workers, nullptr);
}

}  // namespace hubmesh::admm
