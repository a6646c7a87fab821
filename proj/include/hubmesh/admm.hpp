#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hubmesh/dispatch.hpp"

namespace hubmesh::admm {

struct AdmmConfig {
    double rho = 1.0;         // consensus penalty
    double tol_primal = 1e-4; // kW, inf-norm of v - z
    double tol_dual = 1e-4;   // kW, rho * inf-norm of z - z_prev
    int max_iter = 500;
    bool adapt = true;        // residual balancing: rho x2 / /2 at ratio 10
    qp::SolverSettings qp;    // local subproblem solver settings
    bool parallel = true;
};

enum class Phase { Iterate, Polish };

const char* to_string(Phase p);

/// Everything a hub receives for one round. Trade slices are flattened
/// incident-link-major (index il * steps + k) and expressed in the hub frame:
/// positive imports into the receiving hub.
struct RoundParams {
    int iter = 0;
    Phase phase = Phase::Iterate;
    double rho = 1.0;
    std::vector<double> z;
    std::vector<double> lambda;
};

/// A hub's answer for one round. v follows the RoundParams layout; flows is
/// filled on polish rounds only. cost is the hub's own operating cost in CHF
/// (fees counted on imports), without the consensus penalty.
struct LocalReply {
    int iter = 0;
    std::vector<double> v;
    double cost = 0.0;
    qp::SolveStatus status = qp::SolveStatus::Optimal;
    std::vector<dispatch::HubStepFlows> flows;
};

/// One consensus participant. Implementations run in-process (LocalHubWorker)
/// or proxy a remote agent over a socket (netio::RemoteHubWorker).
class HubWorker {
public:
    virtual ~HubWorker() = default;
    virtual const std::string& hub_id() const = 0;
    virtual int link_count() const = 0;
    virtual LocalReply round(const RoundParams& params) = 0;
};

/// In-process worker. Sees only its own hub's data plus the incident link
/// parameters; nothing about other hubs crosses this interface.
class LocalHubWorker : public HubWorker {
public:
    LocalHubWorker(model::Hub hub, std::vector<dispatch::HubLinkView> links,
                   horizon::TimeGrid grid, double rho, qp::SolverSettings settings = {});

    /// Swaps in fresh series and soc_init without rebuilding the
    /// factorization (receding-horizon reuse).
    void refresh(const model::Hub& hub);

    const std::string& hub_id() const override { return hub_.id; }
    int link_count() const override { return static_cast<int>(links_.size()); }
    LocalReply round(const RoundParams& params) override;

private:
    void rebuild(double rho);

    model::Hub hub_;
    std::vector<dispatch::HubLinkView> links_;
    horizon::TimeGrid grid_;
    qp::SolverSettings settings_;
    dispatch::HubQpTemplate tpl_;
    std::unique_ptr<qp::QpSolver> solver_;
    qp::QpResult last_;
    bool pinned_ = false;  // v bounds currently fixed to z (polish)
};

/// Pairwise consensus for one link and step: hub-frame copies from both ends
/// are reconciled in hub_a's sign convention and clamped to the link limit.
double consensus_pair(double v_a, double v_b, double limit);

/// Scaled dual ascent step, all in one hub's frame.
double dual_step(double lambda, double v, double z_hub_frame);

struct IterationStat {
    int iter = 0;
    double primal_res = 0.0;
    double dual_res = 0.0;
    double rho = 0.0;
};

struct ConvergenceTrace {
    std::vector<IterationStat> iters;
    bool converged = false;
    int iterations = 0;
    double rho_final = 0.0;
};

struct AdmmResult {
    dispatch::DispatchSolution solution;
    ConvergenceTrace trace;
};

/// Consensus state carried across receding-horizon steps. z is link-major in
/// the link frame; lambda is per hub in that hub's frame.
struct WarmState {
    std::vector<double> z;
    std::vector<std::vector<double>> lambda;
    double rho = 0.0;  // 0 means take the configured rho
};

/// Incident link parameters for one hub, ascending by link position.
std::vector<dispatch::HubLinkView> link_views(const model::Network& net, int hub_pos);

/// Runs consensus rounds against caller-provided workers (aligned with
/// net.hubs). The network object is used for topology, validation and final
/// cost accounting only; hub-private data flows through the workers.
AdmmResult run(const model::Network& net, const horizon::TimeGrid& grid, const AdmmConfig& cfg,
               const std::vector<HubWorker*>& workers, WarmState* warm = nullptr);

/// Convenience wrapper that builds one LocalHubWorker per hub.
AdmmResult run(const model::Network& net, const horizon::TimeGrid& grid,
               const AdmmConfig& cfg = {});

}  // namespace hubmesh::admm
