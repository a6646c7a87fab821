#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <limits>
#include <utility>
#include <vector>

namespace hubmesh::qp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Canonical convex QP:
///   minimize    0.5 x'Px + q'x
///   subject to  l <= Ax <= u        (equality rows have l == u)
struct SparseQp {
    Eigen::SparseMatrix<double> P;  // n x n, symmetric PSD
    Eigen::VectorXd q;              // n
    Eigen::SparseMatrix<double> A;  // m x n
    Eigen::VectorXd l, u;           // m

    Eigen::Index n_vars() const { return q.size(); }
    Eigen::Index n_cons() const { return l.size(); }

    /// Throws std::invalid_argument on inconsistent dimensions or l > u.
    void validate() const;
};

enum class SolveStatus { Optimal, MaxIter, Infeasible };

const char* to_string(SolveStatus s);

struct QpResult {
    Eigen::VectorXd x;  // primal
    Eigen::VectorXd y;  // dual for the constraint rows
    SolveStatus status = SolveStatus::MaxIter;
    double primal_res = kInf;
    double dual_res = kInf;
    int iterations = 0;
};

struct SolverSettings {
    double tol_abs = 1e-6;
    double tol_rel = 1e-6;
    int max_iter = 20000;
    double rho = 0.1;
    double sigma = 1e-6;
    double alpha = 1.6;
    bool adaptive_rho = true;
    int check_interval = 25;
    int scaling_iters = 10;
    double eps_infeas = 1e-6;
};

/// Operator-splitting QP solver. The KKT factorization is kept across calls,
/// so repeated solves of the same structure (MPC re-solves, consensus
/// subproblems) pay only for back-substitutions. update_linear_cost and
/// update_bounds change the problem data without refactorizing unless the
/// equality pattern of the bounds changes.
class QpSolver {
public:
    explicit QpSolver(SparseQp qp, SolverSettings settings = {});

    void update_linear_cost(const Eigen::VectorXd& q);
    void update_bounds(const Eigen::VectorXd& l, const Eigen::VectorXd& u);

    QpResult solve();
    QpResult solve(const Eigen::VectorXd& x0, const Eigen::VectorXd& y0);

    const SparseQp& problem() const { return orig_; }
    const SolverSettings& settings() const { return settings_; }
    int factorization_count() const { return n_factorizations_; }

private:
    void equilibrate();
    void build_rho_vec();
    void factorize();
    QpResult run(Eigen::VectorXd x, Eigen::VectorXd y);

    SparseQp orig_;    // unscaled problem (residual checks run against this)
    SparseQp scaled_;  // Ruiz-equilibrated copy the iteration works on
    SolverSettings settings_;

    Eigen::VectorXd d_scale_;  // n: x = d_scale .* x_hat
    Eigen::VectorXd e_scale_;  // m: constraint row scaling
    double cost_scale_ = 1.0;

    double rho_ = 0.1;
    Eigen::VectorXd rho_vec_, rho_inv_vec_;  // per-row penalty (boosted on equality rows)
    std::vector<bool> eq_row_;

    Eigen::SparseMatrix<double> kkt_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool factorized_ = false;
    int n_factorizations_ = 0;
};

/// 0.5 x'Px + q'x.
double objective(const SparseQp& qp, const Eigen::VectorXd& x);

/// One-shot convenience wrapper.
QpResult solve(const SparseQp& qp, SolverSettings settings = {});
QpResult solve(const SparseQp& qp, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0,
               SolverSettings settings = {});

/// Initial iterates for re-solving a problem of the same shape. Throws on a
/// dimension mismatch; returns zero vectors when prev is empty.
std::pair<Eigen::VectorXd, Eigen::VectorXd> warm_start_from(const QpResult& prev,
                                                            const SparseQp& qp);

}  // namespace hubmesh::qp
