#include "hubmesh/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hubmesh::qp {

namespace {

double inf_norm(const Eigen::VectorXd& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

bool is_loose(double l, double u)
{
    return l == -kInf && u == kInf;
}

bool is_equality(double l, double u)
{
    return std::isfinite(l) && std::isfinite(u) && u - l <= 1e-12 + 1e-12 * std::abs(u);
}

}  // namespace

const char* to_string(SolveStatus s)
{
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Infeasible: return "infeasible";
    }
    return "?";
}

void SparseQp::validate() const
{
    const Eigen::Index n = q.size();
    const Eigen::Index m = l.size();
    if (P.rows() != n || P.cols() != n)
        throw std::invalid_argument("SparseQp: P must be n x n");
    if (A.cols() != n || A.rows() != m || u.size() != m)
        throw std::invalid_argument("SparseQp: constraint dimensions inconsistent");
    for (Eigen::Index i = 0; i < m; ++i) {
        if (std::isnan(l[i]) || std::isnan(u[i]) || l[i] > u[i])
            throw std::invalid_argument("SparseQp: need l <= u elementwise");
    }
    for (Eigen::Index j = 0; j < P.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(P, j); it; ++it) {
            if (std::abs(it.value() - P.coeff(it.col(), it.row())) >
                1e-9 * (1.0 + std::abs(it.value())))
                throw std::invalid_argument("SparseQp: P must be symmetric");
        }
    }
}

QpSolver::QpSolver(SparseQp qp, SolverSettings settings)
    : orig_(std::move(qp)), settings_(settings), rho_(settings.rho)
{
    orig_.validate();
    if (!(settings_.rho > 0.0) || !(settings_.sigma > 0.0))
        throw std::invalid_argument("QpSolver: rho and sigma must be positive");
    scaled_ = orig_;
    equilibrate();
    build_rho_vec();
}

void QpSolver::equilibrate()
{
    const Eigen::Index n = orig_.n_vars();
    const Eigen::Index m = orig_.n_cons();
    d_scale_ = Eigen::VectorXd::Ones(n);
    e_scale_ = Eigen::VectorXd::Ones(m);
    cost_scale_ = 1.0;

    Eigen::VectorXd col_norm(n), row_norm(m);
    for (int pass = 0; pass < settings_.scaling_iters; ++pass) {
        col_norm.setZero();
        row_norm.setZero();
        for (Eigen::Index j = 0; j < scaled_.P.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.P, j); it; ++it)
                col_norm[it.col()] = std::max(col_norm[it.col()], std::abs(it.value()));
        for (Eigen::Index j = 0; j < scaled_.A.outerSize(); ++j) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.A, j); it; ++it) {
                col_norm[it.col()] = std::max(col_norm[it.col()], std::abs(it.value()));
                row_norm[it.row()] = std::max(row_norm[it.row()], std::abs(it.value()));
            }
        }
        Eigen::VectorXd dx(n), de(m);
        for (Eigen::Index j = 0; j < n; ++j)
            dx[j] = col_norm[j] > 0.0 ? 1.0 / std::sqrt(col_norm[j]) : 1.0;
        for (Eigen::Index i = 0; i < m; ++i)
            de[i] = row_norm[i] > 0.0 ? 1.0 / std::sqrt(row_norm[i]) : 1.0;

        for (Eigen::Index j = 0; j < scaled_.P.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.P, j); it; ++it)
                it.valueRef() *= dx[it.row()] * dx[it.col()];
        for (Eigen::Index j = 0; j < scaled_.A.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.A, j); it; ++it)
                it.valueRef() *= de[it.row()] * dx[it.col()];
        scaled_.q.array() *= dx.array();
        scaled_.l.array() *= de.array();
        scaled_.u.array() *= de.array();
        d_scale_.array() *= dx.array();
        e_scale_.array() *= de.array();

        // cost normalization
        col_norm.setZero();
        for (Eigen::Index j = 0; j < scaled_.P.outerSize(); ++j)
            for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.P, j); it; ++it)
                col_norm[it.col()] = std::max(col_norm[it.col()], std::abs(it.value()));
        const double p_mean = n > 0 ? col_norm.mean() : 0.0;
        const double denom = std::max(p_mean, inf_norm(scaled_.q));
        if (denom > 0.0) {
            const double gamma = 1.0 / denom;
            scaled_.P *= gamma;
            scaled_.q *= gamma;
            cost_scale_ *= gamma;
        }
    }
}

void QpSolver::build_rho_vec()
{
    const Eigen::Index m = orig_.n_cons();
    rho_vec_.resize(m);
    rho_inv_vec_.resize(m);
    eq_row_.assign(static_cast<std::size_t>(m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        double r = rho_;
        if (is_loose(orig_.l[i], orig_.u[i])) {
            r = rho_ * 1e-6;
        } else if (is_equality(orig_.l[i], orig_.u[i])) {
            r = rho_ * 1e3;
            eq_row_[static_cast<std::size_t>(i)] = true;
        }
        rho_vec_[i] = r;
        rho_inv_vec_[i] = 1.0 / r;
    }
    factorized_ = false;
}

void QpSolver::factorize()
{
    const Eigen::Index n = orig_.n_vars();
    const Eigen::Index m = orig_.n_cons();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(scaled_.P.nonZeros() + scaled_.A.nonZeros() + n + m));
    for (Eigen::Index j = 0; j < scaled_.P.outerSize(); ++j)
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.P, j); it; ++it)
            trips.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index j = 0; j < n; ++j) trips.emplace_back(j, j, settings_.sigma);
    for (Eigen::Index j = 0; j < scaled_.A.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(scaled_.A, j); it; ++it) {
            trips.emplace_back(n + it.row(), it.col(), it.value());
            trips.emplace_back(it.col(), n + it.row(), it.value());
        }
    }
    for (Eigen::Index i = 0; i < m; ++i) trips.emplace_back(n + i, n + i, -rho_inv_vec_[i]);

    const bool first = kkt_.rows() == 0;
    kkt_.resize(n + m, n + m);
    kkt_.setFromTriplets(trips.begin(), trips.end());
    if (first) ldlt_.analyzePattern(kkt_);
    ldlt_.factorize(kkt_);
    if (ldlt_.info() != Eigen::Success)
        throw std::runtime_error("QpSolver: KKT factorization failed");
    factorized_ = true;
    ++n_factorizations_;
}

void QpSolver::update_linear_cost(const Eigen::VectorXd& q)
{
    if (q.size() != orig_.n_vars())
        throw std::invalid_argument("update_linear_cost: size mismatch");
    orig_.q = q;
    scaled_.q = cost_scale_ * d_scale_.cwiseProduct(q);
}

void QpSolver::update_bounds(const Eigen::VectorXd& l, const Eigen::VectorXd& u)
{
    if (l.size() != orig_.n_cons() || u.size() != orig_.n_cons())
        throw std::invalid_argument("update_bounds: size mismatch");
    for (Eigen::Index i = 0; i < l.size(); ++i)
        if (std::isnan(l[i]) || std::isnan(u[i]) || l[i] > u[i])
            throw std::invalid_argument("update_bounds: need l <= u");
    orig_.l = l;
    orig_.u = u;
    scaled_.l = e_scale_.cwiseProduct(l);
    scaled_.u = e_scale_.cwiseProduct(u);
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        const bool eq = !is_loose(l[i], u[i]) && is_equality(l[i], u[i]);
        if (eq != eq_row_[static_cast<std::size_t>(i)]) {
            build_rho_vec();
            return;
        }
    }
}

QpResult QpSolver::solve()
{
    return run(Eigen::VectorXd::Zero(orig_.n_vars()), Eigen::VectorXd::Zero(orig_.n_cons()));
}

QpResult QpSolver::solve(const Eigen::VectorXd& x0, const Eigen::VectorXd& y0)
{
    if (x0.size() != orig_.n_vars() || y0.size() != orig_.n_cons())
        throw std::invalid_argument("QpSolver::solve: warm start size mismatch");
    return run(x0, y0);
}

QpResult QpSolver::run(Eigen::VectorXd x_us, Eigen::VectorXd y_us)
{
    const Eigen::Index n = orig_.n_vars();
    const Eigen::Index m = orig_.n_cons();
    if (!factorized_) factorize();

    // move into the scaled space
    Eigen::VectorXd x = x_us.cwiseQuotient(d_scale_);
    Eigen::VectorXd y = cost_scale_ * y_us.cwiseQuotient(e_scale_);
    Eigen::VectorXd z = (scaled_.A * x).cwiseMax(scaled_.l).cwiseMin(scaled_.u);

    Eigen::VectorXd rhs(n + m), sol(n + m), zt(m), z_relax(m), dy(m);
    QpResult res;
    res.status = SolveStatus::MaxIter;

    auto unscale_x = [&](const Eigen::VectorXd& xs) { return d_scale_.cwiseProduct(xs); };
    auto unscale_y = [&](const Eigen::VectorXd& ys) {
        return e_scale_.cwiseProduct(ys) / cost_scale_;
    };

    int iter = 0;
    for (iter = 1; iter <= settings_.max_iter; ++iter) {
        rhs.head(n) = settings_.sigma * x - scaled_.q;
        rhs.tail(m) = z - rho_inv_vec_.cwiseProduct(y);
        sol = ldlt_.solve(rhs);

        zt = z + rho_inv_vec_.cwiseProduct(sol.tail(m) - y);
        x = settings_.alpha * sol.head(n) + (1.0 - settings_.alpha) * x;
        z_relax = settings_.alpha * zt + (1.0 - settings_.alpha) * z;
        const Eigen::VectorXd z_new =
            (z_relax + rho_inv_vec_.cwiseProduct(y)).cwiseMax(scaled_.l).cwiseMin(scaled_.u);
        dy = rho_vec_.cwiseProduct(z_relax - z_new);
        y += dy;
        z = z_new;

        const bool check = iter == 1 || iter % settings_.check_interval == 0 ||
                           iter == settings_.max_iter;
        if (!check) continue;

        const Eigen::VectorXd xu = unscale_x(x);
        const Eigen::VectorXd yu = unscale_y(y);
        const Eigen::VectorXd zu = z.cwiseQuotient(e_scale_);
        const Eigen::VectorXd ax = orig_.A * xu;
        const Eigen::VectorXd px = orig_.P * xu;
        const Eigen::VectorXd aty = orig_.A.transpose() * yu;

        const double r_prim = inf_norm(ax - zu);
        const double r_dual = inf_norm(px + orig_.q + aty);
        const double denom_p = std::max(inf_norm(ax), inf_norm(zu));
        const double denom_d = std::max({inf_norm(px), inf_norm(aty), inf_norm(orig_.q)});
        res.primal_res = r_prim;
        res.dual_res = r_dual;

        if (r_prim <= settings_.tol_abs + settings_.tol_rel * denom_p &&
            r_dual <= settings_.tol_abs + settings_.tol_rel * denom_d) {
            res.status = SolveStatus::Optimal;
            break;
        }

        // primal infeasibility certificate from the dual increment
        if (m > 0) {
            const Eigen::VectorXd dyu = unscale_y(dy);
            const double norm_dy = inf_norm(dyu);
            if (norm_dy > settings_.eps_infeas) {
                bool support_ok = true;
                double support = 0.0;
                for (Eigen::Index i = 0; i < m && support_ok; ++i) {
                    const double dp = std::max(dyu[i], 0.0);
                    const double dm = std::min(dyu[i], 0.0);
                    if (orig_.u[i] == kInf) {
                        if (dp > settings_.eps_infeas * norm_dy) support_ok = false;
                    } else {
                        support += orig_.u[i] * dp;
                    }
                    if (orig_.l[i] == -kInf) {
                        if (dm < -settings_.eps_infeas * norm_dy) support_ok = false;
                    } else {
                        support += orig_.l[i] * dm;
                    }
                }
                if (support_ok && inf_norm(orig_.A.transpose() * dyu) <=
                                      settings_.eps_infeas * norm_dy &&
                    support <= -settings_.eps_infeas * norm_dy) {
                    res.status = SolveStatus::Infeasible;
                    break;
                }
            }
        }

        if (settings_.adaptive_rho && iter < settings_.max_iter) {
            const double num = r_prim / std::max(denom_p, 1e-12);
            const double den = r_dual / std::max(denom_d, 1e-12);
            if (num > 0.0 && den > 0.0) {
                const double ratio = std::sqrt(num / den);
                if (ratio > 5.0 || ratio < 0.2) {
                    rho_ = std::clamp(rho_ * ratio, 1e-6, 1e6);
                    build_rho_vec();
                    factorize();
                }
            }
        }
    }

    res.iterations = std::min(iter, settings_.max_iter);
    res.x = unscale_x(x);
    res.y = unscale_y(y);
    return res;
}

double objective(const SparseQp& qp, const Eigen::VectorXd& x)
{
    if (x.size() != qp.n_vars()) throw std::invalid_argument("objective: size mismatch");
    return 0.5 * x.dot(qp.P * x) + qp.q.dot(x);
}

QpResult solve(const SparseQp& qp, SolverSettings settings)
{
    QpSolver solver(qp, settings);
    return solver.solve();
}

QpResult solve(const SparseQp& qp, const Eigen::VectorXd& x0, const Eigen::VectorXd& y0,
               SolverSettings settings)
{
    QpSolver solver(qp, settings);
    return solver.solve(x0, y0);
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> warm_start_from(const QpResult& prev,
                                                            const SparseQp& qp)
{
    if (prev.x.size() == 0 && prev.y.size() == 0)
        return {Eigen::VectorXd::Zero(qp.n_vars()), Eigen::VectorXd::Zero(qp.n_cons())};
    if (prev.x.size() != qp.n_vars() || prev.y.size() != qp.n_cons())
        throw std::invalid_argument("warm_start_from: dimension mismatch");
    return {prev.x, prev.y};
}

}  // namespace hubmesh::qp
