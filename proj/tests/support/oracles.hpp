#pragma once

#include <random>
#include <string>

#include <Eigen/Dense>

#include "hubmesh/model.hpp"
#include "hubmesh/qpsolve.hpp"

namespace oracle {

/// Dense mirror of SparseQp for the brute-force reference solvers.
struct DenseQp {
    Eigen::MatrixXd P;
    Eigen::VectorXd q;
    Eigen::MatrixXd A;
    Eigen::VectorXd l, u;

    int n() const { return static_cast<int>(q.size()); }
    int m() const { return static_cast<int>(l.size()); }
};

struct Candidate {
    bool found = false;
    Eigen::VectorXd x;
    double objective = 0.0;
};

/// Exhaustive active-set enumeration for strictly convex QPs. Each ranged row
/// is tried inactive, pinned at l and pinned at u (equality rows are always
/// pinned); every stationary point of the resulting equality-constrained
/// subproblem that is feasible for the full problem is a candidate, and the
/// candidate with the smallest objective is the global optimum.
Candidate active_set_solve(const DenseQp& qp);

/// Brute-force vertex enumeration for LPs (P = 0): every choice of n active
/// rows pinned at one of their bounds defines a basic point; the cheapest
/// feasible one wins. The row set must make the polytope bounded.
Candidate lp_vertex_solve(const DenseQp& qp);

/// Box-constrained strictly convex QP reference: exact cyclic coordinate
/// minimization run to machine precision, then certified through the KKT
/// conditions (throws if the certificate fails).
Candidate box_kkt_solve(const Eigen::MatrixXd& P, const Eigen::VectorXd& q,
                        const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);

hubmesh::qp::SparseQp to_sparse(const DenseQp& qp);

/// Random strictly convex QP with n variables and m constraint rows (a mix of
/// equalities, one-sided and ranged inequalities), built around a sampled
/// interior point so the instance is always feasible.
DenseQp random_qp(std::mt19937& rng, int n, int m_rows);

/// Random radial network on a uniform hourly base grid with n_base samples
/// per series: one slack electricity grid per hub, demands sized well below
/// the grid capacity, plus optional battery, PV, and a gas boiler serving a
/// heat demand. Hubs are chained by electricity links.
hubmesh::model::Network random_network(std::mt19937& rng, int n_hubs, std::size_t n_base);

/// Absolute path of a file shipped under the data directory.
std::string data_path(const std::string& rel);

}  // namespace oracle
