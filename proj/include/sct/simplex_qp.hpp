#pragma once

#include <Eigen/Dense>

#include "sct/errors.hpp"

namespace sct {

/// Inner weight problem for a fixed (V, lambda):
///
///   minimize  sum_k v_k (fit_x1_k - sum_j w_j fit_x0_kj)^2
///           + lambda * sum_j w_j sum_k v_k (pen_x1_k - pen_x0_kj)^2
///
/// over w in the probability simplex. Both blocks may hold levels or
/// differences; the caller decides what discrepancy the penalty measures.
struct InnerObjective {
    Eigen::VectorXd fit_x1;  // length k
    Eigen::MatrixXd fit_x0;  // k x J
    Eigen::VectorXd pen_x1;  // length k
    Eigen::MatrixXd pen_x0;  // k x J
    Eigen::VectorXd v_diag;  // length k, nonnegative, sums to 1
    double lambda = 0;

    int n_donors() const { return static_cast<int>(fit_x0.cols()); }
    int n_variables() const { return static_cast<int>(fit_x0.rows()); }
    void check() const;

    // Per-donor penalty cost c_j = sum_k v_k (pen_x1_k - pen_x0_kj)^2, so the
    // penalty term is lambda * c.dot(w).
    Eigen::VectorXd penalty_costs() const;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iters = 100000;
    // Weights below this are snapped to exactly 0 and the vector renormalized.
    double snap_threshold = 1e-9;
};

double objective_value(const InnerObjective& obj, const Eigen::VectorXd& w);

// Euclidean projection onto {w : w >= 0, sum w = 1}.
Eigen::VectorXd project_to_simplex(Eigen::VectorXd v);

/// Deterministic global minimizer of the inner objective. Accelerated
/// projected gradient from the uniform vector, followed by an active-set
/// refinement step that solves the KKT system on the converged support.
Eigen::VectorXd solve_weights(const InnerObjective& obj, const SolveOptions& opts = {});

}  // namespace sct
