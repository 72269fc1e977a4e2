#include "sct/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

namespace sct {

void InnerObjective::check() const {
    const auto k = fit_x0.rows();
    const auto j = fit_x0.cols();
    if (fit_x1.size() != k || pen_x1.size() != k || pen_x0.rows() != k || pen_x0.cols() != j ||
        v_diag.size() != k) {
        throw DimensionMismatch("inner objective blocks have inconsistent shapes");
    }
    if (j < 1) {
        throw DimensionMismatch("inner objective needs at least one donor");
    }
    if (lambda < 0) {
        throw Error("lambda must be nonnegative");
    }
    if (v_diag.minCoeff() < 0 || std::abs(v_diag.sum() - 1.0) > 1e-6) {
        throw Error("v_diag must be nonnegative and sum to 1");
    }
}

Eigen::VectorXd InnerObjective::penalty_costs() const {
    Eigen::VectorXd c(pen_x0.cols());
    for (int j = 0; j < pen_x0.cols(); ++j) {
        c(j) = (pen_x1 - pen_x0.col(j)).array().square().matrix().dot(v_diag);
    }
    return c;
}

double objective_value(const InnerObjective& obj, const Eigen::VectorXd& w) {
    obj.check();
    if (w.size() != obj.fit_x0.cols()) {
        throw DimensionMismatch("weight vector length does not match donor count");
    }
    Eigen::VectorXd residual = obj.fit_x1 - obj.fit_x0 * w;
    double fit = residual.array().square().matrix().dot(obj.v_diag);
    return fit + obj.lambda * obj.penalty_costs().dot(w);
}

Eigen::VectorXd project_to_simplex(Eigen::VectorXd v) {
    const int n = static_cast<int>(v.size());
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0;
    double theta = 0;
    int rho = 0;
    for (int i = 0; i < n; ++i) {
        cumsum += u[i];
        double candidate = (cumsum - 1.0) / (i + 1);
        if (u[i] - candidate > 0) {
            rho = i + 1;
            theta = candidate;
        }
    }
    (void)rho;
    return (v.array() - theta).max(0.0).matrix();
}

namespace {

struct QuadModel {
    Eigen::MatrixXd b_mat;   // sqrt(V) * fit_x0
    Eigen::VectorXd b_vec;   // sqrt(V) * fit_x1
    Eigen::VectorXd lin;     // lambda * penalty costs
    Eigen::MatrixXd hess;    // 2 * b_mat' b_mat

    double value(const Eigen::VectorXd& w) const {
        return (b_vec - b_mat * w).squaredNorm() + lin.dot(w);
    }
    Eigen::VectorXd gradient(const Eigen::VectorXd& w) const {
        return 2.0 * (b_mat.transpose() * (b_mat * w - b_vec)) + lin;
    }
};

double projected_gradient_norm(const QuadModel& model, const Eigen::VectorXd& w) {
    Eigen::VectorXd step = project_to_simplex(w - model.gradient(w));
    return (w - step).lpNorm<Eigen::Infinity>();
}

// Solves the equality-constrained problem restricted to `support` via the
// KKT system. Minimum-norm solve: the system is singular when the support is
// larger than the rank of the fit block. `resid_tol` separates consistent
// systems (roundoff-level residual) from inconsistent ones, whose
// least-squares residual is structural — those faces are unbounded and must
// not be mistaken for stationary points.
bool solve_face(const QuadModel& model, const std::vector<int>& support, double resid_tol,
                Eigen::VectorXd& sol_out) {
    const int s = static_cast<int>(support.size());
    Eigen::MatrixXd kkt(s + 1, s + 1);
    Eigen::VectorXd rhs(s + 1);
    for (int a = 0; a < s; ++a) {
        for (int b = 0; b < s; ++b) kkt(a, b) = model.hess(support[a], support[b]);
        kkt(a, s) = 1.0;
        kkt(s, a) = 1.0;
        rhs(a) = 2.0 * model.b_mat.col(support[a]).dot(model.b_vec) - model.lin(support[a]);
    }
    kkt(s, s) = 0.0;
    rhs(s) = 1.0;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
    sol_out = cod.solve(rhs);
    return sol_out.allFinite() &&
           (kkt * sol_out - rhs).lpNorm<Eigen::Infinity>() <= resid_tol;
}

// Primal active-set refinement from a warm-start support. The face KKT
// system can be singular, in which case the minimum-norm face solution may be
// badly infeasible; stepping from the current feasible iterate toward it and
// dropping the *blocking* coordinate keeps the objective monotone, which is
// what rules out cycling.
bool polish_on_support(const QuadModel& model, std::vector<int> support,
                       Eigen::VectorXd& w_out) {
    const int n = static_cast<int>(w_out.size());
    const double grad_scale =
        std::max(1.0, model.gradient(Eigen::VectorXd::Constant(n, 1.0 / n))
                          .lpNorm<Eigen::Infinity>());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    for (int idx : support) w(idx) = std::max(w_out(idx), 0.0);
    double total = w.sum();
    if (total <= 0) return false;
    w /= total;
    // A face only counts as stationary when its residual is far below the
    // gradient tolerance the final KKT certificate uses; consistent systems
    // solve to roundoff, inconsistent ones stick at a structural residual.
    const double kkt_tol = 1e-9 * grad_scale;
    Eigen::VectorXd sol;
    std::vector<bool> banned(n, false);
    for (int round = 0; round < 10 * n + 20; ++round) {
        if (support.empty()) return false;
        if (!solve_face(model, support, 0.05 * kkt_tol, sol)) {
            // Inconsistent KKT system: the restricted problem is unbounded
            // along some direction d with B_S d = 0, 1'd = 0 and a negative
            // linear slope. Walk that direction until a weight hits zero and
            // drop the blocker; the whole support can never be optimal.
            const int s = static_cast<int>(support.size());
            Eigen::MatrixXd stacked(model.b_mat.rows() + 1, s);
            Eigen::VectorXd c0(s);
            for (int a = 0; a < s; ++a) {
                stacked.col(a).head(model.b_mat.rows()) = model.b_mat.col(support[a]);
                stacked(model.b_mat.rows(), a) = 1.0;
                c0(a) = model.lin(support[a]) - 2.0 * model.b_mat.col(support[a]).dot(model.b_vec);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(stacked);
            Eigen::MatrixXd kernel = lu.kernel();
            int lightest = 0;
            for (int a = 1; a < s; ++a) {
                if (w(support[a]) < w(support[lightest])) lightest = a;
            }
            bool stepped = false;
            if (kernel.cols() > 0 && kernel.squaredNorm() > 0) {
                Eigen::VectorXd z =
                    kernel.completeOrthogonalDecomposition().solve(-c0);
                Eigen::VectorXd d = kernel * z;
                // d is minus the projection of c0 onto the kernel, so the
                // slope c0'd is nonpositive by construction; even a
                // numerically flat direction is worth walking because it
                // sheds a donor the face cannot keep.
                if (d.lpNorm<Eigen::Infinity>() >
                    1e-14 * std::max(1.0, c0.lpNorm<Eigen::Infinity>())) {
                    double t = -1.0;
                    int blocking = -1;
                    for (int a = 0; a < s; ++a) {
                        if (d(a) < -1e-14) {
                            double limit = w(support[a]) / (-d(a));
                            if (blocking < 0 || limit < t) {
                                t = limit;
                                blocking = a;
                            }
                        }
                    }
                    if (blocking >= 0) {
                        if (t < 1e-14) {
                            banned[support[blocking]] = true;
                        } else {
                            std::fill(banned.begin(), banned.end(), false);
                        }
                        for (int a = 0; a < s; ++a) {
                            w(support[a]) = std::max(w(support[a]) + t * d(a), 0.0);
                        }
                        w(support[blocking]) = 0.0;
                        support.erase(support.begin() + blocking);
                        stepped = true;
                    }
                }
            }
            if (!stepped) {
                // No usable descent direction: numerically bounded but
                // unsolvable face. Shed the lightest donor and move on.
                w(support[lightest]) = 0.0;
                support.erase(support.begin() + lightest);
            }
            continue;
        }
        const int s = static_cast<int>(support.size());
        // Largest step toward the face minimizer that stays feasible. Both
        // points sum to one, so the line stays on the affine constraint.
        double t = 1.0;
        int blocking = -1;
        for (int a = 0; a < s; ++a) {
            double cur = w(support[a]);
            if (sol(a) < -1e-12 && sol(a) < cur) {
                double step = cur / (cur - sol(a));
                if (step < t) {
                    t = step;
                    blocking = a;
                }
            }
        }
        if (blocking >= 0) {
            // A degenerate zero-length step re-blocks the donor that just
            // entered; ban it for the rest of the polish so the exchange
            // cannot cycle. Bans reset whenever real progress is made.
            if (t < 1e-14) {
                banned[support[blocking]] = true;
            } else {
                std::fill(banned.begin(), banned.end(), false);
            }
            for (int a = 0; a < s; ++a) {
                w(support[a]) = std::max(w(support[a]) + t * (sol(a) - w(support[a])), 0.0);
            }
            w(support[blocking]) = 0.0;
            support.erase(support.begin() + blocking);
            continue;
        }
        for (int a = 0; a < s; ++a) w(support[a]) = std::max(sol(a), 0.0);
        total = w.sum();
        if (total <= 0) return false;
        w /= total;
        // KKT: on the support the gradient equals the multiplier; off it the
        // gradient must not undercut the multiplier.
        Eigen::VectorXd grad = model.gradient(w);
        double nu = 0;
        for (int idx : support) nu += grad(idx);
        nu /= static_cast<double>(support.size());
        int entering = -1;
        double worst_violation = -kkt_tol;
        std::vector<bool> in_support(n, false);
        for (int idx : support) in_support[idx] = true;
        for (int j = 0; j < n; ++j) {
            if (in_support[j] || banned[j]) continue;
            double violation = grad(j) - nu;
            if (violation < worst_violation) {
                worst_violation = violation;
                entering = j;
            }
        }
        if (entering < 0) {
            // Banned donors were skipped above; a banned donor that still
            // violates the KKT conditions means this polish is stuck, not done.
            for (int j = 0; j < n; ++j) {
                if (banned[j] && !in_support[j] && grad(j) - nu < -kkt_tol) return false;
            }
            // Full certificate: the support gradients must agree with the
            // multiplier, not just average to it.
            for (int idx : support) {
                if (std::abs(grad(idx) - nu) > kkt_tol) return false;
            }
            w_out = w;
            return true;
        }
        support.push_back(entering);
    }
    return false;
}

}  // namespace

Eigen::VectorXd solve_weights(const InnerObjective& obj, const SolveOptions& opts) {
    obj.check();
    if (opts.tol <= 0) {
        throw Error("solver tolerance must be positive");
    }
    const int n = obj.n_donors();
    if (n == 1) {
        return Eigen::VectorXd::Ones(1);
    }

    QuadModel model;
    Eigen::VectorXd sqv = obj.v_diag.cwiseSqrt();
    model.b_mat = sqv.asDiagonal() * obj.fit_x0;
    model.b_vec = sqv.cwiseProduct(obj.fit_x1);
    model.lin = obj.lambda * obj.penalty_costs();
    model.hess = 2.0 * model.b_mat.transpose() * model.b_mat;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(model.hess);
    double lipschitz = eig.eigenvalues().maxCoeff();
    if (!(lipschitz > 0)) lipschitz = 1.0;  // pure linear objective
    const double step = 1.0 / lipschitz;

    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::VectorXd y = x;
    double theta = 1.0;
    double f_x = model.value(x);
    double f_sweep = f_x;

    auto try_finish = [&](Eigen::VectorXd& candidate) -> bool {
        // Coordinates far below the largest one are still decaying toward
        // zero; including them fattens the face past the Hessian's rank and
        // the restricted problem becomes unbounded. The refinement can
        // re-admit any donor it actually needs.
        const double cutoff = std::max(opts.snap_threshold, 1e-6 * candidate.maxCoeff());
        std::vector<int> support;
        for (int j = 0; j < n; ++j) {
            if (candidate(j) > cutoff) support.push_back(j);
        }
        if (support.empty()) return false;
        Eigen::VectorXd polished = candidate;
        if (!polish_on_support(model, support, polished)) return false;
        // The refinement verifies the KKT conditions itself; just guard
        // against a numerically worse point.
        if (model.value(polished) > f_x + 1e-9 * std::max(1.0, std::abs(f_x))) return false;
        candidate = polished;
        return true;
    };

    int next_check = 25;
    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        Eigen::VectorXd grad_y = model.gradient(y);
        Eigen::VectorXd x_new = project_to_simplex(y - step * grad_y);
        double f_new = model.value(x_new);

        if (f_new > f_x) {
            // Monotone restart: drop momentum and retake the step from x.
            y = x;
            theta = 1.0;
            x_new = project_to_simplex(x - step * model.gradient(x));
            f_new = model.value(x_new);
        }
        double theta_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        y = x_new + ((theta - 1.0) / theta_new) * (x_new - x);
        theta = theta_new;
        x = x_new;
        f_x = f_new;

        // Polish attempts get geometrically rarer: failed ones on a stubborn
        // instance are pure overhead, and the iterate only earns a fresh look
        // after it has moved substantially.
        const bool check_now = iter >= next_check || iter == opts.max_iters;
        if (check_now) {
            next_check = iter + std::max(25, iter / 2);
            if (try_finish(x)) {
                break;
            }
            double rel_decrease = std::abs(f_sweep - f_x) / std::max(1.0, std::abs(f_x));
            if (rel_decrease < opts.tol && projected_gradient_norm(model, x) < opts.tol) {
                break;
            }
            f_sweep = f_x;
            if (iter == opts.max_iters) {
                std::ostringstream msg;
                msg << "solver did not converge: objective=" << model.value(x)
                    << " projected_gradient_norm=" << projected_gradient_norm(model, x);
                throw DidNotConverge(msg.str());
            }
        }
    }

    // Snap solver noise to exact zeros and renormalize.
    for (int j = 0; j < n; ++j) {
        if (x(j) < opts.snap_threshold) x(j) = 0.0;
    }
    double total = x.sum();
    if (total <= 0) {
        throw DidNotConverge("all weights collapsed below the snap threshold");
    }
    x /= total;
    return x;
}

}  // namespace sct
