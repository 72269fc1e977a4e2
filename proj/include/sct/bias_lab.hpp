#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sct/panel.hpp"

namespace sct {

/// Pointwise outcome map applied to each covariate value.
struct Link {
    enum class Kind { Linear, Power, Custom };
    Kind kind = Kind::Linear;
    double exponent = 1.0;
    std::function<double(double)> fn;

    double operator()(double z) const;
    bool is_linear() const;

    static Link linear();
    static Link power(double p);
    static Link custom(std::function<double(double)> f);
};

struct UnobservedBlock {
    std::vector<double> mu;        // one per unit
    Link phi = Link::linear();
    std::vector<double> lambda_t;  // time coefficients; empty means all 1
};

/// Panel generator for Y_it = delta_t + theta_t * sum_c Phi(Z_ic)
///                            + lambda_t * phi(mu_i) + eps_it.
struct GenerativeSpec {
    int n_units = 10;       // J+1
    int n_periods = 20;     // T
    int n_covariates = 1;   // columns of Z
    Link link = Link::linear();
    std::vector<double> time_coeffs;   // theta_t; empty means all 1
    std::vector<double> common_trend;  // delta_t; empty means all 0
    std::optional<UnobservedBlock> unobserved;
    double noise_sd = 0;
    std::uint64_t seed = 0;
    double cov_low = 0, cov_high = 1;          // uniform sampler for Z
    std::optional<Eigen::MatrixXd> fixed_z;    // (J+1) x k override
    std::optional<Eigen::MatrixXd> fixed_noise;  // (J+1) x T override

    void check() const;  // throws InvalidSpec
};

struct GeneratedPanel {
    PanelData panel;
    Eigen::MatrixXd z;          // (J+1) x k covariate draws
    Eigen::MatrixXd noiseless;  // (J+1) x T outcomes without noise
    Eigen::MatrixXd noise;      // (J+1) x T epsilon draws
    std::vector<double> mu;     // empty when no unobserved block
};

GeneratedPanel generate_panel(const GenerativeSpec& spec);

// Per-variable gap |Phi(Z1_v) - sum_j w_j Phi(Z0_vj)| aggregated by absolute
// sum across variables.
double bias_lower_bound(const Eigen::VectorXd& w, const Eigen::VectorXd& z1,
                        const Eigen::MatrixXd& z0, const Link& link);

// Phi(sum_j w_j z_j) - sum_j w_j Phi(z_j); zero for linear Phi.
double associativity_gap(const Link& link, const Eigen::VectorXd& w, const Eigen::VectorXd& z);

struct ClaimResult {
    std::string name;
    double expected = 0;
    double actual = 0;
    bool pass = false;
};

struct ExampleReport {
    std::vector<ClaimResult> claims;
    bool all_pass = false;
};

// Recomputes every numeric claim of the worked mismatch examples and the
// non-associativity witness; failures are report entries, not errors.
ExampleReport reproduce_examples(double tolerance = 1e-12);

std::string render_example_report_text(const ExampleReport& report);

}  // namespace sct
