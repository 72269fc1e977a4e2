#include "sct/bias_lab.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace sct {

double Link::operator()(double z) const {
    switch (kind) {
        case Kind::Linear: return z;
        case Kind::Power: return std::pow(z, exponent);
        case Kind::Custom: return fn(z);
    }
    return z;
}

bool Link::is_linear() const {
    return kind == Kind::Linear || (kind == Kind::Power && exponent == 1.0);
}

Link Link::linear() { return Link{Kind::Linear, 1.0, {}}; }

Link Link::power(double p) { return Link{Kind::Power, p, {}}; }

Link Link::custom(std::function<double(double)> f) {
    return Link{Kind::Custom, 0.0, std::move(f)};
}

void GenerativeSpec::check() const {
    if (n_units < 1 || n_periods < 1 || n_covariates < 1) {
        throw InvalidSpec("generative spec needs units, periods and covariates >= 1");
    }
    if (noise_sd < 0) {
        throw InvalidSpec("noise_sd must be nonnegative");
    }
    if (!(cov_low <= cov_high)) {
        throw InvalidSpec("covariate sampler range is inverted");
    }
    if (!time_coeffs.empty() && static_cast<int>(time_coeffs.size()) != n_periods) {
        throw InvalidSpec("time_coeffs must have one entry per period");
    }
    if (!common_trend.empty() && static_cast<int>(common_trend.size()) != n_periods) {
        throw InvalidSpec("common_trend must have one entry per period");
    }
    if (fixed_z && (fixed_z->rows() != n_units || fixed_z->cols() != n_covariates)) {
        throw InvalidSpec("fixed_z must be (J+1) x k");
    }
    if (fixed_noise && (fixed_noise->rows() != n_units || fixed_noise->cols() != n_periods)) {
        throw InvalidSpec("fixed_noise must be (J+1) x T");
    }
    if (unobserved) {
        if (static_cast<int>(unobserved->mu.size()) != n_units) {
            throw InvalidSpec("unobserved block needs one mu per unit");
        }
        if (!unobserved->lambda_t.empty() &&
            static_cast<int>(unobserved->lambda_t.size()) != n_periods) {
            throw InvalidSpec("unobserved lambda_t must have one entry per period");
        }
    }
    if (link.kind == Link::Kind::Custom && !link.fn) {
        throw InvalidSpec("custom link has no function");
    }
}

namespace {

double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Box-Muller; deterministic for a given stream position.
double next_normal(std::mt19937_64& rng) {
    double u1 = next_uniform(rng);
    double u2 = next_uniform(rng);
    while (u1 <= 0) u1 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

GeneratedPanel generate_panel(const GenerativeSpec& spec) {
    spec.check();
    const int n = spec.n_units;
    const int T = spec.n_periods;
    const int k = spec.n_covariates;
    std::mt19937_64 rng(spec.seed);

    GeneratedPanel out;
    if (spec.fixed_z) {
        out.z = *spec.fixed_z;
    } else {
        out.z.resize(n, k);
        for (int i = 0; i < n; ++i) {
            for (int c = 0; c < k; ++c) {
                out.z(i, c) = spec.cov_low + (spec.cov_high - spec.cov_low) * next_uniform(rng);
            }
        }
    }
    if (spec.fixed_noise) {
        out.noise = *spec.fixed_noise;
    } else {
        out.noise.setZero(n, T);
        if (spec.noise_sd > 0) {
            for (int i = 0; i < n; ++i) {
                for (int t = 0; t < T; ++t) {
                    out.noise(i, t) = spec.noise_sd * next_normal(rng);
                }
            }
        }
    }

    out.noiseless.resize(n, T);
    for (int i = 0; i < n; ++i) {
        double phi_sum = 0;
        for (int c = 0; c < k; ++c) phi_sum += spec.link(out.z(i, c));
        for (int t = 0; t < T; ++t) {
            double theta = spec.time_coeffs.empty() ? 1.0 : spec.time_coeffs[t];
            double delta = spec.common_trend.empty() ? 0.0 : spec.common_trend[t];
            double y = delta + theta * phi_sum;
            if (spec.unobserved) {
                double lambda = spec.unobserved->lambda_t.empty() ? 1.0
                                                                  : spec.unobserved->lambda_t[t];
                y += lambda * spec.unobserved->phi(spec.unobserved->mu[i]);
            }
            out.noiseless(i, t) = y;
        }
    }
    if (spec.unobserved) out.mu = spec.unobserved->mu;

    PanelData panel;
    for (int i = 0; i < n; ++i) panel.unit_ids.push_back("unit" + std::to_string(i));
    for (int t = 0; t < T; ++t) panel.time_points.push_back(t + 1);
    panel.outcomes = out.noiseless + out.noise;
    for (int c = 0; c < k; ++c) {
        panel.covariate_names.push_back("z" + std::to_string(c + 1));
        // Covariates are unit-specific and time-invariant.
        panel.covariates.push_back(out.z.col(c).replicate(1, T));
    }
    panel.check_consistent();
    out.panel = std::move(panel);
    return out;
}

double bias_lower_bound(const Eigen::VectorXd& w, const Eigen::VectorXd& z1,
                        const Eigen::MatrixXd& z0, const Link& link) {
    if (z0.rows() != z1.size() || z0.cols() != w.size()) {
        throw DimensionMismatch("bias bound inputs have inconsistent shapes");
    }
    double total = 0;
    for (int v = 0; v < z1.size(); ++v) {
        double synth = 0;
        for (int j = 0; j < w.size(); ++j) synth += w(j) * link(z0(v, j));
        total += std::abs(link(z1(v)) - synth);
    }
    return total;
}

double associativity_gap(const Link& link, const Eigen::VectorXd& w, const Eigen::VectorXd& z) {
    if (w.size() != z.size()) {
        throw DimensionMismatch("associativity gap needs one covariate value per donor");
    }
    double mixed = link(w.dot(z));
    double averaged = 0;
    for (int j = 0; j < z.size(); ++j) averaged += w(j) * link(z(j));
    return mixed - averaged;
}

namespace {

void claim(ExampleReport& report, const std::string& name, double expected, double actual,
           double tol) {
    ClaimResult c{name, expected, actual, std::abs(expected - actual) < tol};
    report.claims.push_back(c);
}

}  // namespace

ExampleReport reproduce_examples(double tolerance) {
    ExampleReport report;
    const Link square = Link::power(2);
    const Link cube = Link::power(3);

    // Three units on a single covariate, outcome = Z^2.
    Eigen::VectorXd z_small(3);
    z_small << 2, 1, 3;
    Eigen::VectorXd donors_z(2);
    donors_z << 1, 3;
    Eigen::VectorXd w_half(2);
    w_half << 0.5, 0.5;

    // Equal weights reconstruct the covariate but miss the outcome by 1.
    claim(report, "square link: equal weights match the covariate", 2.0, w_half.dot(donors_z),
          tolerance);
    Eigen::MatrixXd z0_row = donors_z.transpose();
    claim(report, "square link: outcome mismatch at equal weights", 1.0,
          bias_lower_bound(w_half, z_small.head(1), z0_row, square), tolerance);

    // The outcome-matching weights miss the covariate instead.
    Eigen::VectorXd w_alt(2);
    w_alt << 0.625, 0.375;
    claim(report, "square link: alternative weights match the outcome", 4.0,
          w_alt(0) * 1.0 + w_alt(1) * 9.0, tolerance);
    claim(report, "square link: alternative weights miss the covariate", 1.75,
          w_alt.dot(donors_z), tolerance);

    // Injected noise (1, 1, -1) produces a spurious perfect fit at equal
    // weights: the observed outcomes match while the noiseless ones do not.
    GenerativeSpec noisy;
    noisy.n_units = 3;
    noisy.n_periods = 1;
    noisy.n_covariates = 1;
    noisy.link = square;
    noisy.fixed_z = z_small;
    Eigen::MatrixXd eps(3, 1);
    eps << 1, 1, -1;
    noisy.fixed_noise = eps;
    GeneratedPanel gp = generate_panel(noisy);
    claim(report, "noisy outcomes are (5, 2, 8): treated", 5.0, gp.panel.outcomes(0, 0),
          tolerance);
    claim(report, "noisy outcomes are (5, 2, 8): donor 1", 2.0, gp.panel.outcomes(1, 0),
          tolerance);
    claim(report, "noisy outcomes are (5, 2, 8): donor 2", 8.0, gp.panel.outcomes(2, 0),
          tolerance);
    double observed_fit =
        gp.panel.outcomes(0, 0) - (0.5 * gp.panel.outcomes(1, 0) + 0.5 * gp.panel.outcomes(2, 0));
    claim(report, "noise makes the observed fit spuriously perfect", 0.0, observed_fit,
          tolerance);
    double noiseless_gap =
        gp.noiseless(0, 0) - (0.5 * gp.noiseless(1, 0) + 0.5 * gp.noiseless(2, 0));
    claim(report, "the noiseless gap behind the spurious fit is still 1", -1.0, noiseless_gap,
          tolerance);

    // Stronger non-linearity: cube link raises the mismatch from 1 to 6.
    claim(report, "cube link: mismatch grows to 6", 6.0,
          bias_lower_bound(w_half, z_small.head(1), z0_row, cube), tolerance);

    // Shifting the covariates by 10 raises the cube-link mismatch to 36.
    Eigen::VectorXd z_shifted(1);
    z_shifted << 12;
    Eigen::MatrixXd z0_shifted(1, 2);
    z0_shifted << 11, 13;
    claim(report, "cube link: shifted covariates raise the mismatch to 36", 36.0,
          bias_lower_bound(w_half, z_shifted, z0_shifted, cube), tolerance);

    // Fourth unit at Z=4: two covariate-matching weightings with different
    // pairwise discrepancies and outcome mismatches.
    Eigen::VectorXd donors_wide(3);
    donors_wide << 1, 3, 4;
    Eigen::VectorXd w1(3), w2(3);
    w1 << 0.5, 0.5, 0.0;
    w2 << 2.0 / 3.0, 0.0, 1.0 / 3.0;
    auto pairwise_sq = [&](const Eigen::VectorXd& w) {
        double acc = 0;
        for (int j = 0; j < w.size(); ++j) {
            acc += w(j) * (2.0 - donors_wide(j)) * (2.0 - donors_wide(j));
        }
        return acc;
    };
    claim(report, "pairwise squared sum at the tight weighting", 1.0, pairwise_sq(w1), tolerance);
    claim(report, "pairwise squared sum at the wide weighting", 2.0, pairwise_sq(w2), tolerance);
    Eigen::MatrixXd z0_wide = donors_wide.transpose();
    claim(report, "wide weighting still matches the covariate", 2.0, w2.dot(donors_wide),
          tolerance);
    claim(report, "outcome mismatch at the tight weighting", 1.0,
          bias_lower_bound(w1, z_small.head(1), z0_wide, square), tolerance);
    claim(report, "outcome mismatch at the wide weighting", 2.0,
          bias_lower_bound(w2, z_small.head(1), z0_wide, square), tolerance);

    // Non-associativity witness: square of the average vs average of squares.
    claim(report, "square link does not associate: gap is -1", -1.0,
          associativity_gap(square, w_half, donors_z), tolerance);
    Eigen::VectorXd w_degenerate(2);
    w_degenerate << 1, 0;
    claim(report, "degenerate weights associate exactly", 0.0,
          associativity_gap(square, w_degenerate, donors_z), tolerance);

    report.all_pass = true;
    for (const auto& c : report.claims) report.all_pass = report.all_pass && c.pass;
    return report;
}

std::string render_example_report_text(const ExampleReport& report) {
    std::ostringstream out;
    out << std::setprecision(15);
    for (const auto& c : report.claims) {
        out << (c.pass ? "[pass] " : "[FAIL] ") << c.name << ": expected " << c.expected
            << ", got " << c.actual << '\n';
    }
    out << (report.all_pass ? "all claims pass" : "SOME CLAIMS FAILED") << '\n';
    return out.str();
}

}  // namespace sct
