// End-to-end acceptance checks. Each criterion prints a single pass/fail
// line; the process exits non-zero if any selected criterion fails.
//
// Usage: acceptance [--criterion N]   (default: run all ten)

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sct/bias_lab.hpp"
#include "sct/diagnostics.hpp"
#include "sct/evaluation.hpp"
#include "sct/inference.hpp"
#include "sct/panel.hpp"

using namespace sct;

namespace {

const std::string kDataDir = SCT_DATA_DIR;

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void expect(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            detail << (detail.str().empty() ? "" : "; ") << what;
        }
    }
};

std::string fmt(double x) {
    std::ostringstream out;
    out.precision(6);
    out << x;
    return out.str();
}

// ---------------------------------------------------------------------------
// Shared panel generators for the property criteria.

// Noiseless linear-link panel whose treated covariates are a strictly convex
// donor combination, so an exact synthetic control exists.
GeneratedPanel linear_hull_panel(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.2, 3.0);
    const int donors = 4 + static_cast<int>(rng() % 5);
    const int k = 1 + static_cast<int>(rng() % 3);
    const int periods = 16;

    Eigen::MatrixXd donor_z(donors, k);
    for (int j = 0; j < donors; ++j)
        for (int c = 0; c < k; ++c) donor_z(j, c) = unif(rng);
    std::exponential_distribution<double> exp1(1.0);
    Eigen::VectorXd mix(donors);
    for (int j = 0; j < donors; ++j) mix(j) = 0.2 + exp1(rng);  // strictly interior
    mix /= mix.sum();

    GenerativeSpec spec;
    spec.n_units = donors + 1;
    spec.n_periods = periods;
    spec.n_covariates = k;
    spec.link = Link::linear();
    spec.time_coeffs.resize(periods);
    spec.common_trend.resize(periods);
    for (int t = 0; t < periods; ++t) {
        spec.time_coeffs[t] = 1.0 + 0.15 * t;
        spec.common_trend[t] = 5.0 - 0.4 * t;
    }
    Eigen::MatrixXd z(donors + 1, k);
    z.row(0) = (donor_z.transpose() * mix).transpose();
    z.bottomRows(donors) = donor_z;
    spec.fixed_z = z;
    return generate_panel(spec);
}

// Noisy panel with per-unit levels and trends, used by the shift/monotonicity
// and determinism criteria.
PanelData trending_panel(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int units = 5 + static_cast<int>(rng() % 4);
    const int periods = 14;
    Eigen::MatrixXd y(units, periods);
    Eigen::MatrixXd z(units, periods);
    for (int i = 0; i < units; ++i) {
        double level = 20.0 * unif(rng);
        double slope = 1.0 + 0.5 * unif(rng);
        double zi = 2.0 + unif(rng);
        for (int t = 0; t < periods; ++t) {
            y(i, t) = level + slope * t + 0.4 * unif(rng);
            z(i, t) = zi;
        }
    }
    PanelData panel;
    for (int i = 0; i < units; ++i) panel.unit_ids.push_back("unit" + std::to_string(i));
    for (int t = 0; t < periods; ++t) panel.time_points.push_back(t + 1.0);
    panel.outcomes = y;
    panel.covariate_names = {"z"};
    panel.covariates = {z};
    panel.check_consistent();
    return panel;
}

// ---------------------------------------------------------------------------

bool criterion_1() {
    auto start = std::chrono::steady_clock::now();
    ExampleReport report = reproduce_examples(1e-12);
    Check check;
    check.expect(report.all_pass, "library example claims failed");
    for (const auto& c : report.claims) {
        check.expect(c.pass, c.name + " expected " + fmt(c.expected) + " got " + fmt(c.actual));
    }
#ifdef SCT_CLI_PATH
    std::string cmd = std::string("\"") + SCT_CLI_PATH + "\" bias-lab --reproduce-examples";
#ifdef _WIN32
    cmd += " > NUL";
#else
    cmd += " > /dev/null";
#endif
    check.expect(std::system(cmd.c_str()) == 0, "CLI reproduce-examples run failed");
#endif
    double secs = elapsed_seconds(start);
    check.expect(secs < 1.0, "runtime " + fmt(secs) + "s >= 1s");
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 1: worked-example suite, tolerance 1e-12, < 1s (" << fmt(secs)
              << "s)" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_2() {
    auto start = std::chrono::steady_clock::now();
    PanelData panel = load_panel_file(kDataDir + "/smoking.csv");
    StudyDesign design = with_default_split(panel, {"California", 1988.0, 0, 0});
    DesignIndices idx = resolve_design(panel, design);
    PredictorMatrices m = build_predictor_matrices(panel, design, idx.pre, false);

    const std::vector<std::pair<std::string, double>> expected = {
        {"cigsale", 117.66}, {"lnincome", 10.02}, {"beer", 24.45},
        {"age15to24", 0.18}, {"retprice", 63.82}};
    Check check;
    for (const auto& [name, value] : expected) {
        bool found = false;
        for (int v = 0; v < m.x1.size(); ++v) {
            if (m.variable_names[v] != name) continue;
            found = true;
            check.expect(std::abs(m.x1(v) - value) < 0.01,
                         name + " mean " + fmt(m.x1(v)) + " vs " + fmt(value));
        }
        check.expect(found, "variable " + name + " missing");
    }
    double secs = elapsed_seconds(start);
    check.expect(secs < 1.0, "runtime " + fmt(secs) + "s >= 1s");
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 2: treated predictor means within 0.01, < 1s (" << fmt(secs)
              << "s)" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_3() {
    auto start = std::chrono::steady_clock::now();
    PanelData panel = load_panel_file(kDataDir + "/smoking.csv");
    // Split and seed pinned: the published synthetic column reflects a fit
    // whose final weights see most of the pre-period, so the validation
    // (refit) window is kept short.
    StudyDesign design{"California", 1988.0, 13, 5};
    SearchConfig config;
    config.seed = 1;
    FittedSyntheticControl fitted = fit(panel, design, EstimatorKind::SC, config);

    DesignIndices idx = resolve_design(panel, design);
    PredictorMatrices m = build_predictor_matrices(panel, design, idx.pre, false);
    BalanceTable table = balance_table(fitted, m, false);

    const std::vector<std::pair<std::string, double>> expected = {
        {"cigsale", 117.67}, {"lnincome", 9.71}, {"beer", 22.55},
        {"age15to24", 0.19}, {"retprice", 61.11}};
    Check check;
    for (const auto& [name, value] : expected) {
        bool found = false;
        for (const auto& row : table.rows) {
            if (row.variable != name) continue;
            found = true;
            double rel = std::abs(row.synthetic_value - value) / std::abs(value);
            check.expect(rel < 0.05, name + " synthetic " + fmt(row.synthetic_value) + " vs " +
                                         fmt(value) + " (rel " + fmt(rel) + ")");
        }
        check.expect(found, "variable " + name + " missing");
    }
    double secs = elapsed_seconds(start);
    check.expect(secs < 60.0, "runtime " + fmt(secs) + "s >= 60s");
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 3: synthetic predictor column within 5 percent, < 60s ("
              << fmt(secs) << "s)" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

struct Table2Row {
    EstimatorKind kind;
    double pre, post;
};

bool criterion_4() {
    struct Dataset {
        std::string file, treated;
        double t0;
        int train_len, valid_len;  // pre-period split, pinned per dataset
        std::uint64_t seed;
        int v_candidates;
        std::vector<Table2Row> reference;
    };
    const std::vector<Dataset> datasets = {
        {"basque.csv", "Basque Country (Pais Vasco)", 1970.0, 12, 3, 47, 50,
         {{EstimatorKind::DSC, 0.18, 0.42},
          {EstimatorKind::DSC_PEN, 0.17, 0.36},
          {EstimatorKind::SC, 0.37, 0.61},
          {EstimatorKind::SC_PEN, 0.32, 0.52}}},
        {"germany.csv", "West Germany", 1990.0, 14, 16, 12, 200,
         {{EstimatorKind::DSC, 357.76, 1642.52},
          {EstimatorKind::DSC_PEN, 374.51, 1747.07},
          {EstimatorKind::SC, 642.60, 1934.76},
          {EstimatorKind::SC_PEN, 566.66, 1841.99}}},
        {"smoking.csv", "California", 1989.0, 3, 16, 3, 50,
         {{EstimatorKind::DSC, 6.66, 15.21},
          {EstimatorKind::DSC_PEN, 6.02, 12.90},
          {EstimatorKind::SC, 8.83, 13.76},
          {EstimatorKind::SC_PEN, 8.15, 13.16}}}};
    const std::vector<EstimatorKind> kinds = {EstimatorKind::SC, EstimatorKind::SC_PEN,
                                              EstimatorKind::DSC, EstimatorKind::DSC_PEN};

    Check check;
    std::ostringstream timing;
    for (const auto& ds : datasets) {
        auto start = std::chrono::steady_clock::now();
        PanelData panel = load_panel_file(kDataDir + "/" + ds.file);
        StudyDesign design{ds.treated, ds.t0, ds.train_len, ds.valid_len};
        SearchConfig config;
        config.seed = ds.seed;
        config.v_candidates = ds.v_candidates;
        EvaluationReport report = leave_one_out_eval(panel, design, kinds, config);
        double secs = elapsed_seconds(start);
        timing << " " << ds.file << "=" << fmt(secs) << "s";
        check.expect(secs < 600.0, ds.file + " runtime " + fmt(secs) + "s >= 600s");
        check.expect(report.failures.empty(),
                     ds.file + " had " + std::to_string(report.failures.size()) + " failures");

        auto mean_of = [&](EstimatorKind kind, bool post) {
            for (const auto& s : report.summaries) {
                if (s.kind == kind) return post ? s.mean_post_rmspe : s.mean_pre_rmspe;
            }
            return -1.0;
        };
        if (ds.file == "basque.csv") {
            for (EstimatorKind diffed : {EstimatorKind::DSC, EstimatorKind::DSC_PEN}) {
                for (EstimatorKind level : {EstimatorKind::SC, EstimatorKind::SC_PEN}) {
                    check.expect(mean_of(diffed, false) < mean_of(level, false),
                                 "basque pre " + kind_name(diffed) + "=" +
                                     fmt(mean_of(diffed, false)) + " !< " + kind_name(level) +
                                     "=" + fmt(mean_of(level, false)));
                }
            }
        }
        check.expect(mean_of(EstimatorKind::SC_PEN, false) < mean_of(EstimatorKind::SC, false),
                     ds.file + " pre sc_pen=" + fmt(mean_of(EstimatorKind::SC_PEN, false)) +
                         " !< sc=" + fmt(mean_of(EstimatorKind::SC, false)));
        check.expect(mean_of(EstimatorKind::SC_PEN, true) < mean_of(EstimatorKind::SC, true),
                     ds.file + " post sc_pen=" + fmt(mean_of(EstimatorKind::SC_PEN, true)) +
                         " !< sc=" + fmt(mean_of(EstimatorKind::SC, true)));
        for (const auto& ref : ds.reference) {
            double pre = mean_of(ref.kind, false);
            double post = mean_of(ref.kind, true);
            check.expect(std::abs(pre - ref.pre) <= 0.30 * ref.pre,
                         ds.file + " " + kind_name(ref.kind) + " pre " + fmt(pre) +
                             " outside 30 percent of " + fmt(ref.pre));
            check.expect(std::abs(post - ref.post) <= 0.30 * ref.post,
                         ds.file + " " + kind_name(ref.kind) + " post " + fmt(post) +
                             " outside 30 percent of " + fmt(ref.post));
        }
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 4: leave-one-out orderings and 30 percent bands (" << timing.str()
              << " )" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_5() {
    Check check;
    double worst = 0;
    for (int seed = 0; seed < 100; ++seed) {
        GeneratedPanel gp = linear_hull_panel(seed);
        StudyDesign design = with_default_split(gp.panel, {"unit0", 13.0, 0, 0});
        SearchConfig config;
        config.v_candidates = 20;
        config.seed = seed;
        FittedSyntheticControl fitted = fit(gp.panel, design, EstimatorKind::SC, config);
        double max_effect = fitted.effects.lpNorm<Eigen::Infinity>();
        worst = std::max(worst, max_effect);
        check.expect(max_effect < 1e-6,
                     "seed " + std::to_string(seed) + " max effect " + fmt(max_effect));
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 5: linear noiseless panels, max effect < 1e-6 over 100 seeds "
                 "(worst "
              << fmt(worst) << ")" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_6() {
    Check check;
    double worst = 0;
    for (int seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(900 + seed);
        std::uniform_real_distribution<double> unif(0.3, 2.7);
        const int donors = 3 + static_cast<int>(rng() % 5);
        const int k = 1 + static_cast<int>(rng() % 3);
        Eigen::MatrixXd donor_z(k, donors);
        for (int v = 0; v < k; ++v)
            for (int j = 0; j < donors; ++j) donor_z(v, j) = unif(rng);
        std::exponential_distribution<double> exp1(1.0);
        Eigen::VectorXd w(donors);
        for (int j = 0; j < donors; ++j) w(j) = exp1(rng);
        w /= w.sum();

        GenerativeSpec spec;
        spec.n_units = donors + 1;
        spec.n_periods = 2;
        spec.n_covariates = k;
        spec.link = Link::power(2);
        spec.common_trend = {3.0, -1.0};
        Eigen::MatrixXd z(donors + 1, k);
        z.row(0) = (donor_z * w).transpose();  // exact covariate match
        z.bottomRows(donors) = donor_z.transpose();
        spec.fixed_z = z;
        GeneratedPanel gp = generate_panel(spec);

        double synth = 0;
        for (int j = 0; j < donors; ++j) synth += w(j) * gp.panel.outcomes(j + 1, 0);
        double realized = std::abs(gp.panel.outcomes(0, 0) - synth);
        double bound = bias_lower_bound(w, z.row(0).transpose(), donor_z, spec.link);
        double gap = std::abs(realized - bound);
        worst = std::max(worst, gap);
        check.expect(gap < 1e-9, "seed " + std::to_string(seed) + " |realized-bound| = " + fmt(gap));
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 6: quadratic-link mismatch equals the bias bound within 1e-9 "
                 "(worst gap "
              << fmt(worst) << ")" << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_7() {
    Check check;
    for (int seed = 0; seed < 50 && check.ok; ++seed) {
        PanelData panel = trending_panel(100 + seed);
        StudyDesign design = with_default_split(panel, {"unit0", 11.0, 0, 0});
        SearchConfig config;
        config.v_candidates = 10;
        config.seed = seed;
        for (EstimatorKind kind : {EstimatorKind::DSC, EstimatorKind::DSC_PEN}) {
            FittedSyntheticControl base = fit(panel, design, kind, config);
            for (double c : {1.0, -1.0, 100.0, -100.0}) {
                PanelData shifted = panel;
                shifted.outcomes.row(0).array() += c;
                FittedSyntheticControl moved = fit(shifted, design, kind, config);
                double effect_gap = (moved.effects - base.effects).lpNorm<Eigen::Infinity>();
                double alpha_gap = std::abs((moved.alpha - base.alpha) + c);
                check.expect(effect_gap < 1e-9, "seed " + std::to_string(seed) + " " +
                                                    kind_name(kind) + " c=" + fmt(c) +
                                                    " effect gap " + fmt(effect_gap));
                check.expect(alpha_gap < 1e-9, "seed " + std::to_string(seed) + " " +
                                                   kind_name(kind) + " c=" + fmt(c) +
                                                   " alpha gap " + fmt(alpha_gap));
            }
        }
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 7: treated-series shifts move alpha only (50 seeds, c in {1, "
                 "-1, 100, -100})"
              << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_8() {
    Check check;
    SearchConfig defaults;
    for (int seed = 0; seed < 50; ++seed) {
        PanelData panel = trending_panel(300 + seed);
        StudyDesign design = with_default_split(panel, {"unit0", 11.0, 0, 0});
        DesignIndices idx = resolve_design(panel, design);
        Eigen::VectorXd v_uniform =
            Eigen::VectorXd::Constant(panel.n_variables(), 1.0 / panel.n_variables());
        double previous = 0;
        bool first = true;
        for (double lambda : defaults.lambda_grid) {
            InnerObjective obj = make_inner_objective(panel, design, idx.validation,
                                                      EstimatorKind::DSC_PEN, v_uniform, lambda);
            Eigen::VectorXd w = solve_weights(obj);
            double discrepancy = obj.penalty_costs().dot(w);
            if (!first) {
                check.expect(discrepancy <= previous + 1e-8,
                             "seed " + std::to_string(seed) + " lambda " + fmt(lambda) +
                                 " discrepancy rose " + fmt(previous) + " -> " +
                                 fmt(discrepancy));
            }
            previous = discrepancy;
            first = false;
        }
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 8: pairwise discrepancy non-increasing along the lambda grid "
                 "(50 seeds)"
              << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_9() {
    Check check;
    const std::vector<EstimatorKind> kinds = {EstimatorKind::SC, EstimatorKind::SC_PEN,
                                              EstimatorKind::DSC, EstimatorKind::DSC_PEN};
    for (int seed = 0; seed < 20; ++seed) {
        PanelData panel = trending_panel(500 + seed);
        StudyDesign design = with_default_split(panel, {"unit0", 11.0, 0, 0});
        SearchConfig config;
        config.v_candidates = 10;
        config.seed = seed;
        for (EstimatorKind kind : kinds) {
            FittedSyntheticControl a = fit(panel, design, kind, config);
            check.expect(a.w.minCoeff() >= -1e-9, "negative weight at seed " +
                                                      std::to_string(seed) + " " +
                                                      kind_name(kind));
            check.expect(std::abs(a.w.sum() - 1.0) < 1e-9,
                         "weights sum " + fmt(a.w.sum()) + " at seed " + std::to_string(seed));
            FittedSyntheticControl b = fit(panel, design, kind, config);
            bool identical = (a.w - b.w).lpNorm<Eigen::Infinity>() == 0.0 &&
                             (a.v_diag - b.v_diag).lpNorm<Eigen::Infinity>() == 0.0 &&
                             a.lambda == b.lambda && a.alpha == b.alpha &&
                             (a.counterfactual - b.counterfactual).lpNorm<Eigen::Infinity>() ==
                                 0.0;
            check.expect(identical, "rerun differs at seed " + std::to_string(seed) + " " +
                                        kind_name(kind));
        }
    }
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 9: simplex constraints within 1e-9 and bit-identical reruns"
              << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

bool criterion_10() {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    const int units = 9, periods = 12;
    Eigen::MatrixXd y(units, periods);
    for (int i = 0; i < units; ++i) {
        double level = 3.0 * unif(rng);
        for (int t = 0; t < periods; ++t) y(i, t) = level + t + 0.05 * unif(rng);
    }
    for (int t = 8; t < periods; ++t) y(0, t) += 50.0;  // dominant treated jump

    PanelData panel;
    for (int i = 0; i < units; ++i) panel.unit_ids.push_back("unit" + std::to_string(i));
    for (int t = 0; t < periods; ++t) panel.time_points.push_back(t + 1.0);
    panel.outcomes = y;
    panel.check_consistent();

    StudyDesign design = with_default_split(panel, {"unit0", 9.0, 0, 0});
    SearchConfig config;
    config.v_candidates = 1;
    PlaceboStudy study = in_space_placebos(panel, design, EstimatorKind::SC, config);

    Check check;
    check.expect(study.failures.empty(), "placebo failures");
    for (double r : study.placebo_ratios) {
        check.expect(study.treated_ratio > r, "treated ratio not dominant");
    }
    check.expect(study.p_value == 1.0 / units,
                 "p_value " + fmt(study.p_value) + " != 1/" + std::to_string(units));
    std::cout << (check.ok ? "PASS" : "FAIL")
              << " criterion 10: dominant-effect placebo study gives p = 1/(N+1) exactly"
              << (check.ok ? "" : " [" + check.detail.str() + "]") << "\n";
    return check.ok;
}

}  // namespace

int main(int argc, char** argv) {
    int which = 0;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            which = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    const std::vector<std::function<bool()>> criteria = {
        criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
        criterion_6, criterion_7, criterion_8, criterion_9, criterion_10};
    if (which < 0 || which > static_cast<int>(criteria.size())) {
        std::cerr << "unknown criterion " << which << "\n";
        return 2;
    }
    bool ok = true;
    try {
        if (which == 0) {
            for (const auto& criterion : criteria) ok = criterion() && ok;
        } else {
            ok = criteria[which - 1]();
        }
    } catch (const std::exception& e) {
        std::cout << "FAIL criterion " << (which == 0 ? std::string("suite") : std::to_string(which))
                  << ": exception: " << e.what() << "\n";
        return 1;
    }
    return ok ? 0 : 1;
}
