#include "sct/estimators.hpp"

#include <cmath>
#include <limits>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sct {

bool is_differenced(EstimatorKind kind) {
    return kind == EstimatorKind::DSC || kind == EstimatorKind::DSC_PEN;
}

bool is_penalized(EstimatorKind kind) {
    return kind == EstimatorKind::SC_PEN || kind == EstimatorKind::DSC_PEN;
}

std::string kind_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::SC: return "sc";
        case EstimatorKind::SC_PEN: return "sc_pen";
        case EstimatorKind::DSC: return "dsc";
        case EstimatorKind::DSC_PEN: return "dsc_pen";
    }
    return "unknown";
}

EstimatorKind kind_from_name(const std::string& name) {
    if (name == "sc") return EstimatorKind::SC;
    if (name == "sc_pen") return EstimatorKind::SC_PEN;
    if (name == "dsc") return EstimatorKind::DSC;
    if (name == "dsc_pen") return EstimatorKind::DSC_PEN;
    throw Error("unknown estimator kind '" + name + "' (expected sc|sc_pen|dsc|dsc_pen)");
}

namespace {

// Uniform double in [0,1) from the top 53 bits, independent of the standard
// library's distribution implementations.
double next_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Donor outcome rows in column order of the weight vector.
Eigen::MatrixXd donor_outcomes(const PanelData& panel, int treated_row) {
    Eigen::MatrixXd out(panel.n_units() - 1, panel.n_periods());
    int r = 0;
    for (int i = 0; i < panel.n_units(); ++i) {
        if (i == treated_row) continue;
        out.row(r++) = panel.outcomes.row(i);
    }
    return out;
}

struct StandardizedBlocks {
    Eigen::VectorXd fit_x1;
    Eigen::MatrixXd fit_x0;
    Eigen::VectorXd pen_x1;
    Eigen::MatrixXd pen_x0;
};

// Divides each predictor row by the donor-pool standard deviation of the fit
// block, so V weights are scale-free. The penalty block gets the same factors.
//
// For differenced kinds the penalty discrepancies are measured on the same
// differenced scale as the fit block: a level penalty would depend on the
// constant offset the estimator is designed to absorb, breaking shift
// invariance of the effect series.
StandardizedBlocks make_blocks(const PanelData& panel, const StudyDesign& design,
                               TimeWindow window, bool differenced) {
    PredictorMatrices fit = build_predictor_matrices(panel, design, window, differenced);
    PredictorMatrices pen = build_predictor_matrices(panel, design, window, differenced);
    const int k = static_cast<int>(fit.x1.size());
    const int j = static_cast<int>(fit.x0.cols());
    StandardizedBlocks out{fit.x1, fit.x0, pen.x1, pen.x0};
    for (int v = 0; v < k; ++v) {
        double scale = 1.0;
        if (j > 1) {
            double mean = fit.x0.row(v).mean();
            double var = (fit.x0.row(v).array() - mean).square().sum() / (j - 1);
            double sd = std::sqrt(var);
            if (sd > 1e-12) scale = sd;
        }
        out.fit_x1(v) /= scale;
        out.fit_x0.row(v) /= scale;
        out.pen_x1(v) /= scale;
        out.pen_x0.row(v) /= scale;
    }
    return out;
}

InnerObjective assemble(const StandardizedBlocks& blocks, const Eigen::VectorXd& v_diag,
                        double lambda) {
    InnerObjective obj;
    obj.fit_x1 = blocks.fit_x1;
    obj.fit_x0 = blocks.fit_x0;
    obj.pen_x1 = blocks.pen_x1;
    obj.pen_x0 = blocks.pen_x0;
    obj.v_diag = v_diag;
    obj.lambda = lambda;
    return obj;
}

}  // namespace

std::vector<Eigen::VectorXd> sample_v_candidates(int k, int count, std::uint64_t seed) {
    if (k < 1 || count < 1) {
        throw Error("v candidate sampling needs k >= 1 and count >= 1");
    }
    std::vector<Eigen::VectorXd> out;
    out.push_back(Eigen::VectorXd::Constant(k, 1.0 / k));
    std::mt19937_64 rng(seed);
    while (static_cast<int>(out.size()) < count) {
        // Exponential spacings normalized to the simplex (Dirichlet(1,...,1)).
        Eigen::VectorXd v(k);
        for (int i = 0; i < k; ++i) {
            v(i) = -std::log1p(-next_uniform(rng));
        }
        double total = v.sum();
        if (total <= 0) continue;
        out.push_back(v / total);
    }
    return out;
}

InnerObjective make_inner_objective(const PanelData& panel, const StudyDesign& design,
                                    TimeWindow window, EstimatorKind kind,
                                    const Eigen::VectorXd& v_diag, double lambda) {
    return assemble(make_blocks(panel, design, window, is_differenced(kind)), v_diag, lambda);
}

double validation_mspe(const PanelData& panel, const StudyDesign& design,
                       const Eigen::VectorXd& w, bool differenced) {
    if (design.valid_len < 1) {
        throw EmptyValidationWindow("validation window is empty");
    }
    DesignIndices idx = resolve_design(panel, design);
    if (w.size() != panel.n_units() - 1) {
        throw DimensionMismatch("weight vector length does not match donor count");
    }
    Eigen::MatrixXd donors = donor_outcomes(panel, idx.treated);
    double acc = 0;
    for (int t = idx.validation.begin; t < idx.validation.end; ++t) {
        double gap;
        if (differenced) {
            double treated_diff =
                panel.outcomes(idx.treated, t) - panel.outcomes(idx.treated, t - 1);
            double synth_diff = w.dot(donors.col(t) - donors.col(t - 1));
            gap = treated_diff - synth_diff;
        } else {
            gap = panel.outcomes(idx.treated, t) - w.dot(donors.col(t));
        }
        acc += gap * gap;
    }
    return acc / idx.validation.length();
}

HyperParams select_hyperparameters(const PanelData& panel, const StudyDesign& design,
                                   EstimatorKind kind, const SearchConfig& config) {
    DesignIndices idx = resolve_design(panel, design);
    if (is_differenced(kind) && design.train_len < 2) {
        throw WindowTooShortForDifferencing("differenced estimators need a training window of >= 2 periods");
    }
    if (config.lambda_grid.empty()) {
        throw Error("lambda grid must be nonempty");
    }

    StandardizedBlocks blocks = make_blocks(panel, design, idx.training, is_differenced(kind));
    std::vector<Eigen::VectorXd> v_candidates =
        sample_v_candidates(panel.n_variables(), config.v_candidates, config.seed);
    std::vector<double> lambdas =
        is_penalized(kind) ? config.lambda_grid : std::vector<double>{0.0};

    const int n_cells = static_cast<int>(v_candidates.size() * lambdas.size());
    std::vector<double> mspes(n_cells, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::string> failures(n_cells);

    SolveOptions solve_opts{config.tol, config.max_iters};
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int cell = 0; cell < n_cells; ++cell) {
        const int vi = cell / static_cast<int>(lambdas.size());
        const int li = cell % static_cast<int>(lambdas.size());
        try {
            Eigen::VectorXd w =
                solve_weights(assemble(blocks, v_candidates[vi], lambdas[li]), solve_opts);
            mspes[cell] = validation_mspe(panel, design, w, is_differenced(kind));
        } catch (const Error& e) {
            failures[cell] = e.what();
        }
    }
    for (int cell = 0; cell < n_cells; ++cell) {
        if (!failures[cell].empty()) {
            throw DidNotConverge("hyperparameter cell failed: " + failures[cell]);
        }
    }

    // Grid order is (V index, then lambda ascending); ties within 1e-12 keep
    // the smallest lambda, then the earliest-sampled V.
    constexpr double kTieTol = 1e-12;
    int best_cell = 0;
    for (int cell = 1; cell < n_cells; ++cell) {
        if (mspes[cell] < mspes[best_cell] - kTieTol) {
            best_cell = cell;
        } else if (mspes[cell] <= mspes[best_cell] + kTieTol) {
            const int li = cell % static_cast<int>(lambdas.size());
            const int best_li = best_cell % static_cast<int>(lambdas.size());
            if (lambdas[li] < lambdas[best_li]) best_cell = cell;
        }
    }

    HyperParams hp;
    hp.v_index = best_cell / static_cast<int>(lambdas.size());
    hp.v_diag = v_candidates[hp.v_index];
    hp.lambda = lambdas[best_cell % static_cast<int>(lambdas.size())];
    hp.validation_mspe = mspes[best_cell];
    return hp;
}

double compute_alpha(const PanelData& panel, const StudyDesign& design, const Eigen::VectorXd& w) {
    if (design.valid_len < 1) {
        throw EmptyWindow("alpha window is empty");
    }
    DesignIndices idx = resolve_design(panel, design);
    if (w.size() != panel.n_units() - 1) {
        throw DimensionMismatch("weight vector length does not match donor count");
    }
    Eigen::MatrixXd donors = donor_outcomes(panel, idx.treated);
    double acc = 0;
    for (int t = idx.validation.begin; t < idx.validation.end; ++t) {
        acc += w.dot(donors.col(t)) - panel.outcomes(idx.treated, t);
    }
    return acc / idx.validation.length();
}

namespace {

double window_rmspe(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted,
                    TimeWindow window) {
    double acc = 0;
    for (int t = window.begin; t < window.end; ++t) {
        double d = observed(t) - predicted(t);
        acc += d * d;
    }
    return std::sqrt(acc / window.length());
}

}  // namespace

FittedSyntheticControl fit(const PanelData& panel, const StudyDesign& design, EstimatorKind kind,
                           const SearchConfig& config) {
    panel.check_consistent();
    if (panel.n_units() < 2) {
        throw InvalidDesign("fitting requires at least one donor unit");
    }
    DesignIndices idx = resolve_design(panel, design);
    HyperParams hp = select_hyperparameters(panel, design, kind, config);

    // Step-4 refit: matrices rebuilt on the validation window.
    InnerObjective final_obj =
        make_inner_objective(panel, design, idx.validation, kind, hp.v_diag, hp.lambda);
    SolveOptions solve_opts{config.tol, config.max_iters};
    Eigen::VectorXd w = solve_weights(final_obj, solve_opts);

    FittedSyntheticControl fitted;
    fitted.kind = kind;
    fitted.w = w;
    fitted.v_diag = hp.v_diag;
    fitted.lambda = hp.lambda;
    fitted.design = design;
    fitted.alpha = is_differenced(kind) ? compute_alpha(panel, design, w) : 0.0;
    for (int i = 0; i < panel.n_units(); ++i) {
        if (i != idx.treated) fitted.donor_ids.push_back(panel.unit_ids[i]);
    }
    for (int v = 0; v < panel.n_variables(); ++v) {
        fitted.variable_names.push_back(panel.variable_name(v));
    }

    Eigen::MatrixXd donors = donor_outcomes(panel, idx.treated);
    fitted.counterfactual = (donors.transpose() * w).array() - fitted.alpha;
    Eigen::VectorXd treated = panel.outcomes.row(idx.treated).transpose();
    fitted.effects = treated.segment(idx.post.begin, idx.post.length()) -
                     fitted.counterfactual.segment(idx.post.begin, idx.post.length());
    fitted.pre_rmspe = window_rmspe(treated, fitted.counterfactual, idx.pre);
    fitted.valid_rmspe = window_rmspe(treated, fitted.counterfactual, idx.validation);
    fitted.post_rmspe = window_rmspe(treated, fitted.counterfactual, idx.post);
    return fitted;
}

Eigen::VectorXd effect_series(const FittedSyntheticControl& fitted, const PanelData& panel) {
    DesignIndices idx = resolve_design(panel, fitted.design);
    if (fitted.counterfactual.size() != panel.n_periods()) {
        throw DimensionMismatch("fitted counterfactual does not match the panel's period count");
    }
    Eigen::VectorXd treated = panel.outcomes.row(idx.treated).transpose();
    return treated.segment(idx.post.begin, idx.post.length()) -
           fitted.counterfactual.segment(idx.post.begin, idx.post.length());
}

}  // namespace sct
