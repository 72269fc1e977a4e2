#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sct/panel.hpp"
#include "sct/simplex_qp.hpp"

namespace sct {

/// SC and DSC force lambda = 0. DSC and DSC_PEN fit on first differences and
/// estimate a constant offset alpha; SC and SC_PEN fit on levels with alpha
/// fixed at 0.
enum class EstimatorKind { SC, SC_PEN, DSC, DSC_PEN };

bool is_differenced(EstimatorKind kind);
bool is_penalized(EstimatorKind kind);
std::string kind_name(EstimatorKind kind);
EstimatorKind kind_from_name(const std::string& name);

struct SearchConfig {
    std::vector<double> lambda_grid{0, 1e-3, 1e-2, 1e-1, 1, 10, 100};
    int v_candidates = 200;  // sampled importance diagonals, uniform always included
    std::uint64_t seed = 0;
    double tol = 1e-10;
    int max_iters = 100000;
};

struct HyperParams {
    Eigen::VectorXd v_diag;
    double lambda = 0;
    int v_index = 0;  // sampling order of the chosen candidate
    double validation_mspe = 0;
};

struct FittedSyntheticControl {
    EstimatorKind kind = EstimatorKind::SC;
    Eigen::VectorXd w;  // length J, donor order
    Eigen::VectorXd v_diag;
    double lambda = 0;
    double alpha = 0;  // outcome units; exactly 0 for SC/SC_PEN
    StudyDesign design;
    std::vector<std::string> donor_ids;
    std::vector<std::string> variable_names;
    Eigen::VectorXd counterfactual;  // over all T: sum_j w_j Y_jt - alpha
    Eigen::VectorXd effects;         // over post-treatment periods (t >= T0)
    double pre_rmspe = 0;    // over the full pre-period
    double valid_rmspe = 0;  // validation window only
    double post_rmspe = 0;   // over t >= T0
};

// Mean over validation-period indices of the squared gap between the treated
// outcome and the weighted donor outcome, on levels or on per-period first
// differences.
double validation_mspe(const PanelData& panel, const StudyDesign& design,
                       const Eigen::VectorXd& w, bool differenced);

// Exhaustive grid search: lambda grid crossed with seeded simplex-sampled V
// diagonals, weights fit on the training window, scored by validation MSPE.
// Ties (within 1e-12) resolve to the smallest lambda, then earliest V.
HyperParams select_hyperparameters(const PanelData& panel, const StudyDesign& design,
                                   EstimatorKind kind, const SearchConfig& config);

// Full procedure: hyperparameter selection, refit on the validation window,
// alpha for differenced kinds, counterfactual and effect paths.
FittedSyntheticControl fit(const PanelData& panel, const StudyDesign& design, EstimatorKind kind,
                           const SearchConfig& config);

// alpha = mean over the validation window of (sum_j w_j Y_jt - Y_1t), so that
// counterfactual = sum_j w_j Y_jt - alpha matches the treated level on average.
double compute_alpha(const PanelData& panel, const StudyDesign& design, const Eigen::VectorXd& w);

// tau_t = Y_treated[t] - counterfactual[t] for each post-treatment period.
Eigen::VectorXd effect_series(const FittedSyntheticControl& fitted, const PanelData& panel);

// Builds the standardized inner objective for one (window, kind) pair: both
// blocks on levels (SC kinds) or first differences (DSC kinds), every
// predictor row divided by its donor-pool standard deviation.
InnerObjective make_inner_objective(const PanelData& panel, const StudyDesign& design,
                                    TimeWindow window, EstimatorKind kind,
                                    const Eigen::VectorXd& v_diag, double lambda);

// V candidates in sampling order: index 0 is the uniform diagonal, the rest
// are seeded draws from the uniform distribution over the simplex.
std::vector<Eigen::VectorXd> sample_v_candidates(int k, int count, std::uint64_t seed);

}  // namespace sct
