#pragma once

#include <string>
#include <vector>

#include "sct/estimators.hpp"

namespace sct {

// Root mean square pointwise difference over the window.
double rmspe(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted,
             TimeWindow window);

// Fraction of donors with weight above the threshold.
double sparsity(const Eigen::VectorXd& w, double threshold);

struct EvalDetail {
    std::string unit;
    EstimatorKind kind = EstimatorKind::SC;
    double pre_rmspe = 0;
    double post_rmspe = 0;
    double sparsity = 0;
};

struct EvalSummary {
    EstimatorKind kind = EstimatorKind::SC;
    double mean_pre_rmspe = 0;
    double mean_post_rmspe = 0;
    double mean_sparsity = 0;
    int n_units = 0;
};

/// Leave-one-out report in the Table 2 shape: one summary row per estimator
/// kind, means over the evaluated pseudo-treated units, plus per-unit detail.
struct EvaluationReport {
    std::vector<EvalDetail> details;
    std::vector<EvalSummary> summaries;
    std::vector<std::string> failures;  // "unit/kind: error"
    StudyDesign base_design;            // pre-period reused for every pseudo study
    double sparsity_threshold = 1e-3;
};

/// Treats each untreated unit as pseudo-treated with the remaining untreated
/// units as donors; the original treated unit is excluded entirely.
EvaluationReport leave_one_out_eval(const PanelData& panel, const StudyDesign& original_design,
                                    const std::vector<EstimatorKind>& kinds,
                                    const SearchConfig& config,
                                    double sparsity_threshold = 1e-3);

std::string render_evaluation_text(const EvaluationReport& report, const std::string& dataset);

}  // namespace sct
