#pragma once

#include <string>
#include <vector>

#include "sct/estimators.hpp"

namespace sct {

/// In-space placebo study: the chosen estimator refit with every donor as
/// pseudo-treated. Each placebo donor pool excludes both the true treated
/// unit and the pseudo-treated unit itself.
struct PlaceboStudy {
    FittedSyntheticControl treated_fit;
    std::vector<std::string> placebo_units;              // donor order
    std::vector<FittedSyntheticControl> placebo_fits;    // aligned with placebo_units
    std::vector<double> placebo_ratios;                  // aligned with placebo_units
    double treated_ratio = 0;
    double p_value = 0;  // normalized rank, ties counted as >=
    std::vector<std::string> failures;  // "unit: error", fits that did not complete
};

// post_rmspe / max(pre_rmspe, 1e-12).
double rmspe_ratio(const FittedSyntheticControl& fitted);
bool rmspe_ratio_degenerate(const FittedSyntheticControl& fitted);

PlaceboStudy in_space_placebos(const PanelData& panel, const StudyDesign& design,
                               EstimatorKind kind, const SearchConfig& config);

// Refit with the intervention reassigned to placebo_t0, restricting the data
// to periods strictly before the true T0. The S/L split is recomputed on the
// shortened pre-period (L = ceil(pre/2)).
FittedSyntheticControl in_time_placebo(const PanelData& panel, const StudyDesign& design,
                                       double placebo_t0, EstimatorKind kind,
                                       const SearchConfig& config);

}  // namespace sct
