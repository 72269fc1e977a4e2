#include "sct/inference.hpp"

#include <algorithm>
#include <cmath>

namespace sct {

namespace {
constexpr double kRatioFloor = 1e-12;
}

double rmspe_ratio(const FittedSyntheticControl& fitted) {
    return fitted.post_rmspe / std::max(fitted.pre_rmspe, kRatioFloor);
}

bool rmspe_ratio_degenerate(const FittedSyntheticControl& fitted) {
    return fitted.pre_rmspe < kRatioFloor;
}

PlaceboStudy in_space_placebos(const PanelData& panel, const StudyDesign& design,
                               EstimatorKind kind, const SearchConfig& config) {
    if (panel.n_units() < 3) {
        throw InvalidDesign("in-space placebos need at least 2 donors");
    }
    PlaceboStudy study;
    study.treated_fit = fit(panel, design, kind, config);
    study.treated_ratio = rmspe_ratio(study.treated_fit);

    // Placebo fits never see the true treated unit: its post-period embeds the
    // treatment.
    PanelData untreated_only = panel.without_unit(design.treated_unit);
    for (const std::string& unit : untreated_only.unit_ids) {
        StudyDesign placebo_design = design;
        placebo_design.treated_unit = unit;
        try {
            FittedSyntheticControl placebo = fit(untreated_only, placebo_design, kind, config);
            study.placebo_units.push_back(unit);
            study.placebo_ratios.push_back(rmspe_ratio(placebo));
            study.placebo_fits.push_back(std::move(placebo));
        } catch (const Error& e) {
            study.failures.push_back(unit + ": " + e.what());
        }
    }

    // Normalized rank of the treated ratio among all ratios, treated included.
    int at_least = 1;
    for (double r : study.placebo_ratios) {
        if (r >= study.treated_ratio) ++at_least;
    }
    study.p_value = static_cast<double>(at_least) /
                    static_cast<double>(study.placebo_ratios.size() + 1);
    return study;
}

FittedSyntheticControl in_time_placebo(const PanelData& panel, const StudyDesign& design,
                                       double placebo_t0, EstimatorKind kind,
                                       const SearchConfig& config) {
    if (!(placebo_t0 < design.t0)) {
        throw InsufficientPrePeriods("placebo T0 must be strictly before the true T0");
    }
    // No real treatment may contaminate the pseudo-post window.
    PanelData truncated = panel.restrict_times_before(design.t0);
    StudyDesign placebo_design;
    placebo_design.treated_unit = design.treated_unit;
    placebo_design.t0 = placebo_t0;
    int t0_index;
    try {
        t0_index = truncated.time_index(placebo_t0);
    } catch (const InvalidDesign&) {
        throw InsufficientPrePeriods("placebo T0 is not a pre-treatment time point");
    }
    if (t0_index < 2) {
        throw InsufficientPrePeriods("placebo T0 must leave at least 2 pre-periods before it");
    }
    placebo_design = with_default_split(truncated, placebo_design);
    if (is_differenced(kind) &&
        (placebo_design.train_len < 2 || placebo_design.valid_len < 2)) {
        throw InsufficientPrePeriods(
            "placebo pre-period is too short for a differenced estimator");
    }
    return fit(truncated, placebo_design, kind, config);
}

}  // namespace sct
