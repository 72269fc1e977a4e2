#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include "sct/errors.hpp"

namespace sct {

// Half-open range of indices into PanelData::time_points.
struct TimeWindow {
    int begin = 0;
    int end = 0;  // exclusive

    int length() const { return end - begin; }
};

/// Balanced long panel: units x times x (outcome + covariates).
/// Immutable after construction; all member functions are const.
struct PanelData {
    std::vector<std::string> unit_ids;         // length J+1, unique
    std::vector<double> time_points;           // length T, strictly increasing
    std::string outcome_name = "outcome";
    Eigen::MatrixXd outcomes;                  // (J+1) x T
    std::vector<std::string> covariate_names;  // length k-1, column order preserved
    std::vector<Eigen::MatrixXd> covariates;   // each (J+1) x T

    int n_units() const { return static_cast<int>(unit_ids.size()); }
    int n_periods() const { return static_cast<int>(time_points.size()); }
    // Number of predictors k; the outcome always counts as one.
    int n_variables() const { return 1 + static_cast<int>(covariate_names.size()); }

    int unit_index(const std::string& unit) const;  // throws UnknownUnit
    int time_index(double time) const;              // throws InvalidDesign if absent

    // Variable v = 0 is the outcome, v >= 1 the covariates in column order.
    const Eigen::MatrixXd& variable(int v) const;
    const std::string& variable_name(int v) const;

    PanelData without_unit(const std::string& unit) const;
    // Keeps only periods strictly before `time`.
    PanelData restrict_times_before(double time) const;

    void check_consistent() const;
};

/// Treated unit, intervention time and the S/L pre-period split.
/// The validation window is the L periods directly preceding T0; the training
/// window is the S periods directly preceding the validation window.
struct StudyDesign {
    std::string treated_unit;
    double t0 = 0;      // intervention time label; post-period is t >= t0
    int train_len = 0;  // S
    int valid_len = 0;  // L
};

struct DesignIndices {
    int treated = 0;      // row of the treated unit
    int t0_index = 0;     // index of t0 in time_points
    int n_pre = 0;        // periods strictly before t0
    TimeWindow training;  // S periods
    TimeWindow validation;  // L periods, ends at t0_index
    TimeWindow pre;       // the full pre-period [0, t0_index)
    TimeWindow post;      // [t0_index, T)
};

// Validates the design against the panel and resolves windows.
DesignIndices resolve_design(const PanelData& panel, const StudyDesign& design);

// Fills in S and L when the caller left them zero: L = ceil(pre/2), S = pre - L.
StudyDesign with_default_split(const PanelData& panel, StudyDesign design);

/// X1 (treated column) and X0 (donor columns) of pre-window predictor
/// averages, or averages of first differences when differenced.
struct PredictorMatrices {
    Eigen::VectorXd x1;                       // length k
    Eigen::MatrixXd x0;                       // k x J
    std::vector<std::string> variable_names;  // length k
    std::vector<std::string> donor_ids;       // length J, column order of x0
    TimeWindow window;
    bool differenced = false;
};

PredictorMatrices build_predictor_matrices(const PanelData& panel, const StudyDesign& design,
                                           TimeWindow window, bool differenced);

// output[t] = series[t+1] - series[t]; throws SeriesTooShort if length < 2.
Eigen::VectorXd first_difference(const Eigen::VectorXd& series);

// Long-format delimited text, comma separated, header row:
// unit,time,outcome,<covariate...>. The only ingestion format.
PanelData load_panel(std::istream& in);
PanelData load_panel_file(const std::string& path);
void save_panel(std::ostream& out, const PanelData& panel);

}  // namespace sct
