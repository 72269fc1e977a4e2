#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sct/estimators.hpp"
#include "sct/panel.hpp"

namespace sct {

enum class DiscrepancyMetric { Absolute, Squared };

struct BalanceRow {
    std::string variable;
    double treated_value = 0;
    double synthetic_value = 0;
    double wmape = 0;  // weighted sum of absolute pairwise differences
    double importance = 0;
};

/// Covariate balance in the Table 1 layout. mode follows the matrices passed
/// in: levels for SC/SC_PEN, differences for DSC/DSC_PEN.
struct BalanceTable {
    std::vector<BalanceRow> rows;
    bool differenced = false;
    bool normalized = false;  // wmape divided by |treated_value|
};

// Per-variable weighted pairwise discrepancy sum_j w_j d(x1_v, x0_vj).
Eigen::VectorXd pairwise_discrepancy(const Eigen::VectorXd& w, const Eigen::VectorXd& x1,
                                     const Eigen::MatrixXd& x0, DiscrepancyMetric metric);

BalanceTable balance_table(const FittedSyntheticControl& fitted,
                           const PredictorMatrices& matrices, bool normalized);

// Plain-text rendering with aligned columns, values rounded to 2 decimals.
std::string render_balance_text(const BalanceTable& table);

}  // namespace sct
