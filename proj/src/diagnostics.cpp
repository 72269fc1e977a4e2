#include "sct/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace sct {

Eigen::VectorXd pairwise_discrepancy(const Eigen::VectorXd& w, const Eigen::VectorXd& x1,
                                     const Eigen::MatrixXd& x0, DiscrepancyMetric metric) {
    if (x0.rows() != x1.size() || x0.cols() != w.size()) {
        throw DimensionMismatch("pairwise discrepancy inputs have inconsistent shapes");
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x1.size());
    for (int v = 0; v < x1.size(); ++v) {
        for (int j = 0; j < w.size(); ++j) {
            double d = x1(v) - x0(v, j);
            out(v) += w(j) * (metric == DiscrepancyMetric::Absolute ? std::abs(d) : d * d);
        }
    }
    return out;
}

BalanceTable balance_table(const FittedSyntheticControl& fitted,
                           const PredictorMatrices& matrices, bool normalized) {
    if (matrices.differenced != is_differenced(fitted.kind)) {
        throw DimensionMismatch(std::string("balance matrices are in ") +
                                (matrices.differenced ? "differences" : "levels") +
                                " but the fitted estimator expects the other mode");
    }
    if (matrices.x0.cols() != fitted.w.size() ||
        matrices.x1.size() != fitted.v_diag.size()) {
        throw DimensionMismatch("balance matrices do not match the fitted model");
    }
    Eigen::VectorXd wmape =
        pairwise_discrepancy(fitted.w, matrices.x1, matrices.x0, DiscrepancyMetric::Absolute);
    Eigen::VectorXd synthetic = matrices.x0 * fitted.w;

    BalanceTable table;
    table.differenced = matrices.differenced;
    table.normalized = normalized;
    for (int v = 0; v < matrices.x1.size(); ++v) {
        BalanceRow row;
        row.variable = matrices.variable_names[v];
        row.treated_value = matrices.x1(v);
        row.synthetic_value = synthetic(v);
        row.wmape = wmape(v);
        if (normalized) {
            if (row.treated_value == 0) {
                throw DivisionByZeroTreatedValue("cannot normalize WMAPE for variable '" +
                                                 row.variable + "': treated value is 0");
            }
            row.wmape /= std::abs(row.treated_value);
        }
        row.importance = fitted.v_diag(v);
        table.rows.push_back(row);
    }
    return table;
}

std::string render_balance_text(const BalanceTable& table) {
    std::size_t name_width = 8;
    for (const auto& row : table.rows) name_width = std::max(name_width, row.variable.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width) + 2) << "variable" << std::right
        << std::setw(12) << (table.differenced ? "treated_d" : "treated") << std::setw(12)
        << (table.differenced ? "synth_d" : "synthetic") << std::setw(12)
        << (table.normalized ? "wmape_norm" : "wmape") << std::setw(12) << "importance" << '\n';
    out << std::fixed << std::setprecision(2);
    for (const auto& row : table.rows) {
        out << std::left << std::setw(static_cast<int>(name_width) + 2) << row.variable
            << std::right << std::setw(12) << row.treated_value << std::setw(12)
            << row.synthetic_value << std::setw(12) << row.wmape << std::setw(12)
            << row.importance << '\n';
    }
    return out.str();
}

}  // namespace sct
