#include "sct/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace sct {

int PanelData::unit_index(const std::string& unit) const {
    auto it = std::find(unit_ids.begin(), unit_ids.end(), unit);
    if (it == unit_ids.end()) {
        throw UnknownUnit("unknown unit '" + unit + "'");
    }
    return static_cast<int>(it - unit_ids.begin());
}

int PanelData::time_index(double time) const {
    auto it = std::find(time_points.begin(), time_points.end(), time);
    if (it == time_points.end()) {
        throw InvalidDesign("time " + std::to_string(time) + " is not a panel time point");
    }
    return static_cast<int>(it - time_points.begin());
}

const Eigen::MatrixXd& PanelData::variable(int v) const {
    if (v == 0) return outcomes;
    return covariates.at(static_cast<std::size_t>(v - 1));
}

const std::string& PanelData::variable_name(int v) const {
    if (v == 0) return outcome_name;
    return covariate_names.at(static_cast<std::size_t>(v - 1));
}

PanelData PanelData::without_unit(const std::string& unit) const {
    int drop = unit_index(unit);
    PanelData out;
    out.time_points = time_points;
    out.outcome_name = outcome_name;
    out.covariate_names = covariate_names;
    int n = n_units();
    out.outcomes.resize(n - 1, n_periods());
    for (const auto& cov : covariates) {
        (void)cov;
        out.covariates.emplace_back(n - 1, n_periods());
    }
    int r = 0;
    for (int i = 0; i < n; ++i) {
        if (i == drop) continue;
        out.unit_ids.push_back(unit_ids[i]);
        out.outcomes.row(r) = outcomes.row(i);
        for (std::size_t c = 0; c < covariates.size(); ++c) {
            out.covariates[c].row(r) = covariates[c].row(i);
        }
        ++r;
    }
    return out;
}

PanelData PanelData::restrict_times_before(double time) const {
    int cut = 0;
    while (cut < n_periods() && time_points[cut] < time) ++cut;
    if (cut == 0) {
        throw InvalidDesign("no periods strictly before " + std::to_string(time));
    }
    PanelData out;
    out.unit_ids = unit_ids;
    out.outcome_name = outcome_name;
    out.covariate_names = covariate_names;
    out.time_points.assign(time_points.begin(), time_points.begin() + cut);
    out.outcomes = outcomes.leftCols(cut);
    for (const auto& cov : covariates) {
        out.covariates.push_back(cov.leftCols(cut));
    }
    return out;
}

void PanelData::check_consistent() const {
    if (unit_ids.empty() || time_points.empty()) {
        throw InvalidDesign("panel must contain at least one unit and one period");
    }
    for (std::size_t i = 1; i < time_points.size(); ++i) {
        if (!(time_points[i] > time_points[i - 1])) {
            throw InvalidDesign("time points must be strictly increasing");
        }
    }
    std::vector<std::string> sorted = unit_ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidDesign("unit ids must be unique");
    }
    auto check_dims = [&](const Eigen::MatrixXd& m, const std::string& name) {
        if (m.rows() != n_units() || m.cols() != n_periods()) {
            throw InvalidDesign("matrix '" + name + "' has wrong shape");
        }
        if (!m.allFinite()) {
            throw InvalidDesign("matrix '" + name + "' contains non-finite values");
        }
    };
    check_dims(outcomes, outcome_name);
    if (covariates.size() != covariate_names.size()) {
        throw InvalidDesign("covariate name/matrix count mismatch");
    }
    for (std::size_t c = 0; c < covariates.size(); ++c) {
        check_dims(covariates[c], covariate_names[c]);
    }
}

DesignIndices resolve_design(const PanelData& panel, const StudyDesign& design) {
    DesignIndices idx;
    idx.treated = panel.unit_index(design.treated_unit);
    idx.t0_index = panel.time_index(design.t0);
    if (idx.t0_index < 1) {
        throw InvalidDesign("intervention time must have at least one period strictly before");
    }
    idx.n_pre = idx.t0_index;
    if (design.train_len < 1 || design.valid_len < 1) {
        throw InvalidDesign("train and validation lengths must each be >= 1");
    }
    if (design.train_len + design.valid_len != idx.n_pre) {
        throw InvalidDesign("S + L must equal the number of pre-treatment periods (" +
                            std::to_string(idx.n_pre) + "), got S=" +
                            std::to_string(design.train_len) + " L=" +
                            std::to_string(design.valid_len));
    }
    idx.validation = {idx.t0_index - design.valid_len, idx.t0_index};
    idx.training = {idx.validation.begin - design.train_len, idx.validation.begin};
    idx.pre = {0, idx.t0_index};
    idx.post = {idx.t0_index, panel.n_periods()};
    return idx;
}

StudyDesign with_default_split(const PanelData& panel, StudyDesign design) {
    if (design.train_len > 0 || design.valid_len > 0) return design;
    int t0_index = panel.time_index(design.t0);
    int n_pre = t0_index;
    design.valid_len = (n_pre + 1) / 2;
    design.train_len = n_pre - design.valid_len;
    return design;
}

Eigen::VectorXd first_difference(const Eigen::VectorXd& series) {
    if (series.size() < 2) {
        throw SeriesTooShort("first_difference requires a series of length >= 2");
    }
    return series.tail(series.size() - 1) - series.head(series.size() - 1);
}

namespace {

double window_mean(const Eigen::MatrixXd& var, int row, TimeWindow w, bool differenced) {
    if (!differenced) {
        return var.row(row).segment(w.begin, w.length()).mean();
    }
    // Mean per-period change within the window.
    double acc = 0;
    for (int t = w.begin + 1; t < w.end; ++t) {
        acc += var(row, t) - var(row, t - 1);
    }
    return acc / (w.length() - 1);
}

}  // namespace

PredictorMatrices build_predictor_matrices(const PanelData& panel, const StudyDesign& design,
                                           TimeWindow window, bool differenced) {
    panel.check_consistent();
    DesignIndices idx = resolve_design(panel, design);
    if (window.length() < 1) {
        throw EmptyWindow("predictor window is empty");
    }
    if (window.begin < 0 || window.end > idx.t0_index) {
        throw InvalidDesign("predictor window must lie in the pre-treatment span");
    }
    if (differenced && window.length() < 2) {
        throw WindowTooShortForDifferencing(
            "differenced predictor window needs at least 2 periods");
    }

    int k = panel.n_variables();
    int n_donors = panel.n_units() - 1;
    PredictorMatrices out;
    out.window = window;
    out.differenced = differenced;
    out.x1.resize(k);
    out.x0.resize(k, n_donors);
    for (int v = 0; v < k; ++v) {
        out.variable_names.push_back(panel.variable_name(v));
        const Eigen::MatrixXd& var = panel.variable(v);
        out.x1(v) = window_mean(var, idx.treated, window, differenced);
        int col = 0;
        for (int i = 0; i < panel.n_units(); ++i) {
            if (i == idx.treated) continue;
            out.x0(v, col) = window_mean(var, i, window, differenced);
            ++col;
        }
    }
    for (int i = 0; i < panel.n_units(); ++i) {
        if (i != idx.treated) out.donor_ids.push_back(panel.unit_ids[i]);
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& s, const std::string& unit, const std::string& time,
                    const std::string& column) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r')) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw NonNumericValue("non-numeric value '" + s + "' for unit '" + unit + "', time '" +
                              time + "', column '" + column + "'");
    }
}

}  // namespace

PanelData load_panel(std::istream& in) {
    std::string header_line;
    if (!std::getline(in, header_line)) {
        throw InvalidDesign("empty input: expected a header row");
    }
    if (!header_line.empty() && header_line.back() == '\r') header_line.pop_back();
    std::vector<std::string> header = split_line(header_line);
    if (header.size() < 3 || header[0] != "unit" || header[1] != "time") {
        throw InvalidDesign("header must start with columns unit,time,outcome");
    }
    std::string outcome_name = header[2];
    std::vector<std::string> covariate_names(header.begin() + 3, header.end());
    int k = static_cast<int>(header.size()) - 2;

    struct Row {
        std::string unit;
        double time;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::vector<std::string> unit_order;
    std::vector<double> times;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_line(line);
        if (fields.size() != header.size()) {
            throw InvalidDesign("line " + std::to_string(lineno) + ": expected " +
                                std::to_string(header.size()) + " fields, got " +
                                std::to_string(fields.size()));
        }
        Row row;
        row.unit = fields[0];
        std::string time_str = fields[1];
        row.time = parse_number(time_str, row.unit, time_str, "time");
        for (int v = 0; v < k; ++v) {
            row.values.push_back(
                parse_number(fields[2 + v], row.unit, time_str, header[2 + v]));
        }
        rows.push_back(std::move(row));
        if (std::find(unit_order.begin(), unit_order.end(), rows.back().unit) == unit_order.end()) {
            unit_order.push_back(rows.back().unit);
        }
        if (std::find(times.begin(), times.end(), rows.back().time) == times.end()) {
            times.push_back(rows.back().time);
        }
    }
    if (rows.empty()) {
        throw InvalidDesign("input contains a header but no data rows");
    }
    std::sort(times.begin(), times.end());

    PanelData panel;
    panel.unit_ids = unit_order;
    panel.time_points = times;
    panel.outcome_name = outcome_name;
    panel.covariate_names = covariate_names;
    int n = panel.n_units();
    int T = panel.n_periods();
    panel.outcomes.setConstant(n, T, std::numeric_limits<double>::quiet_NaN());
    for (int c = 0; c + 1 < k; ++c) {
        panel.covariates.emplace_back(
            Eigen::MatrixXd::Constant(n, T, std::numeric_limits<double>::quiet_NaN()));
    }
    for (const Row& row : rows) {
        int i = panel.unit_index(row.unit);
        int t = panel.time_index(row.time);
        if (!std::isnan(panel.outcomes(i, t))) {
            throw DuplicateCell("duplicate cell for unit '" + row.unit + "' at time " +
                                std::to_string(row.time));
        }
        panel.outcomes(i, t) = row.values[0];
        for (int c = 0; c + 1 < k; ++c) {
            panel.covariates[c](i, t) = row.values[c + 1];
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < T; ++t) {
            if (std::isnan(panel.outcomes(i, t))) {
                throw MissingCell("missing cell for unit '" + panel.unit_ids[i] + "' at time " +
                                  std::to_string(panel.time_points[t]));
            }
        }
    }
    panel.check_consistent();
    return panel;
}

PanelData load_panel_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidDesign("cannot open panel file '" + path + "'");
    }
    return load_panel(in);
}

void save_panel(std::ostream& out, const PanelData& panel) {
    out.precision(17);
    out << "unit,time," << panel.outcome_name;
    for (const auto& name : panel.covariate_names) out << ',' << name;
    out << '\n';
    for (int i = 0; i < panel.n_units(); ++i) {
        for (int t = 0; t < panel.n_periods(); ++t) {
            out << panel.unit_ids[i] << ',' << panel.time_points[t] << ','
                << panel.outcomes(i, t);
            for (const auto& cov : panel.covariates) out << ',' << cov(i, t);
            out << '\n';
        }
    }
}

}  // namespace sct
