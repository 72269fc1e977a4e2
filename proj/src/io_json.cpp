#include "sct/io_json.hpp"

#include <sstream>

namespace sct {

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

}  // namespace

nlohmann::json to_json(const FittedSyntheticControl& fitted, const PanelData& panel) {
    DesignIndices idx = resolve_design(panel, fitted.design);
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["estimator"] = kind_name(fitted.kind);
    j["treated_unit"] = fitted.design.treated_unit;
    j["t0"] = fitted.design.t0;
    j["train_len"] = fitted.design.train_len;
    j["valid_len"] = fitted.design.valid_len;
    j["lambda"] = fitted.lambda;
    j["alpha"] = fitted.alpha;
    j["donors"] = fitted.donor_ids;
    j["weights"] = vector_to_json(fitted.w);
    j["variables"] = fitted.variable_names;
    j["v_diag"] = vector_to_json(fitted.v_diag);
    j["time_points"] = panel.time_points;
    j["counterfactual"] = vector_to_json(fitted.counterfactual);
    j["effects"] = vector_to_json(fitted.effects);
    j["post_time_points"] = std::vector<double>(panel.time_points.begin() + idx.post.begin,
                                                panel.time_points.end());
    j["pre_rmspe"] = fitted.pre_rmspe;
    j["valid_rmspe"] = fitted.valid_rmspe;
    j["post_rmspe"] = fitted.post_rmspe;
    return j;
}

nlohmann::json to_json(const BalanceTable& table) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["mode"] = table.differenced ? "differences" : "levels";
    j["normalized"] = table.normalized;
    j["columns"] = {"variable", "treated_value", "synthetic_value", "wmape", "importance"};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : table.rows) {
        rows.push_back({row.variable, row.treated_value, row.synthetic_value, row.wmape,
                        row.importance});
    }
    j["rows"] = rows;
    return j;
}

nlohmann::json to_json(const PlaceboStudy& study, const PanelData& panel) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["estimator"] = kind_name(study.treated_fit.kind);
    j["treated_unit"] = study.treated_fit.design.treated_unit;
    j["treated_ratio"] = study.treated_ratio;
    j["treated_ratio_degenerate"] = rmspe_ratio_degenerate(study.treated_fit);
    j["p_value"] = study.p_value;
    j["treated_fit"] = to_json(study.treated_fit, panel);
    nlohmann::json placebos = nlohmann::json::array();
    for (std::size_t i = 0; i < study.placebo_units.size(); ++i) {
        nlohmann::json p;
        p["unit"] = study.placebo_units[i];
        p["ratio"] = study.placebo_ratios[i];
        p["pre_rmspe"] = study.placebo_fits[i].pre_rmspe;
        p["post_rmspe"] = study.placebo_fits[i].post_rmspe;
        p["counterfactual"] = vector_to_json(study.placebo_fits[i].counterfactual);
        p["effects"] = vector_to_json(study.placebo_fits[i].effects);
        placebos.push_back(p);
    }
    j["placebos"] = placebos;
    j["failures"] = study.failures;
    return j;
}

nlohmann::json to_json(const EvaluationReport& report, const std::string& dataset) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["dataset"] = dataset;
    j["t0"] = report.base_design.t0;
    j["train_len"] = report.base_design.train_len;
    j["valid_len"] = report.base_design.valid_len;
    j["sparsity_threshold"] = report.sparsity_threshold;
    nlohmann::json summaries = nlohmann::json::array();
    for (const auto& s : report.summaries) {
        summaries.push_back({{"method", kind_name(s.kind)},
                             {"mean_pre_rmspe", s.mean_pre_rmspe},
                             {"mean_post_rmspe", s.mean_post_rmspe},
                             {"mean_sparsity", s.mean_sparsity},
                             {"n_units", s.n_units}});
    }
    j["summaries"] = summaries;
    nlohmann::json details = nlohmann::json::array();
    for (const auto& d : report.details) {
        details.push_back({{"unit", d.unit},
                           {"method", kind_name(d.kind)},
                           {"pre_rmspe", d.pre_rmspe},
                           {"post_rmspe", d.post_rmspe},
                           {"sparsity", d.sparsity}});
    }
    j["details"] = details;
    j["failures"] = report.failures;
    return j;
}

nlohmann::json to_json(const ExampleReport& report) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    nlohmann::json claims = nlohmann::json::array();
    for (const auto& c : report.claims) {
        claims.push_back({{"name", c.name},
                          {"expected", c.expected},
                          {"actual", c.actual},
                          {"pass", c.pass}});
    }
    j["claims"] = claims;
    j["all_pass"] = report.all_pass;
    return j;
}

std::string paths_csv(const FittedSyntheticControl& fitted, const PanelData& panel) {
    DesignIndices idx = resolve_design(panel, fitted.design);
    std::ostringstream out;
    out.precision(17);
    out << "unit,time,series,value\n";
    for (int t = 0; t < panel.n_periods(); ++t) {
        out << fitted.design.treated_unit << ',' << panel.time_points[t] << ",observed,"
            << panel.outcomes(idx.treated, t) << '\n';
        out << fitted.design.treated_unit << ',' << panel.time_points[t] << ",counterfactual,"
            << fitted.counterfactual(t) << '\n';
    }
    return out.str();
}

std::string ratios_csv(const PlaceboStudy& study) {
    std::ostringstream out;
    out.precision(17);
    out << "unit,role,pre_rmspe,post_rmspe,ratio\n";
    out << study.treated_fit.design.treated_unit << ",treated," << study.treated_fit.pre_rmspe
        << ',' << study.treated_fit.post_rmspe << ',' << study.treated_ratio << '\n';
    for (std::size_t i = 0; i < study.placebo_units.size(); ++i) {
        out << study.placebo_units[i] << ",placebo," << study.placebo_fits[i].pre_rmspe << ','
            << study.placebo_fits[i].post_rmspe << ',' << study.placebo_ratios[i] << '\n';
    }
    return out.str();
}

}  // namespace sct
