#include "sct/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace sct {

double rmspe(const Eigen::VectorXd& observed, const Eigen::VectorXd& predicted,
             TimeWindow window) {
    if (window.length() < 1) {
        throw EmptyWindow("rmspe window is empty");
    }
    if (window.begin < 0 || window.end > observed.size() || observed.size() != predicted.size()) {
        throw DimensionMismatch("rmspe inputs do not cover the window");
    }
    double acc = 0;
    for (int t = window.begin; t < window.end; ++t) {
        double d = observed(t) - predicted(t);
        acc += d * d;
    }
    return std::sqrt(acc / window.length());
}

double sparsity(const Eigen::VectorXd& w, double threshold) {
    if (threshold < 0) {
        throw Error("sparsity threshold must be nonnegative");
    }
    if (w.size() == 0) return 0;
    int nonzero = 0;
    for (int j = 0; j < w.size(); ++j) {
        if (w(j) > threshold) ++nonzero;
    }
    return static_cast<double>(nonzero) / static_cast<double>(w.size());
}

EvaluationReport leave_one_out_eval(const PanelData& panel, const StudyDesign& original_design,
                                    const std::vector<EstimatorKind>& kinds,
                                    const SearchConfig& config, double sparsity_threshold) {
    // The original treated unit's post-period is treated; it is excluded both
    // as pseudo-treated and from every donor pool.
    PanelData untreated = panel.without_unit(original_design.treated_unit);
    if (untreated.n_units() < 3) {
        throw InvalidDesign("leave-one-out evaluation needs at least 3 untreated units");
    }

    EvaluationReport report;
    report.base_design = original_design;
    report.sparsity_threshold = sparsity_threshold;
    for (EstimatorKind kind : kinds) {
        EvalSummary summary;
        summary.kind = kind;
        for (const std::string& unit : untreated.unit_ids) {
            StudyDesign design = original_design;
            design.treated_unit = unit;
            try {
                FittedSyntheticControl fitted = fit(untreated, design, kind, config);
                EvalDetail detail;
                detail.unit = unit;
                detail.kind = kind;
                detail.pre_rmspe = fitted.pre_rmspe;
                detail.post_rmspe = fitted.post_rmspe;
                detail.sparsity = sparsity(fitted.w, sparsity_threshold);
                report.details.push_back(detail);
                summary.mean_pre_rmspe += detail.pre_rmspe;
                summary.mean_post_rmspe += detail.post_rmspe;
                summary.mean_sparsity += detail.sparsity;
                ++summary.n_units;
            } catch (const Error& e) {
                report.failures.push_back(unit + "/" + kind_name(kind) + ": " + e.what());
            }
        }
        if (summary.n_units > 0) {
            summary.mean_pre_rmspe /= summary.n_units;
            summary.mean_post_rmspe /= summary.n_units;
            summary.mean_sparsity /= summary.n_units;
        }
        report.summaries.push_back(summary);
    }
    return report;
}

namespace {

// Ranks of `values` among themselves, 1 = smallest.
std::vector<int> ranks_of(const std::vector<double>& values) {
    std::vector<int> order(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return values[a] < values[b]; });
    std::vector<int> ranks(values.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        ranks[order[pos]] = static_cast<int>(pos) + 1;
    }
    return ranks;
}

}  // namespace

std::string render_evaluation_text(const EvaluationReport& report, const std::string& dataset) {
    std::vector<double> pre, post, spars;
    for (const auto& s : report.summaries) {
        pre.push_back(s.mean_pre_rmspe);
        post.push_back(s.mean_post_rmspe);
        spars.push_back(s.mean_sparsity);
    }
    std::vector<int> pre_rank = ranks_of(pre);
    std::vector<int> post_rank = ranks_of(post);
    std::vector<int> spars_rank = ranks_of(spars);

    std::ostringstream out;
    out << "dataset: " << dataset << "  (n=" << (report.summaries.empty()
                                                     ? 0
                                                     : report.summaries.front().n_units)
        << " pseudo-treated units, sparsity threshold " << report.sparsity_threshold << ")\n";
    out << std::left << std::setw(10) << "method" << std::right << std::setw(14) << "pre_rmspe"
        << std::setw(7) << "rank" << std::setw(14) << "post_rmspe" << std::setw(7) << "rank"
        << std::setw(12) << "sparsity" << std::setw(7) << "rank" << '\n';
    out << std::fixed << std::setprecision(2);
    for (std::size_t i = 0; i < report.summaries.size(); ++i) {
        const auto& s = report.summaries[i];
        out << std::left << std::setw(10) << kind_name(s.kind) << std::right << std::setw(14)
            << s.mean_pre_rmspe << std::setw(7) << pre_rank[i] << std::setw(14)
            << s.mean_post_rmspe << std::setw(7) << post_rank[i] << std::setw(12)
            << s.mean_sparsity << std::setw(7) << spars_rank[i] << '\n';
    }
    if (!report.failures.empty()) {
        out << "failures (" << report.failures.size() << "):\n";
        for (const auto& f : report.failures) out << "  " << f << '\n';
    }
    return out.str();
}

}  // namespace sct
