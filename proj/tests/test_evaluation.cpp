#include <doctest.h>

#include <cmath>

#include "sct/evaluation.hpp"
#include "test_support.hpp"

using namespace sct;
using test_support::make_panel;

namespace {

SearchConfig tiny_config() {
    SearchConfig config;
    config.v_candidates = 1;
    return config;
}

// unit0 treated; the four untreated units form two identical pairs, so every
// pseudo-treated unit has an exact clone among its donors.
PanelData paired_panel() {
    Eigen::MatrixXd y(5, 10);
    for (int t = 0; t < 10; ++t) {
        y(0, t) = 100.0 + t;
        y(1, t) = std::sin(0.9 * t) + 0.2 * t;
        y(2, t) = y(1, t);
        y(3, t) = 10.0 - 0.7 * t + std::cos(1.3 * t);
        y(4, t) = y(3, t);
    }
    return make_panel(y);
}

}  // namespace

TEST_CASE("rmspe hand-checked values") {
    Eigen::VectorXd obs(4), pred(4);
    obs << 0, 0, 5, 5;
    pred << 3, 4, 5, 5;
    CHECK(rmspe(obs, pred, TimeWindow{0, 2}) == doctest::Approx(std::sqrt(12.5)));
    CHECK(rmspe(obs, pred, TimeWindow{2, 4}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(rmspe(obs, pred, TimeWindow{1, 1}), EmptyWindow);
}

TEST_CASE("sparsity counts weights above the threshold") {
    Eigen::VectorXd w(4);
    w << 0.6, 0.399, 1e-3, 1e-12;
    CHECK(sparsity(w, 1e-3) == doctest::Approx(0.5));   // strictly above
    CHECK(sparsity(w, 1e-13) == doctest::Approx(1.0));
    CHECK(sparsity(w, 1e-6) == doctest::Approx(0.75));
    CHECK(sparsity(w, 0.7) == doctest::Approx(0.0));
}

TEST_CASE("leave-one-out finds the clone for every pseudo-treated unit") {
    PanelData panel = paired_panel();
    StudyDesign design{"unit0", 8.0, 4, 3};
    EvaluationReport report =
        leave_one_out_eval(panel, design, {EstimatorKind::SC}, tiny_config());

    REQUIRE(report.failures.empty());
    REQUIRE(report.details.size() == 4);
    for (const auto& detail : report.details) {
        CHECK(detail.unit != "unit0");
        CHECK(detail.pre_rmspe < 1e-6);
        CHECK(detail.post_rmspe < 1e-6);
        CHECK(detail.sparsity == doctest::Approx(1.0 / 3.0));
    }
    REQUIRE(report.summaries.size() == 1);
    CHECK(report.summaries[0].n_units == 4);
    CHECK(report.summaries[0].mean_pre_rmspe < 1e-6);
    CHECK(report.summaries[0].mean_sparsity == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("summaries are means of the per-unit details") {
    PanelData panel = paired_panel();
    StudyDesign design{"unit0", 8.0, 4, 3};
    std::vector<EstimatorKind> kinds{EstimatorKind::SC, EstimatorKind::DSC};
    EvaluationReport report = leave_one_out_eval(panel, design, kinds, tiny_config());
    REQUIRE(report.failures.empty());
    REQUIRE(report.summaries.size() == 2);
    for (const auto& summary : report.summaries) {
        double pre = 0, post = 0, sp = 0;
        int n = 0;
        for (const auto& detail : report.details) {
            if (detail.kind != summary.kind) continue;
            pre += detail.pre_rmspe;
            post += detail.post_rmspe;
            sp += detail.sparsity;
            ++n;
        }
        REQUIRE(n == summary.n_units);
        CHECK(summary.mean_pre_rmspe == doctest::Approx(pre / n).epsilon(1e-12));
        CHECK(summary.mean_post_rmspe == doctest::Approx(post / n).epsilon(1e-12));
        CHECK(summary.mean_sparsity == doctest::Approx(sp / n).epsilon(1e-12));
    }
}

TEST_CASE("the original treated unit never participates") {
    PanelData panel = paired_panel();
    StudyDesign design{"unit0", 8.0, 4, 3};
    EvaluationReport report =
        leave_one_out_eval(panel, design, {EstimatorKind::DSC}, tiny_config());
    for (const auto& detail : report.details) CHECK(detail.unit != "unit0");

    SUBCASE("too few untreated units is an error") {
        Eigen::MatrixXd y(3, 10);
        y.setRandom();
        PanelData small = make_panel(y);
        CHECK_THROWS_AS(
            leave_one_out_eval(small, design, {EstimatorKind::SC}, tiny_config()), Error);
    }
}

TEST_CASE("evaluation runs are reproducible") {
    PanelData panel = paired_panel();
    StudyDesign design{"unit0", 8.0, 4, 3};
    SearchConfig config;
    config.v_candidates = 3;
    config.seed = 9;
    EvaluationReport a = leave_one_out_eval(panel, design, {EstimatorKind::SC_PEN}, config);
    EvaluationReport b = leave_one_out_eval(panel, design, {EstimatorKind::SC_PEN}, config);
    REQUIRE(a.details.size() == b.details.size());
    for (size_t i = 0; i < a.details.size(); ++i) {
        CHECK(a.details[i].pre_rmspe == b.details[i].pre_rmspe);
        CHECK(a.details[i].post_rmspe == b.details[i].post_rmspe);
        CHECK(a.details[i].sparsity == b.details[i].sparsity);
    }
}

TEST_CASE("render_evaluation_text includes every kind and the dataset label") {
    PanelData panel = paired_panel();
    StudyDesign design{"unit0", 8.0, 4, 3};
    EvaluationReport report = leave_one_out_eval(
        panel, design, {EstimatorKind::SC, EstimatorKind::DSC}, tiny_config());
    std::string text = render_evaluation_text(report, "paired");
    CHECK(text.find("paired") != std::string::npos);
    CHECK(text.find("sc") != std::string::npos);
    CHECK(text.find("dsc") != std::string::npos);
}
