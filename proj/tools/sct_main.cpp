// Command-line surface for the synthetic-control toolkit.
//
// Subcommands: fit, balance, placebo-space, placebo-time, evaluate, bias-lab.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sct/io_json.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string data_path;
    std::string treated;
    double t0 = 0;
    std::string estimator = "sc";
    std::string lambda_grid;
    int v_candidates = 200;
    std::string split;  // "S:L"
    std::uint64_t seed = 0;
    std::string format = "text";
    std::string out_dir = ".";
    double sparsity_threshold = 1e-3;
};

void add_data_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--data", opts.data_path, "panel CSV (unit,time,outcome,<covariate...>)")
        ->required();
    cmd->add_option("--treated", opts.treated, "treated unit id")->required();
    cmd->add_option("--t0", opts.t0, "intervention time")->required();
}

void add_fit_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--estimator", opts.estimator, "sc|sc_pen|dsc|dsc_pen")
        ->default_val("sc");
    cmd->add_option("--lambda-grid", opts.lambda_grid,
                    "comma-separated nonnegative penalty grid");
    cmd->add_option("--v-candidates", opts.v_candidates, "sampled importance diagonals")
        ->default_val(200);
    cmd->add_option("--split", opts.split, "pre-period split S:L (default L=ceil(pre/2))");
    cmd->add_option("--seed", opts.seed, "seed for the V sampler")->default_val(0);
}

void add_output_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--format", opts.format, "text|json|csv")->default_val("text");
    cmd->add_option("--out", opts.out_dir, "output directory")->default_val(".");
}

sct::SearchConfig make_config(const CommonOptions& opts) {
    sct::SearchConfig config;
    config.seed = opts.seed;
    config.v_candidates = opts.v_candidates;
    if (!opts.lambda_grid.empty()) {
        config.lambda_grid.clear();
        std::stringstream ss(opts.lambda_grid);
        std::string token;
        while (std::getline(ss, token, ',')) {
            config.lambda_grid.push_back(std::stod(token));
        }
        std::sort(config.lambda_grid.begin(), config.lambda_grid.end());
    }
    return config;
}

sct::StudyDesign make_design(const sct::PanelData& panel, const CommonOptions& opts) {
    sct::StudyDesign design;
    design.treated_unit = opts.treated;
    design.t0 = opts.t0;
    if (!opts.split.empty()) {
        auto colon = opts.split.find(':');
        if (colon == std::string::npos) {
            throw sct::Error("--split expects S:L");
        }
        design.train_len = std::stoi(opts.split.substr(0, colon));
        design.valid_len = std::stoi(opts.split.substr(colon + 1));
        return design;
    }
    return sct::with_default_split(panel, design);
}

// Output files are written once, atomically, at completion.
void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw sct::Error("cannot write '" + path.string() + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

std::string fit_summary_text(const sct::FittedSyntheticControl& fitted) {
    std::ostringstream out;
    out.precision(6);
    out << "estimator: " << sct::kind_name(fitted.kind) << "\n"
        << "treated:   " << fitted.design.treated_unit << "  t0: " << fitted.design.t0
        << "  split: " << fitted.design.train_len << ':' << fitted.design.valid_len << "\n"
        << "lambda:    " << fitted.lambda << "\n"
        << "alpha:     " << fitted.alpha << "\n"
        << "pre_rmspe: " << fitted.pre_rmspe << "  valid_rmspe: " << fitted.valid_rmspe
        << "  post_rmspe: " << fitted.post_rmspe << "\n"
        << "weights (> 1e-3):\n";
    for (int j = 0; j < fitted.w.size(); ++j) {
        if (fitted.w(j) > 1e-3) {
            out << "  " << fitted.donor_ids[j] << ": " << fitted.w(j) << "\n";
        }
    }
    out << "importance:\n";
    for (std::size_t v = 0; v < fitted.variable_names.size(); ++v) {
        out << "  " << fitted.variable_names[v] << ": " << fitted.v_diag(v) << "\n";
    }
    return out.str();
}

sct::PredictorMatrices balance_matrices(const sct::PanelData& panel,
                                        const sct::FittedSyntheticControl& fitted) {
    sct::DesignIndices idx = sct::resolve_design(panel, fitted.design);
    return sct::build_predictor_matrices(panel, fitted.design, idx.pre,
                                         sct::is_differenced(fitted.kind));
}

int run_fit(const CommonOptions& opts) {
    sct::PanelData panel = sct::load_panel_file(opts.data_path);
    sct::StudyDesign design = make_design(panel, opts);
    sct::FittedSyntheticControl fitted =
        sct::fit(panel, design, sct::kind_from_name(opts.estimator), make_config(opts));
    write_file(fs::path(opts.out_dir) / "fit.json", sct::to_json(fitted, panel).dump(2) + "\n");
    if (opts.format == "csv") {
        write_file(fs::path(opts.out_dir) / "paths.csv", sct::paths_csv(fitted, panel));
    }
    if (opts.format == "text") {
        std::cout << fit_summary_text(fitted);
    } else if (opts.format == "json") {
        std::cout << sct::to_json(fitted, panel).dump(2) << "\n";
    }
    return 0;
}

int run_balance(const CommonOptions& opts, const std::string& normalize) {
    sct::PanelData panel = sct::load_panel_file(opts.data_path);
    sct::StudyDesign design = make_design(panel, opts);
    sct::EstimatorKind kind = sct::kind_from_name(opts.estimator);
    sct::FittedSyntheticControl fitted = sct::fit(panel, design, kind, make_config(opts));
    // Normalization defaults: off for levels tables, on for differenced ones.
    bool normalized = sct::is_differenced(kind);
    if (normalize == "on") normalized = true;
    if (normalize == "off") normalized = false;
    sct::BalanceTable table =
        sct::balance_table(fitted, balance_matrices(panel, fitted), normalized);
    write_file(fs::path(opts.out_dir) / "balance.json", sct::to_json(table).dump(2) + "\n");
    if (opts.format == "json") {
        std::cout << sct::to_json(table).dump(2) << "\n";
    } else {
        std::cout << sct::render_balance_text(table);
    }
    return 0;
}

int run_placebo_space(const CommonOptions& opts) {
    sct::PanelData panel = sct::load_panel_file(opts.data_path);
    sct::StudyDesign design = make_design(panel, opts);
    sct::PlaceboStudy study = sct::in_space_placebos(
        panel, design, sct::kind_from_name(opts.estimator), make_config(opts));
    write_file(fs::path(opts.out_dir) / "placebo_space.json",
               sct::to_json(study, panel).dump(2) + "\n");
    write_file(fs::path(opts.out_dir) / "placebo_ratios.csv", sct::ratios_csv(study));
    if (opts.format == "json") {
        std::cout << sct::to_json(study, panel).dump(2) << "\n";
    } else {
        std::cout << "treated ratio: " << study.treated_ratio << "\n"
                  << "p_value: " << study.p_value << " (" << study.placebo_ratios.size()
                  << " placebos";
        if (!study.failures.empty()) std::cout << ", " << study.failures.size() << " failed";
        std::cout << ")\n";
        if (sct::rmspe_ratio_degenerate(study.treated_fit)) {
            std::cout << "warning: treated pre_rmspe is ~0; ratio is degenerate\n";
        }
    }
    return 0;
}

int run_placebo_time(const CommonOptions& opts, double placebo_t0) {
    sct::PanelData panel = sct::load_panel_file(opts.data_path);
    sct::StudyDesign design = make_design(panel, opts);
    sct::FittedSyntheticControl fitted = sct::in_time_placebo(
        panel, design, placebo_t0, sct::kind_from_name(opts.estimator), make_config(opts));
    sct::PanelData truncated = panel.restrict_times_before(design.t0);
    write_file(fs::path(opts.out_dir) / "placebo_time.json",
               sct::to_json(fitted, truncated).dump(2) + "\n");
    if (opts.format == "csv") {
        write_file(fs::path(opts.out_dir) / "placebo_time_paths.csv",
                   sct::paths_csv(fitted, truncated));
    }
    if (opts.format == "json") {
        std::cout << sct::to_json(fitted, truncated).dump(2) << "\n";
    } else {
        std::cout << fit_summary_text(fitted);
    }
    return 0;
}

int run_evaluate(const CommonOptions& opts, const std::string& kinds_arg) {
    sct::PanelData panel = sct::load_panel_file(opts.data_path);
    sct::StudyDesign design = make_design(panel, opts);
    std::vector<sct::EstimatorKind> kinds;
    std::stringstream ss(kinds_arg);
    std::string token;
    while (std::getline(ss, token, ',')) kinds.push_back(sct::kind_from_name(token));
    sct::EvaluationReport report = sct::leave_one_out_eval(panel, design, kinds,
                                                           make_config(opts),
                                                           opts.sparsity_threshold);
    std::string dataset = fs::path(opts.data_path).stem().string();
    write_file(fs::path(opts.out_dir) / "evaluation.json",
               sct::to_json(report, dataset).dump(2) + "\n");
    if (opts.format == "json") {
        std::cout << sct::to_json(report, dataset).dump(2) << "\n";
    } else {
        std::cout << sct::render_evaluation_text(report, dataset);
    }
    return 0;
}

int run_bias_lab(const CommonOptions& opts, bool reproduce, const std::string& link_arg,
                 int units, int periods, int covariates, double noise_sd,
                 const std::string& export_path) {
    if (reproduce) {
        sct::ExampleReport report = sct::reproduce_examples();
        write_file(fs::path(opts.out_dir) / "bias_lab_examples.json",
                   sct::to_json(report).dump(2) + "\n");
        if (opts.format == "json") {
            std::cout << sct::to_json(report).dump(2) << "\n";
        } else {
            std::cout << sct::render_example_report_text(report);
        }
        return report.all_pass ? 0 : 1;
    }
    sct::GenerativeSpec spec;
    spec.n_units = units;
    spec.n_periods = periods;
    spec.n_covariates = covariates;
    spec.noise_sd = noise_sd;
    spec.seed = opts.seed;
    if (link_arg == "linear") {
        spec.link = sct::Link::linear();
    } else if (link_arg.rfind("power:", 0) == 0) {
        spec.link = sct::Link::power(std::stod(link_arg.substr(6)));
    } else {
        throw sct::Error("unknown link '" + link_arg + "' (expected linear or power:<p>)");
    }
    sct::GeneratedPanel generated = sct::generate_panel(spec);
    std::ostringstream csv;
    sct::save_panel(csv, generated.panel);
    std::string target = export_path.empty() ? "generated_panel.csv" : export_path;
    write_file(fs::path(opts.out_dir) / target, csv.str());
    std::cout << "wrote " << (fs::path(opts.out_dir) / target).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic control estimation toolkit"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string normalize = "auto";
    double placebo_t0 = 0;
    std::string kinds_arg = "sc,sc_pen,dsc,dsc_pen";
    bool reproduce_examples = false;
    std::string link_arg = "linear";
    int units = 10, periods = 20, covariates = 1;
    double noise_sd = 0;
    std::string export_path;

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit one estimator and emit the effect path");
    add_data_options(fit_cmd, opts);
    add_fit_options(fit_cmd, opts);
    add_output_options(fit_cmd, opts);

    CLI::App* balance_cmd = app.add_subcommand("balance", "covariate balance table");
    add_data_options(balance_cmd, opts);
    add_fit_options(balance_cmd, opts);
    add_output_options(balance_cmd, opts);
    balance_cmd->add_option("--normalize-balance", normalize, "auto|on|off")
        ->default_val("auto");

    CLI::App* space_cmd = app.add_subcommand("placebo-space", "in-space placebo study");
    add_data_options(space_cmd, opts);
    add_fit_options(space_cmd, opts);
    add_output_options(space_cmd, opts);

    CLI::App* time_cmd = app.add_subcommand("placebo-time", "in-time placebo refit");
    add_data_options(time_cmd, opts);
    add_fit_options(time_cmd, opts);
    add_output_options(time_cmd, opts);
    time_cmd->add_option("--placebo-t0", placebo_t0, "pseudo intervention time")->required();

    CLI::App* eval_cmd = app.add_subcommand("evaluate", "leave-one-out evaluation harness");
    add_data_options(eval_cmd, opts);
    add_fit_options(eval_cmd, opts);
    add_output_options(eval_cmd, opts);
    eval_cmd->add_option("--kinds", kinds_arg, "comma-separated estimator kinds")
        ->default_val("sc,sc_pen,dsc,dsc_pen");
    eval_cmd->add_option("--sparsity-threshold", opts.sparsity_threshold,
                         "nonzero-weight cutoff")
        ->default_val(1e-3);

    CLI::App* lab_cmd = app.add_subcommand("bias-lab", "generative models and worked examples");
    add_output_options(lab_cmd, opts);
    lab_cmd->add_flag("--reproduce-examples", reproduce_examples,
                      "recompute every worked-example claim");
    lab_cmd->add_option("--link", link_arg, "linear or power:<p>")->default_val("linear");
    lab_cmd->add_option("--units", units)->default_val(10);
    lab_cmd->add_option("--periods", periods)->default_val(20);
    lab_cmd->add_option("--covariates", covariates)->default_val(1);
    lab_cmd->add_option("--noise-sd", noise_sd)->default_val(0.0);
    lab_cmd->add_option("--seed", opts.seed)->default_val(0);
    lab_cmd->add_option("--export", export_path, "file name for the generated panel CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit_cmd->parsed()) return run_fit(opts);
        if (balance_cmd->parsed()) return run_balance(opts, normalize);
        if (space_cmd->parsed()) return run_placebo_space(opts);
        if (time_cmd->parsed()) return run_placebo_time(opts, placebo_t0);
        if (eval_cmd->parsed()) return run_evaluate(opts, kinds_arg);
        if (lab_cmd->parsed()) {
            return run_bias_lab(opts, reproduce_examples, link_arg, units, periods, covariates,
                                noise_sd, export_path);
        }
    } catch (const sct::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
