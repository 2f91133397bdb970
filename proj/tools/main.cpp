// marginboost CLI: train voting ensembles, reweight them through the
// minimum-margin-improvement program, and emit margin diagnostics.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
// failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "marginboost/boosting.hpp"
#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"
#include "marginboost/harness.hpp"
#include "marginboost/margins.hpp"
#include "marginboost/mmi.hpp"
#include "marginboost/model_io.hpp"
#include "marginboost/simplex.hpp"
#include "marginboost/weak_learner.hpp"

namespace mb = marginboost;
namespace fs = std::filesystem;

namespace {

struct DataArgs {
    std::string path;
    std::string format = "auto";
    long label_column = -1;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.path, "input data file")->required();
    cmd->add_option("--format", args.format, "csv | libsvm | auto (default: by extension)")
        ->check(CLI::IsMember({"auto", "csv", "libsvm"}));
    cmd->add_option("--label-col", args.label_column,
                    "0-based label column for CSV input (-1 = last column)");
}

mb::Dataset load_data(const DataArgs& args) {
    mb::DatasetSpec spec;
    spec.path = args.path;
    spec.label_column = args.label_column;
    if (args.format == "csv" ||
        (args.format == "auto" && args.path.size() >= 4 &&
         args.path.substr(args.path.size() - 4) == ".csv")) {
        spec.source = mb::DatasetSpec::Source::Csv;
    } else {
        spec.source = mb::DatasetSpec::Source::Libsvm;
    }
    spec.name = args.path;
    return mb::load_tabular(spec, args.path);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw mb::DataError("cannot write " + path);
    return out;
}

// ln|H| for the analyze bounds: defined on the grid for depth 1 and 2, an
// explicit override covers deeper trees.
double resolve_ln_h(const mb::ModelFile& model, double override_ln_h) {
    if (override_ln_h > 0.0) return override_ln_h;
    const int depth = model.ensemble.depth();
    if (depth == 1 || depth == 2)
        return mb::log_hypothesis_count(model.ensemble.n_features, model.grid_thresholds, depth);
    throw mb::ConfigError("no hypothesis-space cardinality for depth " + std::to_string(depth) +
                          " trees; pass --ln-h explicitly");
}

int run_gen(const std::string& kind, std::size_t n, std::size_t dim, std::uint64_t seed,
            const std::string& out_path) {
    mb::GeneratorSpec spec;
    spec.kind = mb::parse_generator_kind(kind);
    spec.n = n;
    spec.dim = dim;
    spec.seed = seed;
    const mb::Dataset ds = mb::generate(spec);
    mb::save_csv(ds, out_path);
    mb::write_meta_sidecar(ds, out_path);
    std::cout << "wrote " << ds.n_rows << " x " << ds.n_cols << " " << kind << " rows to "
              << out_path << " (+ .meta)\n";
    return 0;
}

int run_train(const DataArgs& data_args, int depth, int rounds, const std::string& algo,
              std::size_t thresholds, const std::string& model_path,
              const std::string& round_log_path, const std::string& test_path,
              const std::string& name) {
    mb::Dataset raw = load_data(data_args);
    if (!name.empty()) raw.name = name;
    std::cout << "loaded " << raw.n_rows << " rows x " << raw.n_cols << " features from "
              << data_args.path << '\n';
    if (raw.meta.count("label_mapping"))
        std::cout << "label mapping: " << raw.meta.at("label_mapping") << '\n';

    const mb::NormParams params = mb::fit_unit_interval(raw);
    const mb::Dataset train = mb::apply_unit_interval(raw, params, false);
    const mb::ThresholdGrid grid = mb::build_grid(thresholds);

    const mb::BoostResult result = algo == "arcgv" ? mb::arcgv(train, rounds, depth, grid)
                                                   : mb::adaboost(train, rounds, depth, grid);
    if (result.broke_early)
        std::cout << "boosting broke early after " << result.rounds_completed
                  << " completed rounds\n";

    mb::ModelFile model;
    model.grid_thresholds = thresholds;
    model.ensemble = result.ensemble;
    model.normalization = params;
    model.provenance = {raw.name, algo == "arcgv" ? "ARCGV" : "ADA", 0, rounds};
    mb::save_model(model, model_path);

    std::cout << "trained " << result.rounds_completed << " trees (depth " << depth
              << "), training error " << mb::detail::fmt4(mb::error_rate(result.ensemble, train))
              << ", model -> " << model_path << '\n';
    if (!test_path.empty()) {
        DataArgs test_args = data_args;
        test_args.path = test_path;
        const mb::Dataset test =
            mb::apply_unit_interval(load_data(test_args), params, true);
        std::cout << "test error " << mb::detail::fmt4(mb::error_rate(result.ensemble, test))
                  << '\n';
    }
    if (!round_log_path.empty()) {
        auto out = open_output(round_log_path);
        mb::emit_round_log(result.rounds, out);
    }
    return 0;
}

int run_mmi(const std::string& model_path, const DataArgs& data_args,
            const std::string& out_model_path, const std::string& out_dir,
            const std::string& lp_dump_path) {
    const mb::ModelFile model = mb::load_model(model_path);
    mb::Dataset data = load_data(data_args);
    if (!data.normalized && model.normalization)
        data = mb::apply_unit_interval(data, *model.normalization, false);

    const mb::MarginProfile before = mb::margins(model.ensemble, data);
    const mb::MMIResult result = mb::mmi_reweight(model.ensemble, data);
    const mb::MarginProfile after{result.new_margins};
    mb::Dominance dom = mb::compare_profiles(before, after);
    if (dom.min_improvement < 0.0 && dom.min_improvement > -1e-9) dom.min_improvement = 0.0;

    mb::ModelFile reweighted = model;
    reweighted.ensemble = mb::apply_weights(model.ensemble, result.new_weights);
    reweighted.provenance.algorithm = "MMI";
    mb::save_model(reweighted, out_model_path);

    const double support_fraction =
        static_cast<double>(result.support.size()) / static_cast<double>(model.ensemble.size());
    std::cout << "xi_star=" << mb::detail::fmt6(result.xi_star)
              << " min_improvement=" << mb::detail::fmt6(dom.min_improvement)
              << " avg_improvement=" << mb::detail::fmt6(dom.avg_improvement)
              << " support=" << result.support.size() << "/" << model.ensemble.size() << " ("
              << mb::detail::fmt4(support_fraction) << ")\n";
    std::cout << "reweighted model -> " << out_model_path << '\n';

    if (!lp_dump_path.empty()) {
        const auto pm = mb::PredictionMatrix::from(model.ensemble, data);
        const auto lp = mb::build_mmi_lp(pm, before.values);
        auto out = open_output(lp_dump_path);
        mb::dump_lp(lp, out);
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        {
            auto out = open_output((fs::path(out_dir) / "mmi_report.txt").string());
            out << "xi_star=" << mb::detail::fmt6(result.xi_star) << '\n'
                << "min_improvement=" << mb::detail::fmt6(dom.min_improvement) << '\n'
                << "avg_improvement=" << mb::detail::fmt6(dom.avg_improvement) << '\n'
                << "dominates=" << (dom.dominates ? 1 : 0) << '\n'
                << "support_count=" << result.support.size() << '\n'
                << "support_fraction=" << mb::detail::fmt6(support_fraction) << '\n'
                << "lp_iterations=" << result.lp_iterations << '\n';
        }
        {
            auto out = open_output((fs::path(out_dir) / "cmd.csv").string());
            mb::emit_cmd({{"ADA", before}, {"MMI", after}}, out);
        }
        {
            auto out = open_output((fs::path(out_dir) / "scatter.csv").string());
            mb::emit_margin_scatter("ADA", before, "MMI", after, out);
        }
        try {
            const double ln_h = resolve_ln_h(model, 0.0);
            const std::size_t n = data.n_rows;
            auto out = open_output((fs::path(out_dir) / "cmd_annotations.txt").string());
            mb::emit_cmd_annotations({{"ADA", mb::emargin_bound(before, ln_h, n, 0.05)},
                                      {"MMI", mb::emargin_bound(after, ln_h, n, 0.05)}},
                                     out);
        } catch (const mb::ConfigError&) {
            // depth beyond the defined |H|: no annotations
        }
    }
    return 0;
}

int run_analyze(const std::string& model_path, const DataArgs& data_args,
                const std::string& out_dir, double delta, double override_ln_h, double vc_dim,
                const std::string& series) {
    const mb::ModelFile model = mb::load_model(model_path);
    mb::Dataset data = load_data(data_args);
    if (!data.normalized && model.normalization)
        data = mb::apply_unit_interval(data, *model.normalization, true);

    const mb::MarginProfile profile = mb::margins(model.ensemble, data);
    const double err = mb::error_rate(model.ensemble, data);
    const double ln_h = resolve_ln_h(model, override_ln_h);
    const std::size_t n = data.n_rows;

    mb::BoundReport report;
    report.delta = delta;
    report.emargin = mb::emargin_bound(profile, ln_h, n, delta);
    std::vector<double> thetas;
    for (int j = 1; j <= 20; ++j) thetas.push_back(j / 20.0);
    report.schapire_curve = mb::schapire_bound(profile, ln_h, n, delta, thetas);
    const double d = vc_dim > 0.0 ? vc_dim : ln_h / std::log(2.0);
    report.freund_schapire = mb::freund_schapire_bound(
        err, std::max(1, static_cast<int>(model.ensemble.size())), d, n);

    fs::create_directories(out_dir);
    {
        auto out = open_output((fs::path(out_dir) / "margins.csv").string());
        out << "i,label,margin\n";
        char buf[40];
        for (std::size_t i = 0; i < profile.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", profile.values[i]);
            out << i << ',' << data.labels[i] << ',' << buf << '\n';
        }
    }
    {
        auto out = open_output((fs::path(out_dir) / "cmd.csv").string());
        mb::emit_cmd({{series, profile}}, out);
    }
    {
        auto out = open_output((fs::path(out_dir) / "cmd_annotations.txt").string());
        mb::emit_cmd_annotations({{series, report.emargin}}, out);
    }
    {
        auto out = open_output((fs::path(out_dir) / "schapire.csv").string());
        out << "# margin-distribution bound, big-O constant fixed at 1\n";
        out << "theta,empirical,capacity,total\n";
        for (const auto& pt : report.schapire_curve)
            out << mb::detail::fmt6(pt.theta) << ',' << mb::detail::fmt6(pt.empirical) << ','
                << mb::detail::fmt6(pt.capacity) << ',' << mb::detail::fmt6(pt.total) << '\n';
    }
    {
        const auto stats = mb::margin_stats(profile);
        auto out = open_output((fs::path(out_dir) / "bounds.txt").string());
        out << "error_rate=" << mb::detail::fmt6(err) << '\n'
            << "ln_h=" << mb::detail::fmt6(ln_h) << '\n'
            << "delta=" << mb::detail::fmt6(delta) << '\n'
            << "margin_min=" << mb::detail::fmt6(stats.min) << '\n'
            << "margin_mean=" << mb::detail::fmt6(stats.mean) << '\n'
            << "margin_median=" << mb::detail::fmt6(stats.median) << '\n'
            << "margin_q1=" << mb::detail::fmt6(stats.q1) << '\n'
            << "margin_q3=" << mb::detail::fmt6(stats.q3) << '\n'
            << "emargin=" << mb::detail::fmt6(report.emargin.theta_star) << '\n'
            << "emargin_error=" << mb::detail::fmt6(report.emargin.q_star) << '\n'
            << "emargin_bound=" << mb::detail::fmt6(report.emargin.bound_value) << '\n'
            << "freund_schapire_bound=" << mb::detail::fmt6(report.freund_schapire) << '\n'
            << "freund_schapire_vc_dim=" << mb::detail::fmt6(d) << '\n';
    }
    {
        auto out = open_output((fs::path(out_dir) / "emargin_table.csv").string());
        out << "q,theta_hat,u,kl_inverse\n";
        for (const auto& row : report.emargin.per_q_table)
            out << mb::detail::fmt6(row.q) << ',' << mb::detail::fmt6(row.theta) << ','
                << mb::detail::fmt6(row.u) << ',' << mb::detail::fmt6(row.kl_inv) << '\n';
    }
    std::cout << "error rate " << mb::detail::fmt4(err) << ", EMargin "
              << mb::detail::fmt4(report.emargin.theta_star) << ", EMargin error "
              << mb::detail::fmt4(report.emargin.q_star) << "; reports in " << out_dir << '\n';
    return 0;
}

int run_experiment_cmd(const std::string& config_path, const std::string& out_dir,
                       const CLI::App* cmd, std::uint64_t seed, const std::string& depths,
                       const std::string& rounds, std::size_t thresholds, double train_fraction,
                       double delta, bool timings) {
    mb::ExperimentConfig cfg = mb::parse_config_file(config_path);
    if (cmd->count("--seed")) cfg.master_seed = seed;
    if (cmd->count("--depths")) cfg.depths = mb::detail::parse_int_list(depths, "depths");
    if (cmd->count("--rounds")) cfg.t_values = mb::detail::parse_int_list(rounds, "rounds");
    if (cmd->count("--thresholds")) cfg.thresholds = thresholds;
    if (cmd->count("--train-fraction")) cfg.train_fraction = train_fraction;
    if (cmd->count("--delta")) cfg.delta = delta;
    cfg.timings = timings;

    const auto records = mb::run_experiment(cfg);
    fs::create_directories(out_dir);
    {
        auto out = open_output((fs::path(out_dir) / "records.csv").string());
        mb::emit_records_csv(records, cfg.timings, out);
    }
    {
        auto out = open_output((fs::path(out_dir) / "table.csv").string());
        mb::emit_table(records, mb::TableFormat::Csv, out);
    }
    {
        auto out = open_output((fs::path(out_dir) / "table.md").string());
        mb::emit_table(records, mb::TableFormat::Markdown, out);
    }
    std::size_t failed = 0;
    for (const auto& r : records) failed += r.ok ? 0 : 1;
    std::cout << records.size() << " records (" << failed << " failed) -> " << out_dir << '\n';
    return 0;
}

int run_sweep(const std::string& dataset_spec, int depth, int t_max, int stride,
              std::uint64_t seed, std::size_t thresholds, double train_fraction,
              const std::string& out_path) {
    const mb::DatasetSpec spec = mb::parse_dataset_spec(dataset_spec);
    const mb::Dataset* preloaded = nullptr;
    const mb::Dataset* preloaded_test = nullptr;
    mb::Dataset loaded, loaded_test;
    if (spec.source != mb::DatasetSpec::Source::Generated) {
        loaded = mb::load_tabular(spec, spec.path);
        preloaded = &loaded;
        if (!spec.test_path.empty()) {
            loaded_test = mb::load_tabular(spec, spec.test_path);
            preloaded_test = &loaded_test;
        }
    }
    const auto data =
        mb::detail::prepare_data(spec, preloaded, preloaded_test, train_fraction, seed);
    const mb::ThresholdGrid grid = mb::build_grid(thresholds);
    const auto points = mb::sweep_rounds(data.train, data.test, depth, t_max, stride, grid);
    auto out = open_output(out_path);
    mb::emit_sweep_csv(points, out);
    std::cout << points.size() << " sweep points -> " << out_path << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"voting-ensemble margin analysis: boosting, LP reweighting, margin bounds"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset (CSV + .meta sidecar)");
    std::string gen_kind = "twonorm", gen_out;
    std::size_t gen_n = 300, gen_dim = 20;
    std::uint64_t gen_seed = 1;
    gen->add_option("--kind", gen_kind, "twonorm | threenorm | ringnorm")
        ->check(CLI::IsMember({"twonorm", "threenorm", "ringnorm"}));
    gen->add_option("--n", gen_n, "number of rows");
    gen->add_option("--dim", gen_dim, "number of features");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path")->required();

    // train
    auto* train = app.add_subcommand("train", "run one boosting pass and save the model");
    DataArgs train_data;
    add_data_options(train, train_data);
    int train_depth = 1, train_rounds = 250;
    std::string train_algo = "ada", train_model, train_round_log, train_test, train_name;
    std::size_t train_thresholds = 100;
    train->add_option("--depth", train_depth, "tree depth (1 or 2 for the standard grid)");
    train->add_option("--rounds", train_rounds, "boosting rounds T");
    train->add_option("--algo", train_algo, "ada | arcgv")
        ->check(CLI::IsMember({"ada", "arcgv"}));
    train->add_option("--thresholds", train_thresholds, "grid thresholds per feature");
    train->add_option("--model", train_model, "output model path")->required();
    train->add_option("--round-log", train_round_log, "per-round CSV log path");
    train->add_option("--test", train_test, "optional test file to score");
    train->add_option("--name", train_name, "dataset name recorded in the model");

    // mmi
    auto* mmi = app.add_subcommand("mmi", "reweight a trained model by the margin LP");
    DataArgs mmi_data;
    std::string mmi_model, mmi_out, mmi_dir, mmi_lp_dump;
    mmi->add_option("--model", mmi_model, "trained model path")->required();
    add_data_options(mmi, mmi_data);
    mmi->add_option("--out", mmi_out, "reweighted model output path")->required();
    mmi->add_option("--out-dir", mmi_dir, "directory for report, CMD and scatter files");
    mmi->add_option("--lp-dump", mmi_lp_dump, "dump the LP in plain text for cross-checking");

    // analyze
    auto* analyze = app.add_subcommand("analyze", "margins, CMD and bounds for a model on data");
    DataArgs analyze_data;
    std::string analyze_model, analyze_dir = "analysis", analyze_series = "model";
    double analyze_delta = 0.05, analyze_ln_h = 0.0, analyze_vc = 0.0;
    analyze->add_option("--model", analyze_model, "trained model path")->required();
    add_data_options(analyze, analyze_data);
    analyze->add_option("--out-dir", analyze_dir, "output directory");
    analyze->add_option("--delta", analyze_delta, "bound confidence parameter");
    analyze->add_option("--ln-h", analyze_ln_h, "override ln|H| (needed beyond depth 2)");
    analyze->add_option("--vc-dim", analyze_vc,
                        "VC dimension for the round-count bound (default ln|H|/ln 2)");
    analyze->add_option("--series", analyze_series, "series name in the CMD output");

    // experiment
    auto* experiment = app.add_subcommand("experiment", "run a config-driven experiment grid");
    std::string exp_config, exp_dir = "experiment_out", exp_depths, exp_rounds;
    std::uint64_t exp_seed = 1;
    std::size_t exp_thresholds = 100;
    double exp_fraction = 0.7, exp_delta = 0.05;
    bool exp_timings = false;
    experiment->add_option("--config", exp_config, "key=value config file")->required();
    experiment->add_option("--out-dir", exp_dir, "output directory");
    experiment->add_option("--seed", exp_seed, "master seed override");
    experiment->add_option("--depths", exp_depths, "depth list override, e.g. 1,2");
    experiment->add_option("--rounds", exp_rounds, "round list override, e.g. 250,500");
    experiment->add_option("--thresholds", exp_thresholds, "grid thresholds override");
    experiment->add_option("--train-fraction", exp_fraction, "train fraction override");
    experiment->add_option("--delta", exp_delta, "bound confidence override");
    experiment->add_flag("--timings", exp_timings, "add wall-time column to records.csv");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "by-round AdaBoost vs MMI comparison curves");
    std::string sweep_dataset, sweep_out = "sweep.csv";
    int sweep_depth = 1, sweep_t_max = 500, sweep_stride = 25;
    std::uint64_t sweep_seed = 1;
    std::size_t sweep_thresholds = 100;
    double sweep_fraction = 0.7;
    sweep->add_option("--dataset", sweep_dataset,
                      "dataset spec, e.g. 'gen:twonorm n=300 test=3000' or a file path")
        ->required();
    sweep->add_option("--depth", sweep_depth, "tree depth");
    sweep->add_option("--t-max", sweep_t_max, "train this many rounds");
    sweep->add_option("--stride", sweep_stride, "evaluate every this many rounds");
    sweep->add_option("--seed", sweep_seed, "run seed");
    sweep->add_option("--thresholds", sweep_thresholds, "grid thresholds per feature");
    sweep->add_option("--train-fraction", sweep_fraction, "train fraction for unsplit files");
    sweep->add_option("--out", sweep_out, "output CSV path");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_gen(gen_kind, gen_n, gen_dim, gen_seed, gen_out);
        if (train->parsed())
            return run_train(train_data, train_depth, train_rounds, train_algo, train_thresholds,
                             train_model, train_round_log, train_test, train_name);
        if (mmi->parsed()) return run_mmi(mmi_model, mmi_data, mmi_out, mmi_dir, mmi_lp_dump);
        if (analyze->parsed())
            return run_analyze(analyze_model, analyze_data, analyze_dir, analyze_delta,
                               analyze_ln_h, analyze_vc, analyze_series);
        if (experiment->parsed())
            return run_experiment_cmd(exp_config, exp_dir, experiment, exp_seed, exp_depths,
                                      exp_rounds, exp_thresholds, exp_fraction, exp_delta,
                                      exp_timings);
        if (sweep->parsed())
            return run_sweep(sweep_dataset, sweep_depth, sweep_t_max, sweep_stride, sweep_seed,
                             sweep_thresholds, sweep_fraction, sweep_out);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const mb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const mb::DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const mb::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
