// Experiment orchestration: configuration parsing, deterministic seeded runs
// over dataset x depth x rounds grids, paired AdaBoost/MMI records, and the
// table / curve emitters behind the CLI.
#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "marginboost/boosting.hpp"
#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"
#include "marginboost/margins.hpp"
#include "marginboost/mmi.hpp"
#include "marginboost/rng.hpp"
#include "marginboost/weak_learner.hpp"

namespace marginboost {

// ---------------------------------------------------------------------------
// configuration

struct DatasetSpec {
    enum class Source { Csv, Libsvm, Generated };
    Source source = Source::Csv;
    std::string path;       // file sources
    std::string test_path;  // optional predefined test set
    long label_column = -1; // 0-based; -1 means "last column"
    GeneratorSpec generator;
    std::size_t generator_test_n = 0;
    std::string name;
};

struct ExperimentConfig {
    std::vector<DatasetSpec> datasets;
    std::vector<int> depths{1};
    std::vector<int> t_values{250, 500, 750, 1000};
    std::size_t thresholds = 100;
    double train_fraction = 0.7;
    double delta = 0.05;
    std::uint64_t master_seed = 1;
    bool timings = false;  // add wall-time column to records.csv

    void validate() const {
        if (datasets.empty()) throw ConfigError("config lists no datasets");
        if (t_values.empty()) throw ConfigError("config lists no round counts");
        for (int t : t_values)
            if (t < 1) throw ConfigError("round counts must be >= 1");
        if (depths.empty()) throw ConfigError("config lists no depths");
        for (int d : depths)
            if (d != 1 && d != 2)
                throw ConfigError("experiment depths must be in {1,2} (|H| is undefined beyond)");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw ConfigError("train_fraction must be in (0,1)");
        if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must be in (0,1)");
        if (thresholds < 1) throw ConfigError("thresholds must be >= 1");
    }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline bool starts_with(const std::string& s, const std::string& prefix) {
    return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

inline std::vector<int> parse_int_list(const std::string& s, const std::string& what) {
    std::vector<int> out;
    for (const auto& tok : split_on(s, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) continue;
        try {
            out.push_back(std::stoi(t));
        } catch (const std::exception&) {
            throw ConfigError("bad " + what + " entry '" + t + "'");
        }
    }
    return out;
}

}  // namespace detail

/// Parses one dataset description: whitespace-separated tokens, the first
/// naming the source, the rest key=value options.
///   gen:twonorm n=300 dim=20 test=3000 [name=...]
///   [csv:|libsvm:]path [label=COL] [test=PATH] [name=...]
/// Files without an explicit prefix are CSV when the path ends in .csv,
/// LIBSVM otherwise.
inline DatasetSpec parse_dataset_spec(const std::string& text) {
    const auto tokens = detail::split_ws(text);
    if (tokens.empty()) throw ConfigError("empty dataset spec");

    DatasetSpec spec;
    const std::string& head = tokens.front();
    if (detail::starts_with(head, "gen:")) {
        spec.source = DatasetSpec::Source::Generated;
        spec.generator.kind = parse_generator_kind(head.substr(4));
        spec.name = head.substr(4);
    } else if (detail::starts_with(head, "csv:")) {
        spec.source = DatasetSpec::Source::Csv;
        spec.path = head.substr(4);
    } else if (detail::starts_with(head, "libsvm:")) {
        spec.source = DatasetSpec::Source::Libsvm;
        spec.path = head.substr(7);
    } else {
        spec.source = head.size() >= 4 && head.substr(head.size() - 4) == ".csv"
                          ? DatasetSpec::Source::Csv
                          : DatasetSpec::Source::Libsvm;
        spec.path = head;
    }
    if (spec.name.empty() && !spec.path.empty()) {
        std::string base = spec.path;
        const auto slash = base.find_last_of('/');
        if (slash != std::string::npos) base = base.substr(slash + 1);
        const auto dot = base.find_last_of('.');
        if (dot != std::string::npos && dot > 0) base = base.substr(0, dot);
        spec.name = base;
    }

    for (std::size_t i = 1; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos)
            throw ConfigError("dataset option '" + tokens[i] + "' is not key=value");
        const std::string key = tokens[i].substr(0, eq);
        const std::string value = tokens[i].substr(eq + 1);
        try {
            if (key == "n") {
                spec.generator.n = std::stoul(value);
            } else if (key == "dim") {
                spec.generator.dim = std::stoul(value);
            } else if (key == "test") {
                if (spec.source == DatasetSpec::Source::Generated)
                    spec.generator_test_n = std::stoul(value);
                else
                    spec.test_path = value;
            } else if (key == "label") {
                spec.label_column = std::stol(value);
            } else if (key == "name") {
                spec.name = value;
            } else {
                throw ConfigError("unknown dataset option '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("bad value in dataset option '" + tokens[i] + "'");
        }
    }
    if (spec.source == DatasetSpec::Source::Generated && spec.generator.n == 0)
        throw ConfigError("generated dataset needs n=<train size>");
    return spec;
}

/// Flat key=value config file; '#' starts a comment, `dataset=` repeats.
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    ExperimentConfig cfg;
    cfg.depths = {1};
    cfg.t_values = {250, 500, 750, 1000};

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        try {
            if (key == "dataset") {
                cfg.datasets.push_back(parse_dataset_spec(value));
            } else if (key == "depths") {
                cfg.depths = detail::parse_int_list(value, "depths");
            } else if (key == "rounds") {
                cfg.t_values = detail::parse_int_list(value, "rounds");
            } else if (key == "thresholds") {
                cfg.thresholds = std::stoul(value);
            } else if (key == "train_fraction") {
                cfg.train_fraction = std::stod(value);
            } else if (key == "delta") {
                cfg.delta = std::stod(value);
            } else if (key == "seed") {
                cfg.master_seed = std::stoull(value);
            } else {
                throw ConfigError(path + ": line " + std::to_string(line_no) + ": unknown key '" +
                                  key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(path + ": line " + std::to_string(line_no) + ": bad value for '" +
                              key + "'");
        }
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// data loading

namespace detail {

inline std::size_t csv_column_count(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (!line.empty()) return split_on(line, ',').size();
    }
    throw DataError(path + ": empty file");
}

}  // namespace detail

/// Loads a file-backed dataset, resolving label=-1 to the last CSV column.
inline Dataset load_tabular(const DatasetSpec& spec, const std::string& path) {
    Dataset ds;
    if (spec.source == DatasetSpec::Source::Csv) {
        const std::size_t cols = detail::csv_column_count(path);
        const std::size_t label =
            spec.label_column >= 0 ? static_cast<std::size_t>(spec.label_column) : cols - 1;
        ds = load_csv(path, label);
    } else {
        ds = load_libsvm(path);
    }
    ds.name = spec.name;
    return ds;
}

// ---------------------------------------------------------------------------
// run records

struct RunRecord {
    std::string dataset;
    int depth = 0;
    int k = 0;  // terminal nodes, 2^depth
    int t = 0;  // rounds requested
    std::string algorithm;  // ADA or MMI
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    int rounds_used = 0;
    double test_error = std::nan("");
    double min_mi = std::nan("");
    double avg_mi = std::nan("");
    double emargin = std::nan("");
    double emargin_error = std::nan("");
    double bound_value = std::nan("");
    std::size_t support_count = 0;
    double support_fraction = std::nan("");
    double wall_time_s = 0.0;
};

// ---------------------------------------------------------------------------
// worker pool

/// Pool size: MARGINBOOST_WORKERS when set, else the processor count.
inline std::size_t worker_pool_size() {
    if (const char* env = std::getenv("MARGINBOOST_WORKERS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs fn(0..count-1) on a bounded pool. Jobs write to preallocated slots,
/// so scheduling order cannot change the results.
template <typename F>
inline void parallel_for(std::size_t count, F&& fn) {
    const std::size_t workers = std::min(worker_pool_size(), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : threads) th.join();
}

// ---------------------------------------------------------------------------
// experiment driver

namespace detail {

struct PreparedData {
    Dataset train;
    Dataset test;
};

inline PreparedData prepare_data(const DatasetSpec& spec, const Dataset* preloaded,
                                 const Dataset* preloaded_test, double train_fraction,
                                 std::uint64_t run_seed) {
    Dataset train_raw, test_raw;
    if (spec.source == DatasetSpec::Source::Generated) {
        GeneratorSpec g = spec.generator;
        g.seed = mix_seed(run_seed, 1);
        train_raw = generate(g);
        g.n = spec.generator_test_n;
        g.seed = mix_seed(run_seed, 2);
        test_raw = generate(g);
    } else if (preloaded_test != nullptr) {
        train_raw = *preloaded;
        test_raw = *preloaded_test;
    } else {
        auto parts = split_train_test(*preloaded, train_fraction, run_seed);
        train_raw = std::move(parts.first);
        test_raw = std::move(parts.second);
    }
    PreparedData out;
    auto [train, test, params] = normalize_unit_interval(train_raw, test_raw);
    out.train = std::move(train);
    out.test = std::move(test);
    return out;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace detail

/// Runs every dataset x depth x rounds combination: AdaBoost, margin and
/// EMargin diagnostics, then the MMI reweight of the frozen ensemble. Each
/// combination yields a paired (ADA, MMI) record; a failing run produces
/// error records without stopping its siblings. Run seeds derive from the
/// master seed via mix_seed(master, dataset_index, depth, rounds).
inline std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    // file-backed sources load once; jobs share them read-only
    std::vector<Dataset> loaded(cfg.datasets.size());
    std::vector<Dataset> loaded_test(cfg.datasets.size());
    std::vector<bool> has_test(cfg.datasets.size(), false);
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d) {
        const auto& spec = cfg.datasets[d];
        if (spec.source == DatasetSpec::Source::Generated) continue;
        loaded[d] = load_tabular(spec, spec.path);
        if (!spec.test_path.empty()) {
            loaded_test[d] = load_tabular(spec, spec.test_path);
            has_test[d] = true;
        }
    }

    struct Job {
        std::size_t dataset_index;
        int depth;
        int rounds;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
        for (int depth : cfg.depths)
            for (int t : cfg.t_values) jobs.push_back({d, depth, t});

    std::vector<RunRecord> records(2 * jobs.size());
    const ThresholdGrid grid = build_grid(cfg.thresholds);

    parallel_for(jobs.size(), [&](std::size_t j) {
        const Job& job = jobs[j];
        const auto& spec = cfg.datasets[job.dataset_index];
        const std::uint64_t seed =
            mix_seed(cfg.master_seed, job.dataset_index, static_cast<std::uint64_t>(job.depth),
                     static_cast<std::uint64_t>(job.rounds));

        RunRecord ada;
        ada.dataset = spec.name;
        ada.depth = job.depth;
        ada.k = 1 << job.depth;
        ada.t = job.rounds;
        ada.algorithm = "ADA";
        ada.seed = seed;
        RunRecord mmi = ada;
        mmi.algorithm = "MMI";

        const auto start = std::chrono::steady_clock::now();
        try {
            const auto data = detail::prepare_data(
                spec, &loaded[job.dataset_index],
                has_test[job.dataset_index] ? &loaded_test[job.dataset_index] : nullptr,
                cfg.train_fraction, seed);
            const BoostResult boost = adaboost(data.train, job.rounds, job.depth, grid);
            const Ensemble& ens = boost.ensemble;
            const double ln_h =
                log_hypothesis_count(data.train.n_cols, cfg.thresholds, job.depth);

            ada.rounds_used = boost.rounds_completed;
            ada.test_error = error_rate(ens, data.test);
            const MarginProfile profile = margins(ens, data.train);
            const EMarginResult em =
                emargin_bound(profile, ln_h, data.train.n_rows, cfg.delta);
            ada.emargin = em.theta_star;
            ada.emargin_error = em.q_star;
            ada.bound_value = em.bound_value;
            ada.support_count = support(ens.weights, kSupportTol).size();
            ada.support_fraction =
                static_cast<double>(ada.support_count) / static_cast<double>(ens.size());
            ada.wall_time_s = detail::seconds_since(start);

            try {
                const auto mmi_start = std::chrono::steady_clock::now();
                const MMIResult rw = mmi_reweight(ens, data.train);
                const Ensemble reweighted = apply_weights(ens, rw.new_weights);
                const MarginProfile new_profile{rw.new_margins};
                const Dominance dom = compare_profiles(profile, new_profile);
                const EMarginResult em2 =
                    emargin_bound(new_profile, ln_h, data.train.n_rows, cfg.delta);

                mmi.rounds_used = boost.rounds_completed;
                mmi.test_error = error_rate(reweighted, data.test);
                // tolerance-level LP noise rounds up to zero; real violations
                // would stay visibly negative
                mmi.min_mi = (dom.min_improvement < 0.0 && dom.min_improvement > -1e-9)
                                 ? 0.0
                                 : dom.min_improvement;
                mmi.avg_mi = dom.avg_improvement;
                mmi.emargin = em2.theta_star;
                mmi.emargin_error = em2.q_star;
                mmi.bound_value = em2.bound_value;
                mmi.support_count = rw.support.size();
                mmi.support_fraction =
                    static_cast<double>(rw.support.size()) / static_cast<double>(ens.size());
                mmi.wall_time_s = detail::seconds_since(mmi_start);
            } catch (const std::exception& e) {
                mmi.ok = false;
                mmi.error = e.what();
            }
        } catch (const std::exception& e) {
            ada.ok = false;
            ada.error = e.what();
            mmi.ok = false;
            mmi.error = "AdaBoost stage failed: " + std::string(e.what());
        }
        records[2 * j] = std::move(ada);
        records[2 * j + 1] = std::move(mmi);
    });

    std::stable_sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
        if (a.dataset != b.dataset) return a.dataset < b.dataset;
        if (a.depth != b.depth) return a.depth < b.depth;
        if (a.t != b.t) return a.t < b.t;
        return a.algorithm < b.algorithm;
    });
    return records;
}

// ---------------------------------------------------------------------------
// round sweep (the by-round comparison curves)

struct SweepPoint {
    int t = 0;
    double ada_test_error = 0.0;
    double mmi_test_error = 0.0;
    double xi_star = 0.0;
    double min_mi = 0.0;
    double avg_mi = 0.0;
    std::size_t support_count = 0;
    double support_fraction = 0.0;
};

/// Trains once to t_max, then evaluates the AdaBoost/MMI pair on every
/// truncation at multiples of `stride` (weights renormalized per truncation).
inline std::vector<SweepPoint> sweep_rounds(const Dataset& train, const Dataset& test, int depth,
                                            int t_max, int stride, const ThresholdGrid& grid) {
    if (stride < 1 || t_max < stride) throw std::invalid_argument("need t_max >= stride >= 1");
    const BoostResult boost = adaboost(train, t_max, depth, grid);

    std::vector<int> points;
    for (int t = stride; t <= boost.rounds_completed; t += stride) points.push_back(t);
    std::vector<SweepPoint> out(points.size());
    parallel_for(points.size(), [&](std::size_t idx) {
        const int t = points[idx];
        const Ensemble part = truncate_ensemble(boost.ensemble, static_cast<std::size_t>(t));
        SweepPoint pt;
        pt.t = t;
        pt.ada_test_error = error_rate(part, test);
        const MarginProfile before = margins(part, train);
        const MMIResult rw = mmi_reweight(part, train);
        const Ensemble reweighted = apply_weights(part, rw.new_weights);
        pt.mmi_test_error = error_rate(reweighted, test);
        const Dominance dom = compare_profiles(before, MarginProfile{rw.new_margins});
        pt.xi_star = rw.xi_star;
        pt.min_mi = (dom.min_improvement < 0.0 && dom.min_improvement > -1e-9)
                        ? 0.0
                        : dom.min_improvement;
        pt.avg_mi = dom.avg_improvement;
        pt.support_count = rw.support.size();
        pt.support_fraction = static_cast<double>(rw.support.size()) / static_cast<double>(t);
        out[idx] = pt;
    });
    return out;
}

// ---------------------------------------------------------------------------
// emitters

namespace detail {

// strips the sign off "-0.0000" so noise never prints as negative zero
inline std::string drop_negative_zero(std::string s) {
    if (s.empty() || s[0] != '-') return s;
    for (char c : s)
        if (c >= '1' && c <= '9') return s;
    return s.substr(1);
}

inline std::string fmt4(double v) {
    if (std::isnan(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return drop_negative_zero(buf);
}

inline std::string fmt6(double v) {
    if (std::isnan(v)) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return drop_negative_zero(buf);
}

inline std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

struct TableBlock {
    int depth;
    int t;
    std::vector<const RunRecord*> rows;
};

inline std::vector<TableBlock> group_blocks(const std::vector<RunRecord>& records) {
    std::map<std::pair<int, int>, TableBlock> blocks;
    for (const auto& r : records) {
        auto& block = blocks[{r.depth, r.t}];
        block.depth = r.depth;
        block.t = r.t;
        block.rows.push_back(&r);
    }
    std::vector<TableBlock> out;
    for (auto& [key, block] : blocks) out.push_back(std::move(block));
    return out;
}

struct WinCounts {
    int ada = 0;
    int mmi = 0;
    int ties = 0;
};

// wins/ties at the printed 4-decimal precision, mirroring how the summary
// rows in the published tables count
inline WinCounts count_wins(const TableBlock& block) {
    std::map<std::string, std::pair<const RunRecord*, const RunRecord*>> by_dataset;
    for (const RunRecord* r : block.rows) {
        if (!r->ok) continue;
        auto& pair = by_dataset[r->dataset];
        (r->algorithm == "ADA" ? pair.first : pair.second) = r;
    }
    WinCounts counts;
    for (const auto& [name, pair] : by_dataset) {
        if (pair.first == nullptr || pair.second == nullptr) continue;
        const std::string a = fmt4(pair.first->test_error);
        const std::string m = fmt4(pair.second->test_error);
        if (a == m)
            ++counts.ties;
        else if (m < a)
            ++counts.mmi;
        else
            ++counts.ada;
    }
    return counts;
}

}  // namespace detail

enum class TableFormat { Csv, Markdown };

/// Emits the results table: one block per (depth, rounds) with columns
/// Dataset, Algorithm, Test Error, Min. MI, Avg. MI, EMargin, EMargin Error
/// (4 decimals, "-" where a value does not apply) and a wins/ties summary.
inline void emit_table(const std::vector<RunRecord>& records, TableFormat format,
                       std::ostream& out) {
    if (records.empty()) throw std::invalid_argument("emit_table: no records");
    const auto blocks = detail::group_blocks(records);

    bool first = true;
    for (const auto& block : blocks) {
        if (!first) out << '\n';
        first = false;
        const auto w = detail::count_wins(block);
        if (format == TableFormat::Csv) {
            out << "# " << block.t << " trees (k=" << (1 << block.depth)
                << ", depth=" << block.depth << ")\n";
            out << "Dataset,Algorithm,Test Error,Min. MI,Avg. MI,EMargin,EMargin Error\n";
            for (const RunRecord* r : block.rows) {
                const std::string algo = r->algorithm == "ADA" ? "AB" : r->algorithm;
                if (!r->ok) {
                    out << detail::sanitize(r->dataset) << ',' << algo << ",error: "
                        << detail::sanitize(r->error) << ",-,-,-,-\n";
                    continue;
                }
                out << detail::sanitize(r->dataset) << ',' << algo << ','
                    << detail::fmt4(r->test_error) << ',' << detail::fmt4(r->min_mi) << ','
                    << detail::fmt4(r->avg_mi) << ',' << detail::fmt4(r->emargin) << ','
                    << detail::fmt4(r->emargin_error) << '\n';
            }
            out << "Summary,,,,,,\n";
            out << ",AB," << w.ada << " wins,,,,\n";
            out << ",MMI," << w.mmi << " wins,,,,\n";
            out << ",," << w.ties << " ties,,,,\n";
        } else {
            out << "### " << block.t << " trees (k = " << (1 << block.depth)
                << ", depth = " << block.depth << ")\n\n";
            out << "| Dataset | Algorithm | Test Error | Min. MI | Avg. MI | EMargin | "
                   "EMargin Error |\n";
            out << "|---|---|---|---|---|---|---|\n";
            for (const RunRecord* r : block.rows) {
                const std::string algo = r->algorithm == "ADA" ? "AB" : r->algorithm;
                if (!r->ok) {
                    out << "| " << r->dataset << " | " << algo << " | error: " << r->error
                        << " | - | - | - | - |\n";
                    continue;
                }
                out << "| " << r->dataset << " | " << algo << " | "
                    << detail::fmt4(r->test_error) << " | " << detail::fmt4(r->min_mi) << " | "
                    << detail::fmt4(r->avg_mi) << " | " << detail::fmt4(r->emargin) << " | "
                    << detail::fmt4(r->emargin_error) << " |\n";
            }
            out << "| Summary |  |  |  |  |  |  |\n";
            out << "|  | AB | " << w.ada << " wins |  |  |  |  |\n";
            out << "|  | MMI | " << w.mmi << " wins |  |  |  |  |\n";
            out << "|  |  | " << w.ties << " ties |  |  |  |  |\n";
        }
    }
}

/// Machine-readable record stream; wall-time column only when enabled so the
/// default output is byte-stable across reruns.
inline void emit_records_csv(const std::vector<RunRecord>& records, bool timings,
                             std::ostream& out) {
    out << "dataset,depth,k,rounds,algorithm,seed,ok,error,rounds_used,test_error,min_mi,avg_mi,"
           "emargin,emargin_error,bound_value,support_count,support_fraction";
    if (timings) out << ",wall_time_s";
    out << '\n';
    for (const auto& r : records) {
        out << detail::sanitize(r.dataset) << ',' << r.depth << ',' << r.k << ',' << r.t << ','
            << r.algorithm << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
            << detail::sanitize(r.error) << ',' << r.rounds_used << ','
            << detail::fmt6(r.test_error) << ',' << detail::fmt6(r.min_mi) << ','
            << detail::fmt6(r.avg_mi) << ',' << detail::fmt6(r.emargin) << ','
            << detail::fmt6(r.emargin_error) << ',' << detail::fmt6(r.bound_value) << ','
            << r.support_count << ',' << detail::fmt6(r.support_fraction);
        if (timings) out << ',' << detail::fmt6(r.wall_time_s);
        out << '\n';
    }
}

/// Long-format CMD curves: series,theta,fraction.
inline void emit_cmd(const std::vector<std::pair<std::string, MarginProfile>>& series,
                     std::ostream& out) {
    if (series.empty()) throw std::invalid_argument("emit_cmd: no series");
    out << "series,theta,fraction\n";
    char buf[64];
    for (const auto& [name, profile] : series) {
        for (const auto& [theta, fraction] : cmd(profile)) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g", theta, fraction);
            out << detail::sanitize(name) << ',' << buf << '\n';
        }
    }
}

/// key=value companion block carrying each series' EMargin annotations.
inline void emit_cmd_annotations(
    const std::vector<std::pair<std::string, EMarginResult>>& annotations, std::ostream& out) {
    char buf[32];
    for (const auto& [name, em] : annotations) {
        std::snprintf(buf, sizeof(buf), "%.4f", em.theta_star);
        out << name << ".emargin=" << buf << '\n';
        std::snprintf(buf, sizeof(buf), "%.4f", em.q_star);
        out << name << ".emargin_error=" << buf << '\n';
    }
}

/// Per-observation margin pairs for the scatter companion plot.
inline void emit_margin_scatter(const std::string& name_a, const MarginProfile& a,
                                const std::string& name_b, const MarginProfile& b,
                                std::ostream& out) {
    if (a.size() != b.size())
        throw std::invalid_argument("emit_margin_scatter: profiles differ in length");
    out << "m_" << detail::sanitize(name_a) << ",m_" << detail::sanitize(name_b) << '\n';
    char buf[64];
    for (std::size_t i = 0; i < a.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g", a.values[i], b.values[i]);
        out << buf << '\n';
    }
}

inline void emit_sweep_csv(const std::vector<SweepPoint>& points, std::ostream& out) {
    out << "t,ada_test_error,mmi_test_error,xi_star,min_mi,avg_mi,support_count,"
           "support_fraction\n";
    for (const auto& p : points) {
        out << p.t << ',' << detail::fmt6(p.ada_test_error) << ','
            << detail::fmt6(p.mmi_test_error) << ',' << detail::fmt6(p.xi_star) << ','
            << detail::fmt6(p.min_mi) << ',' << detail::fmt6(p.avg_mi) << ',' << p.support_count
            << ',' << detail::fmt6(p.support_fraction) << '\n';
    }
}

/// Round log CSV: t,eps,gamma,alpha,rho,Z (rho empty outside arc-gv).
inline void emit_round_log(const std::vector<RoundLog>& rounds, std::ostream& out) {
    out << "t,eps,gamma,alpha,rho,Z,completed\n";
    for (const auto& r : rounds) {
        out << r.round << ',' << detail::fmt6(r.eps) << ',' << detail::fmt6(r.gamma) << ','
            << detail::fmt6(r.alpha) << ',' << (r.rho ? detail::fmt6(*r.rho) : std::string())
            << ',' << detail::fmt6(r.z) << ',' << (r.completed ? 1 : 0) << '\n';
    }
}

}  // namespace marginboost
