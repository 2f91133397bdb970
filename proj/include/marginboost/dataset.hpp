// Binary-classification datasets: loading, normalization, splitting and
// synthetic generation.
//
// Conventions:
//  - features are stored dense, row-major, n rows by p columns
//  - labels are -1/+1; loaders map {0,1} and two-string encodings onto that
//    (lexicographically smaller token -> -1)
//  - a dataset is either raw or normalized to [0,1]; the flag tracks which
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "marginboost/errors.hpp"
#include "marginboost/rng.hpp"

namespace marginboost {

struct Dataset {
    std::vector<double> features;  // row-major, n_rows * n_cols
    std::vector<int> labels;       // -1 / +1
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::string name;
    bool normalized = false;
    std::map<std::string, std::string> meta;  // generator params, label mapping

    double at(std::size_t i, std::size_t j) const { return features[i * n_cols + j]; }
    std::span<const double> row(std::size_t i) const {
        return {features.data() + i * n_cols, n_cols};
    }
    bool empty() const { return n_rows == 0; }

    bool has_both_classes() const {
        bool pos = false, neg = false;
        for (int y : labels) (y > 0 ? pos : neg) = true;
        return pos && neg;
    }
};

/// Per-feature min-max parameters fitted on a training set.
struct NormParams {
    std::vector<double> min;
    std::vector<double> range;  // zero ranges are replaced by 1
};

struct GeneratorSpec {
    enum class Kind { Twonorm, Threenorm, Ringnorm };
    Kind kind = Kind::Twonorm;
    std::size_t n = 0;
    std::size_t dim = 20;
    std::uint64_t seed = 0;
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + s.size() && std::isfinite(out);
}

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

// Maps raw label tokens onto {-1,+1}. Accepted encodings: {-1,+1}, {0,1},
// or exactly two distinct strings (lexicographically smaller -> -1).
// Returns the per-token map; `note` describes a non-identity mapping.
inline std::map<std::string, int> map_labels(const std::set<std::string>& tokens,
                                             std::string& note) {
    if (tokens.size() < 2) throw DataError("label column contains a single class");
    note.clear();

    bool all_numeric = true;
    std::set<double> values;
    for (const auto& t : tokens) {
        double v;
        if (!parse_double(t, v)) {
            all_numeric = false;
            break;
        }
        values.insert(v);
    }

    if (all_numeric && values.size() < 2)
        throw DataError("label column contains a single class");

    std::map<std::string, int> out;
    if (all_numeric && values.size() == 2) {
        const bool pm1 = values.count(-1.0) && values.count(1.0);
        const bool zo = values.count(0.0) && values.count(1.0);
        if (pm1 || zo) {
            for (const auto& t : tokens) {
                double v = 0.0;
                parse_double(t, v);
                out[t] = (pm1 ? (v > 0 ? +1 : -1) : (v > 0.5 ? +1 : -1));
            }
            if (zo) note = "0->-1, 1->+1";
            return out;
        }
    }
    if (tokens.size() != 2)
        throw DataError("label column has " + std::to_string(tokens.size()) +
                        " distinct values; expected two");
    auto it = tokens.begin();
    const std::string lo = *it++;
    const std::string hi = *it;
    out[lo] = -1;
    out[hi] = +1;
    note = lo + "->-1, " + hi + "->+1";
    return out;
}

}  // namespace detail

/// Loads a comma-delimited file. `label_column` is a 0-based column index.
/// A header row is auto-detected (first row with a non-numeric feature cell).
inline Dataset load_csv(const std::string& path, std::size_t label_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    std::vector<std::vector<std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::size_t> line_numbers;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty()) continue;
        rows.push_back(detail::split_on(line, ','));
        for (auto& cell : rows.back()) cell = detail::trim(cell);
        line_numbers.push_back(line_no);
    }
    if (rows.empty()) throw DataError(path + ": empty file");

    const std::size_t n_cols_total = rows.front().size();
    if (n_cols_total < 2) throw DataError(path + ": need at least one feature and a label column");
    if (label_column >= n_cols_total)
        throw DataError(path + ": label column " + std::to_string(label_column) +
                        " out of range (file has " + std::to_string(n_cols_total) + " columns)");

    // Header detection: any non-numeric feature cell in the first row.
    std::size_t first_data = 0;
    for (std::size_t j = 0; j < n_cols_total; ++j) {
        if (j == label_column) continue;
        double v;
        if (!detail::parse_double(rows[0][j], v)) {
            first_data = 1;
            break;
        }
    }
    if (first_data >= rows.size()) throw DataError(path + ": no data rows after header");

    Dataset ds;
    ds.name = path;
    ds.n_rows = rows.size() - first_data;
    ds.n_cols = n_cols_total - 1;
    ds.features.resize(ds.n_rows * ds.n_cols);

    std::vector<std::string> label_tokens(ds.n_rows);
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        const std::size_t i = r - first_data;
        if (cells.size() != n_cols_total)
            throw DataError(path + ": line " + std::to_string(line_numbers[r]) + ": expected " +
                            std::to_string(n_cols_total) + " columns, got " +
                            std::to_string(cells.size()));
        std::size_t col = 0;
        for (std::size_t j = 0; j < n_cols_total; ++j) {
            if (j == label_column) {
                label_tokens[i] = cells[j];
                continue;
            }
            double v;
            if (!detail::parse_double(cells[j], v))
                throw DataError(path + ": line " + std::to_string(line_numbers[r]) +
                                ": non-numeric feature value '" + cells[j] + "'");
            ds.features[i * ds.n_cols + col++] = v;
        }
    }

    std::set<std::string> tokens(label_tokens.begin(), label_tokens.end());
    std::string note;
    const auto mapping = detail::map_labels(tokens, note);
    ds.labels.resize(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) ds.labels[i] = mapping.at(label_tokens[i]);
    if (!note.empty()) ds.meta["label_mapping"] = note;
    return ds;
}

/// Loads a sparse LIBSVM-format file ("label idx:value ...", 1-based ascending
/// indices). Absent entries densify to 0.
inline Dataset load_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);

    struct Row {
        std::string label;
        std::vector<std::pair<std::size_t, double>> entries;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0, max_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        Row row;
        ss >> row.label;
        std::string tok;
        std::size_t prev = 0;
        while (ss >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": malformed entry '" + tok + "'");
            std::size_t idx = 0;
            double val = 0.0;
            try {
                idx = std::stoul(tok.substr(0, colon));
            } catch (const std::exception&) {
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": bad feature index in '" + tok + "'");
            }
            if (!detail::parse_double(tok.substr(colon + 1), val))
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": bad feature value in '" + tok + "'");
            if (idx == 0 || idx <= prev)
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": feature indices must be strictly increasing");
            prev = idx;
            max_index = std::max(max_index, idx);
            row.entries.emplace_back(idx, val);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": empty file");

    Dataset ds;
    ds.name = path;
    ds.n_rows = rows.size();
    ds.n_cols = max_index;
    ds.features.assign(ds.n_rows * ds.n_cols, 0.0);
    std::vector<std::string> label_tokens(ds.n_rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        label_tokens[i] = rows[i].label;
        for (const auto& [idx, val] : rows[i].entries) ds.features[i * ds.n_cols + idx - 1] = val;
    }
    std::set<std::string> tokens(label_tokens.begin(), label_tokens.end());
    std::string note;
    const auto mapping = detail::map_labels(tokens, note);
    ds.labels.resize(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) ds.labels[i] = mapping.at(label_tokens[i]);
    if (!note.empty()) ds.meta["label_mapping"] = note;
    return ds;
}

namespace detail {

inline Dataset take_rows(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.n_rows = idx.size();
    out.n_cols = ds.n_cols;
    out.name = ds.name;
    out.normalized = ds.normalized;
    out.meta = ds.meta;
    out.features.resize(out.n_rows * out.n_cols);
    out.labels.resize(out.n_rows);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::copy_n(ds.features.data() + idx[i] * ds.n_cols, ds.n_cols,
                    out.features.data() + i * out.n_cols);
        out.labels[i] = ds.labels[idx[i]];
    }
    return out;
}

}  // namespace detail

/// Random train/test partition with train size ceil(n * fraction). The split
/// is re-drawn (up to 100 attempts) until the training part holds both
/// classes; identical (ds, fraction, seed) inputs give identical partitions.
inline std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double train_fraction,
                                                    std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0,1)");
    if (ds.n_rows < 2) throw DataError("cannot split a dataset with fewer than 2 rows");

    // The 1e-9 backoff keeps products like 20*0.55 = 11.000000000000002 from
    // ceiling one row too high.
    const auto n_train = static_cast<std::size_t>(
        std::ceil(static_cast<double>(ds.n_rows) * train_fraction - 1e-9));

    std::vector<std::size_t> order(ds.n_rows);
    for (int attempt = 0; attempt < 100; ++attempt) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(attempt)));
        rng.shuffle(order);
        bool pos = false, neg = false;
        for (std::size_t i = 0; i < n_train; ++i) (ds.labels[order[i]] > 0 ? pos : neg) = true;
        if (pos && neg) {
            std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
            std::vector<std::size_t> test_idx(order.begin() + n_train, order.end());
            return {detail::take_rows(ds, train_idx), detail::take_rows(ds, test_idx)};
        }
    }
    throw DataError("could not draw a two-class training split in 100 attempts");
}

/// Fits per-feature min/range on `ds`; zero ranges are replaced by 1 so
/// constant features map to 0 instead of being dropped.
inline NormParams fit_unit_interval(const Dataset& ds) {
    NormParams p;
    p.min.assign(ds.n_cols, 0.0);
    p.range.assign(ds.n_cols, 1.0);
    if (ds.n_rows == 0) return p;
    for (std::size_t j = 0; j < ds.n_cols; ++j) {
        double lo = ds.at(0, j), hi = ds.at(0, j);
        for (std::size_t i = 1; i < ds.n_rows; ++i) {
            lo = std::min(lo, ds.at(i, j));
            hi = std::max(hi, ds.at(i, j));
        }
        p.min[j] = lo;
        p.range[j] = (hi > lo) ? (hi - lo) : 1.0;
    }
    return p;
}

/// Applies min-max parameters; with `clamp` the result is forced into [0,1]
/// (used for test sets so they stay on the threshold grid).
inline Dataset apply_unit_interval(const Dataset& ds, const NormParams& params, bool clamp) {
    if (params.min.size() != ds.n_cols)
        throw DataError("normalization parameters have " + std::to_string(params.min.size()) +
                        " features, dataset has " + std::to_string(ds.n_cols));
    Dataset out = ds;
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        for (std::size_t j = 0; j < ds.n_cols; ++j) {
            double v = (ds.at(i, j) - params.min[j]) / params.range[j];
            if (clamp) v = std::clamp(v, 0.0, 1.0);
            out.features[i * ds.n_cols + j] = v;
        }
    }
    out.normalized = true;
    return out;
}

/// Min-max normalizes `train` to [0,1] from its own statistics and maps
/// `test` with the same parameters, clamping test values into [0,1].
inline std::tuple<Dataset, Dataset, NormParams> normalize_unit_interval(const Dataset& train,
                                                                        const Dataset& test) {
    if (train.n_cols != test.n_cols)
        throw DataError("train has " + std::to_string(train.n_cols) + " features, test has " +
                        std::to_string(test.n_cols));
    NormParams params = fit_unit_interval(train);
    return {apply_unit_interval(train, params, false), apply_unit_interval(test, params, true),
            params};
}

/// Draws a raw synthetic dataset. Labels are a fair coin, so classes are
/// balanced in expectation. Class-conditional distributions:
///   twonorm:   +1 ~ N(+a*1, I), -1 ~ N(-a*1, I),             a = 2/sqrt(dim)
///   threenorm: +1 ~ equal mix of N(+a*1, I) and N(-a*1, I),
///              -1 ~ N((a,-a,a,-a,...), I),                    a = 2/sqrt(dim)
///   ringnorm:  +1 ~ N(0, 4I), -1 ~ N(a*1, I),                 a = 1/sqrt(dim)
inline Dataset generate(const GeneratorSpec& spec) {
    if (spec.dim < 1) throw std::invalid_argument("generator dimension must be >= 1");
    const std::size_t d = spec.dim;
    const bool wide = spec.kind != GeneratorSpec::Kind::Ringnorm;
    const double a = (wide ? 2.0 : 1.0) / std::sqrt(static_cast<double>(d));

    Dataset ds;
    ds.n_rows = spec.n;
    ds.n_cols = d;
    ds.features.resize(spec.n * d);
    ds.labels.resize(spec.n);
    switch (spec.kind) {
        case GeneratorSpec::Kind::Twonorm: ds.name = "twonorm"; break;
        case GeneratorSpec::Kind::Threenorm: ds.name = "threenorm"; break;
        case GeneratorSpec::Kind::Ringnorm: ds.name = "ringnorm"; break;
    }

    Rng rng(spec.seed);
    for (std::size_t i = 0; i < spec.n; ++i) {
        const int y = rng.coin() ? +1 : -1;
        ds.labels[i] = y;
        double* x = ds.features.data() + i * d;
        switch (spec.kind) {
            case GeneratorSpec::Kind::Twonorm: {
                const double mu = (y > 0 ? a : -a);
                for (std::size_t j = 0; j < d; ++j) x[j] = mu + rng.normal();
                break;
            }
            case GeneratorSpec::Kind::Threenorm: {
                if (y > 0) {
                    const double mu = rng.coin() ? a : -a;
                    for (std::size_t j = 0; j < d; ++j) x[j] = mu + rng.normal();
                } else {
                    for (std::size_t j = 0; j < d; ++j)
                        x[j] = (j % 2 == 0 ? a : -a) + rng.normal();
                }
                break;
            }
            case GeneratorSpec::Kind::Ringnorm: {
                if (y > 0) {
                    for (std::size_t j = 0; j < d; ++j) x[j] = 2.0 * rng.normal();
                } else {
                    for (std::size_t j = 0; j < d; ++j) x[j] = a + rng.normal();
                }
                break;
            }
        }
    }

    ds.meta["kind"] = ds.name;
    ds.meta["n"] = std::to_string(spec.n);
    ds.meta["dim"] = std::to_string(d);
    ds.meta["seed"] = std::to_string(spec.seed);
    {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", a);
        ds.meta["a"] = buf;
    }
    return ds;
}

inline GeneratorSpec::Kind parse_generator_kind(const std::string& s) {
    if (s == "twonorm") return GeneratorSpec::Kind::Twonorm;
    if (s == "threenorm") return GeneratorSpec::Kind::Threenorm;
    if (s == "ringnorm") return GeneratorSpec::Kind::Ringnorm;
    throw ConfigError("unknown generator kind '" + s + "'");
}

/// Writes features plus a trailing -1/+1 label column, comma-delimited.
inline void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    char buf[40];
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        for (std::size_t j = 0; j < ds.n_cols; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.at(i, j));
            out << buf << ',';
        }
        out << ds.labels[i] << '\n';
    }
    if (!out) throw DataError("failed writing " + path);
}

/// Writes the key=value metadata sidecar next to a generated dataset.
inline void write_meta_sidecar(const Dataset& ds, const std::string& dataset_path) {
    std::ofstream out(dataset_path + ".meta");
    if (!out) throw DataError("cannot write " + dataset_path + ".meta");
    for (const auto& [key, value] : ds.meta) out << key << '=' << value << '\n';
}

}  // namespace marginboost
