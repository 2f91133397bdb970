// Versioned JSON persistence for trained ensembles.
//
// Floating-point fields are serialized as hex-float strings so that
// load(save(e)) reproduces weights bit-exactly and re-serialization is
// byte-identical. Tree thresholds are not stored: they are re-derived from
// the grid spec, which keeps a single source of truth for grid values.
#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "marginboost/boosting.hpp"
#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"
#include "marginboost/weak_learner.hpp"

namespace marginboost {

constexpr int kModelFormatVersion = 1;

struct ModelProvenance {
    std::string dataset;
    std::string algorithm;  // ADA, ARCGV, MMI
    std::uint64_t seed = 0;
    int rounds_requested = 0;
};

struct ModelFile {
    int version = kModelFormatVersion;
    std::size_t grid_thresholds = 100;
    Ensemble ensemble;
    std::optional<NormParams> normalization;  // fitted on the training data
    ModelProvenance provenance;
};

namespace detail {

inline std::string double_to_hex(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double hex_to_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size()) throw ModelSchemaError("bad numeric literal '" + s + "'");
    return v;
}

inline nlohmann::ordered_json doubles_to_json(const std::vector<double>& values) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (double v : values) arr.push_back(double_to_hex(v));
    return arr;
}

inline std::vector<double> doubles_from_json(const nlohmann::ordered_json& arr) {
    if (!arr.is_array()) throw ModelSchemaError("expected an array of numeric strings");
    std::vector<double> out;
    out.reserve(arr.size());
    for (const auto& item : arr) {
        if (!item.is_string()) throw ModelSchemaError("expected a numeric string");
        out.push_back(hex_to_double(item.get<std::string>()));
    }
    return out;
}

}  // namespace detail

inline std::string serialize_model(const ModelFile& model) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["format_version"] = model.version;
    doc["grid"] = {{"thresholds_per_feature", model.grid_thresholds}};
    doc["num_features"] = model.ensemble.n_features;
    doc["provenance"] = {{"dataset", model.provenance.dataset},
                         {"algorithm", model.provenance.algorithm},
                         {"seed", std::to_string(model.provenance.seed)},
                         {"rounds_requested", model.provenance.rounds_requested}};
    if (model.normalization) {
        doc["normalization"] = {{"min", detail::doubles_to_json(model.normalization->min)},
                                {"range", detail::doubles_to_json(model.normalization->range)}};
    } else {
        doc["normalization"] = nullptr;
    }
    doc["raw_alphas"] = detail::doubles_to_json(model.ensemble.raw_alphas);
    doc["weights"] = detail::doubles_to_json(model.ensemble.weights);
    json trees = json::array();
    for (const auto& tree : model.ensemble.trees) {
        json t;
        t["depth"] = tree.depth;
        json nodes = json::array();
        for (const auto& node : tree.nodes)
            nodes.push_back(json::array({node.feature, node.threshold_index}));
        t["nodes"] = nodes;
        t["leaves"] = tree.leaf_labels;
        trees.push_back(t);
    }
    doc["trees"] = trees;
    return doc.dump(2) + "\n";
}

inline void save_model(const ModelFile& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << serialize_model(model);
    if (!out) throw DataError("failed writing " + path);
}

inline ModelFile deserialize_model(const std::string& text) {
    using json = nlohmann::ordered_json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelParseError(std::string("model file is not valid JSON: ") + e.what());
    }

    ModelFile model;
    try {
        if (!doc.contains("format_version") || !doc["format_version"].is_number_integer())
            throw ModelSchemaError("missing format_version");
        model.version = doc["format_version"].get<int>();
        if (model.version != kModelFormatVersion)
            throw ModelVersionError("unsupported model format version " +
                                    std::to_string(model.version));

        model.grid_thresholds = doc.at("grid").at("thresholds_per_feature").get<std::size_t>();
        if (model.grid_thresholds < 1) throw ModelSchemaError("grid needs at least one threshold");
        model.ensemble.n_features = doc.at("num_features").get<std::size_t>();

        const auto& prov = doc.at("provenance");
        model.provenance.dataset = prov.at("dataset").get<std::string>();
        model.provenance.algorithm = prov.at("algorithm").get<std::string>();
        model.provenance.seed = std::stoull(prov.at("seed").get<std::string>());
        model.provenance.rounds_requested = prov.at("rounds_requested").get<int>();

        if (!doc.at("normalization").is_null()) {
            NormParams params;
            params.min = detail::doubles_from_json(doc["normalization"].at("min"));
            params.range = detail::doubles_from_json(doc["normalization"].at("range"));
            if (params.min.size() != model.ensemble.n_features ||
                params.range.size() != model.ensemble.n_features)
                throw ModelSchemaError("normalization parameter length mismatch");
            model.normalization = std::move(params);
        }

        model.ensemble.raw_alphas = detail::doubles_from_json(doc.at("raw_alphas"));
        model.ensemble.weights = detail::doubles_from_json(doc.at("weights"));

        const ThresholdGrid grid = build_grid(model.grid_thresholds);
        for (const auto& t : doc.at("trees")) {
            DecisionTree tree;
            tree.depth = t.at("depth").get<int>();
            if (tree.depth < 1) throw ModelSchemaError("tree depth must be >= 1");
            const std::size_t expected_nodes = (std::size_t{1} << tree.depth) - 1;
            const auto& nodes = t.at("nodes");
            if (!nodes.is_array() || nodes.size() != expected_nodes)
                throw ModelSchemaError("tree of depth " + std::to_string(tree.depth) +
                                       " must have " + std::to_string(expected_nodes) + " nodes");
            for (const auto& n : nodes) {
                TreeNode node;
                node.feature = n.at(0).get<int>();
                node.threshold_index = n.at(1).get<int>();
                if (node.feature < 0 ||
                    static_cast<std::size_t>(node.feature) >= model.ensemble.n_features)
                    throw ModelSchemaError("node feature index out of range");
                if (node.threshold_index < 1 ||
                    static_cast<std::size_t>(node.threshold_index) > model.grid_thresholds)
                    throw ModelSchemaError("node threshold index off the grid");
                node.threshold = grid.value(static_cast<std::size_t>(node.threshold_index));
                tree.nodes.push_back(node);
            }
            tree.leaf_labels = t.at("leaves").get<std::vector<int>>();
            if (tree.leaf_labels.size() != expected_nodes + 1)
                throw ModelSchemaError("tree leaf count mismatch");
            for (int label : tree.leaf_labels)
                if (label != -1 && label != +1) throw ModelSchemaError("leaf labels must be -1/+1");
            model.ensemble.trees.push_back(std::move(tree));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ModelSchemaError(std::string("model file schema violation: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ModelSchemaError(std::string("model file schema violation: ") + e.what());
    }

    const std::size_t t = model.ensemble.trees.size();
    if (t == 0) throw ModelSchemaError("model holds no trees");
    if (model.ensemble.raw_alphas.size() != t || model.ensemble.weights.size() != t)
        throw ModelSchemaError("weight arrays do not match the tree count");
    double sum = 0.0;
    for (double w : model.ensemble.weights) {
        if (w < 0.0) throw ModelSchemaError("weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ModelSchemaError("weights must sum to 1 (got " + std::to_string(sum) + ")");
    for (double a : model.ensemble.raw_alphas)
        if (a < 0.0) throw ModelSchemaError("raw alphas must be nonnegative");
    for (std::size_t i = 1; i < t; ++i)
        if (model.ensemble.trees[i].depth != model.ensemble.trees[0].depth)
            throw ModelSchemaError("trees must share one depth");
    return model;
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

}  // namespace marginboost
