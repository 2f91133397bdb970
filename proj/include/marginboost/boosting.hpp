// AdaBoost and Breiman's arc-gv over the weighted tree learner.
//
// Both algorithms share the same round structure: train a tree on the current
// distribution, measure its weighted error, break on eps = 0 or eps >= 1/2
// (keeping completed rounds), reweight the distribution with the normalizer
// Z_t. They differ only in the raw weight: AdaBoost uses
// alpha = ln((1-eps)/eps)/2; arc-gv subtracts ln((1+rho)/(1-rho))/2 where rho
// is the minimum margin of the ensemble built so far, floored at 0.
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"
#include "marginboost/weak_learner.hpp"

namespace marginboost {

struct RoundLog {
    int round = 0;                // 1-based
    double eps = 0.0;             // weighted error of h_t under D^(t)
    double gamma = 0.0;           // edge, 1 - 2*eps
    double alpha = 0.0;           // raw weight assigned this round
    std::optional<double> rho;    // minimum margin before this round (arc-gv)
    double z = 1.0;               // distribution normalizer
    bool completed = false;       // false on the break round
};

/// A voting ensemble: trees with raw algorithm weights and the same weights
/// normalized onto the simplex.
struct Ensemble {
    std::vector<DecisionTree> trees;
    std::vector<double> raw_alphas;
    std::vector<double> weights;  // nonnegative, sums to 1
    std::size_t n_features = 0;

    std::size_t size() const { return trees.size(); }
    int depth() const { return trees.empty() ? 0 : trees.front().depth; }
};

struct BoostResult {
    Ensemble ensemble;
    std::vector<RoundLog> rounds;  // includes the break round, if any
    bool broke_early = false;
    int rounds_completed = 0;
};

/// The first tree already broke: nothing boosted. Carries that round's log.
class BoostBreakError : public NumericError {
  public:
    BoostBreakError(const std::string& what, RoundLog log)
        : NumericError(what), first_round(std::move(log)) {}
    RoundLog first_round;
};

/// 0.5 * ln((1+gamma)/(1-gamma)) - 0.5 * ln((1+rho)/(1-rho)), floored at 0.
/// With rho = 0 this is the AdaBoost weight expressed through the edge.
inline double arcgv_alpha(double gamma, double rho) {
    const auto half_log_ratio = [](double v) { return 0.5 * std::log((1.0 + v) / (1.0 - v)); };
    return std::max(0.0, half_log_ratio(gamma) - half_log_ratio(rho));
}

namespace detail {

inline BoostResult run_boosting(const Dataset& train, int total_rounds, int depth,
                                const ThresholdGrid& grid, bool arc_gv) {
    if (total_rounds < 1) throw std::invalid_argument("need at least one boosting round");
    if (!train.normalized) throw std::invalid_argument("training data must be normalized first");
    if (!train.has_both_classes()) throw DataError("training data must contain both classes");

    const std::size_t n = train.n_rows;
    const TreeTrainer trainer(train, grid);

    BoostResult result;
    result.ensemble.n_features = train.n_cols;
    WeightVector dist(n, 1.0 / static_cast<double>(n));
    std::vector<int> preds(n);

    // arc-gv state: unnormalized vote per observation and total raw weight
    std::vector<double> votes(arc_gv ? n : 0, 0.0);
    double alpha_sum = 0.0;

    for (int t = 1; t <= total_rounds; ++t) {
        DecisionTree tree = trainer.train(dist, depth);
        std::size_t mistakes = 0;
        double eps = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = tree.predict(train.row(i));
            if (preds[i] != train.labels[i]) {
                eps += dist[i];
                ++mistakes;
            }
        }

        RoundLog log;
        log.round = t;
        log.eps = (mistakes == 0) ? 0.0 : eps;
        log.gamma = 1.0 - 2.0 * log.eps;
        if (mistakes == 0 || eps >= 0.5) {
            log.completed = false;
            result.rounds.push_back(log);
            result.broke_early = true;
            break;
        }

        const double eps_c = std::clamp(eps, 1e-12, 1.0 - 1e-12);
        double alpha = 0.5 * std::log((1.0 - eps_c) / eps_c);
        if (arc_gv) {
            double rho = 0.0;
            if (t > 1 && alpha_sum > 0.0) {
                double min_vote = votes[0];
                for (double v : votes) min_vote = std::min(min_vote, v);
                rho = std::clamp(min_vote / alpha_sum, -1.0 + 1e-12, 1.0 - 1e-12);
            }
            const double gamma_c = 1.0 - 2.0 * eps_c;
            alpha = arcgv_alpha(gamma_c, rho);
            log.rho = rho;
        }
        log.alpha = alpha;

        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist[i] *= std::exp(-alpha * train.labels[i] * preds[i]);
            z += dist[i];
        }
        for (double& w : dist) w /= z;
        log.z = z;
        log.completed = true;

        if (arc_gv) {
            for (std::size_t i = 0; i < n; ++i) votes[i] += alpha * train.labels[i] * preds[i];
            alpha_sum += alpha;
        }

        result.ensemble.trees.push_back(std::move(tree));
        result.ensemble.raw_alphas.push_back(alpha);
        result.rounds.push_back(log);
        ++result.rounds_completed;
    }

    if (result.rounds_completed == 0)
        throw BoostBreakError("boosting broke on the first round (eps = " +
                                  std::to_string(result.rounds.front().eps) + ")",
                              result.rounds.front());

    double total = 0.0;
    for (double a : result.ensemble.raw_alphas) total += a;
    result.ensemble.weights.resize(result.ensemble.raw_alphas.size());
    for (std::size_t t = 0; t < result.ensemble.weights.size(); ++t)
        result.ensemble.weights[t] = result.ensemble.raw_alphas[t] / total;
    return result;
}

}  // namespace detail

inline BoostResult adaboost(const Dataset& train, int total_rounds, int depth,
                            const ThresholdGrid& grid) {
    return detail::run_boosting(train, total_rounds, depth, grid, /*arc_gv=*/false);
}

inline BoostResult arcgv(const Dataset& train, int total_rounds, int depth,
                         const ThresholdGrid& grid) {
    return detail::run_boosting(train, total_rounds, depth, grid, /*arc_gv=*/true);
}

/// Weighted vote, sign(0) = +1.
inline int predict_ensemble(const Ensemble& e, std::span<const double> x) {
    double sum = 0.0;
    for (std::size_t t = 0; t < e.trees.size(); ++t) sum += e.weights[t] * e.trees[t].predict(x);
    return sum < 0.0 ? -1 : +1;
}

/// Fraction of rows the weighted vote misclassifies.
inline double error_rate(const Ensemble& e, const Dataset& ds) {
    if (ds.empty()) throw std::invalid_argument("error_rate needs a nonempty dataset");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < ds.n_rows; ++i)
        if (predict_ensemble(e, ds.row(i)) != ds.labels[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(ds.n_rows);
}

/// The ensemble of rounds 1..t with weights renormalized onto the simplex.
inline Ensemble truncate_ensemble(const Ensemble& e, std::size_t t) {
    if (t < 1 || t > e.size()) throw std::invalid_argument("truncation round out of range");
    Ensemble out;
    out.n_features = e.n_features;
    out.trees.assign(e.trees.begin(), e.trees.begin() + t);
    out.raw_alphas.assign(e.raw_alphas.begin(), e.raw_alphas.begin() + t);
    double total = 0.0;
    for (double a : out.raw_alphas) total += a;
    out.weights.resize(t);
    for (std::size_t s = 0; s < t; ++s) out.weights[s] = out.raw_alphas[s] / total;
    return out;
}

}  // namespace marginboost
