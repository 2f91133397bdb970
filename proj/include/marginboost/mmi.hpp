// Maximum-minimum-improvement reweighting: given a frozen set of weak
// classifiers, find new simplex weights that maximize the uniform additive
// improvement xi over all training margins,
//
//     max xi   s.t.  sum_t a'_t y_i h_t(x_i) >= m_i + xi   (every i)
//                    sum_t a'_t = 1,  a' >= 0,  xi >= 0.
//
// The original weights with xi = 0 are always feasible, so the solve must
// come back optimal with xi* >= 0 and the new margins dominate the old ones
// pointwise.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "marginboost/boosting.hpp"
#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"
#include "marginboost/margins.hpp"
#include "marginboost/simplex.hpp"

namespace marginboost {

/// Sign matrix with entries y_i * h_t(x_i) in {-1,+1}, bit-packed row-major
/// (a set bit means +1) and expanded on demand.
class PredictionMatrix {
  public:
    PredictionMatrix(std::size_t n, std::size_t t) : n_(n), t_(t), words_per_row_((t + 63) / 64) {
        bits_.assign(n_ * words_per_row_, 0);
    }

    static PredictionMatrix from(const Ensemble& e, const Dataset& ds) {
        PredictionMatrix pm(ds.n_rows, e.size());
        for (std::size_t t = 0; t < e.size(); ++t) {
            for (std::size_t i = 0; i < ds.n_rows; ++i) {
                if (ds.labels[i] * e.trees[t].predict(ds.row(i)) > 0) pm.set_positive(i, t);
            }
        }
        return pm;
    }

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return t_; }

    int entry(std::size_t i, std::size_t t) const {
        const std::uint64_t word = bits_[i * words_per_row_ + t / 64];
        return (word >> (t % 64)) & 1u ? +1 : -1;
    }

    void set_positive(std::size_t i, std::size_t t) {
        bits_[i * words_per_row_ + t / 64] |= std::uint64_t{1} << (t % 64);
    }

  private:
    std::size_t n_, t_, words_per_row_;
    std::vector<std::uint64_t> bits_;
};

/// Variables are (a'_1..a'_T, xi); the objective is xi alone. One >= row per
/// observation plus the simplex equality; xi >= 0 rides on the shared
/// nonnegativity bound.
inline LinearProgram build_mmi_lp(const PredictionMatrix& predictions,
                                  const std::vector<double>& baseline_margins) {
    const std::size_t n = predictions.rows(), t = predictions.cols();
    if (n == 0 || t == 0) throw std::invalid_argument("build_mmi_lp: empty prediction matrix");
    if (baseline_margins.size() != n)
        throw std::invalid_argument("build_mmi_lp: margins length mismatch");

    LinearProgram lp;
    lp.num_vars = t + 1;
    lp.objective.assign(lp.num_vars, 0.0);
    lp.objective[t] = 1.0;
    lp.constraints.assign((n + 1) * lp.num_vars, 0.0);
    lp.relations.assign(n + 1, Relation::GreaterEqual);
    lp.rhs.assign(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = lp.constraints.data() + i * lp.num_vars;
        for (std::size_t k = 0; k < t; ++k) row[k] = predictions.entry(i, k);
        row[t] = -1.0;
        lp.rhs[i] = baseline_margins[i];
    }
    double* simplex_row = lp.constraints.data() + n * lp.num_vars;
    for (std::size_t k = 0; k < t; ++k) simplex_row[k] = 1.0;
    lp.relations[n] = Relation::Equal;
    lp.rhs[n] = 1.0;
    return lp;
}

/// Indices with weight strictly above `tol`.
inline std::vector<std::size_t> support(const std::vector<double>& weights, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("support tolerance must be > 0");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (weights[i] > tol) out.push_back(i);
    return out;
}

struct MMIResult {
    std::vector<double> new_weights;   // a', on the simplex
    double xi_star = 0.0;
    std::vector<std::size_t> support;  // indices with a' > 1e-8
    std::vector<double> new_margins;
    std::size_t lp_iterations = 0;
};

constexpr double kSupportTol = 1e-8;

/// Reweights a frozen ensemble against the training set it was built on
/// (identical observation order).
inline MMIResult mmi_reweight(const Ensemble& e, const Dataset& train) {
    const MarginProfile baseline = margins(e, train);
    const PredictionMatrix pm = PredictionMatrix::from(e, train);
    const LinearProgram lp = build_mmi_lp(pm, baseline.values);
    const LPSolution sol = solve_lp(lp);
    if (sol.status != LPStatus::Optimal)
        throw NumericError(
            "MMI linear program did not solve to optimality although the original "
            "weights are a feasible point");

    MMIResult result;
    result.new_weights.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(e.size()));
    result.xi_star = sol.x[e.size()];
    // degenerate vertices leave 1e-17-scale noise on variables pinned at 0
    const auto snap = [](double& v) {
        if (v < 0.0 && v > -1e-9) v = 0.0;
    };
    snap(result.xi_star);
    for (double& w : result.new_weights) snap(w);
    result.support = support(result.new_weights, kSupportTol);
    result.new_margins.resize(train.n_rows);
    for (std::size_t i = 0; i < train.n_rows; ++i) {
        double m = 0.0;
        for (std::size_t t = 0; t < e.size(); ++t) m += result.new_weights[t] * pm.entry(i, t);
        result.new_margins[i] = m;
    }
    result.lp_iterations = sol.iterations;
    return result;
}

/// The ensemble with the reweighted coefficients swapped in.
inline Ensemble apply_weights(const Ensemble& e, const std::vector<double>& new_weights) {
    if (new_weights.size() != e.size())
        throw std::invalid_argument("apply_weights: weight count mismatch");
    Ensemble out = e;
    out.raw_alphas = new_weights;
    out.weights = new_weights;
    for (double& w : out.weights) w = std::max(w, 0.0);
    return out;
}

}  // namespace marginboost
