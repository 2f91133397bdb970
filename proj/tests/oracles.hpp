// Independent oracles used by the unit and acceptance suites. These
// deliberately avoid the library's solution paths: the LP oracle enumerates
// basic solutions instead of pivoting, the reweighting oracle searches the
// weight simplex directly, and the stump oracles predict by explicit
// comparison instead of the binned scan.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "marginboost/dataset.hpp"
#include "marginboost/simplex.hpp"
#include "marginboost/weak_learner.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// dense linear algebra helpers (self-contained)

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting; returns false when singular.
inline bool solve_square(Matrix a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = a.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (std::abs(a[pivot][col]) < 1e-11) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

// ---------------------------------------------------------------------------
// LP oracle: exhaustive basic-solution enumeration

struct LPOracleResult {
    marginboost::LPStatus status = marginboost::LPStatus::Infeasible;
    double objective = 0.0;
};

namespace detail {

// Row echelon pass over [A|b]; reports rank(A), rank([A|b]) and which rows
// carry pivots (an independent row subset).
inline void row_ranks(Matrix a, std::vector<double> b, std::size_t& rank_a,
                      std::size_t& rank_ab, std::vector<std::size_t>& pivot_rows) {
    const std::size_t r = a.size();
    const std::size_t c = r == 0 ? 0 : a[0].size();
    std::vector<std::size_t> row_of(r);
    for (std::size_t i = 0; i < r; ++i) row_of[i] = i;

    pivot_rows.clear();
    std::size_t row = 0;
    for (std::size_t col = 0; col < c && row < r; ++col) {
        std::size_t best = row;
        for (std::size_t i = row + 1; i < r; ++i)
            if (std::abs(a[i][col]) > std::abs(a[best][col])) best = i;
        if (std::abs(a[best][col]) < 1e-9) continue;
        std::swap(a[row], a[best]);
        std::swap(b[row], b[best]);
        std::swap(row_of[row], row_of[best]);
        for (std::size_t i = 0; i < r; ++i) {
            if (i == row) continue;
            const double f = a[i][col] / a[row][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < c; ++k) a[i][k] -= f * a[row][k];
            b[i] -= f * b[row];
        }
        pivot_rows.push_back(row_of[row]);
        ++row;
    }
    rank_a = row;
    rank_ab = row;
    for (std::size_t i = row; i < r; ++i)
        if (std::abs(b[i]) > 1e-7) {
            rank_ab = row + 1;
            break;
        }
}

inline void next_combination_done(std::vector<std::size_t>& comb, std::size_t n, bool& done) {
    const std::size_t k = comb.size();
    std::size_t i = k;
    while (i-- > 0) {
        if (comb[i] + (k - i) < n) {
            ++comb[i];
            for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
            return;
        }
    }
    done = true;
}

}  // namespace detail

/// Enumerates every basic solution of the equality form (surplus variables
/// appended for >= rows). Optimal value is the best feasible basis; an
/// unbounded certificate is a feasible basis with an improving recession
/// direction. Exact up to tolerances for the small random programs it is
/// meant for.
inline LPOracleResult lp_enumeration_oracle(const marginboost::LinearProgram& lp) {
    using marginboost::LPStatus;
    using marginboost::Relation;
    const std::size_t r = lp.num_rows(), v = lp.num_vars;

    std::size_t ns = 0;
    for (auto rel : lp.relations)
        if (rel == Relation::GreaterEqual) ++ns;
    const std::size_t cols = v + ns;

    Matrix a(r, std::vector<double>(cols, 0.0));
    std::vector<double> b = lp.rhs;
    std::vector<double> cost(cols, 0.0);
    for (std::size_t j = 0; j < v; ++j) cost[j] = lp.objective[j];
    std::size_t s = v;
    for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < v; ++j) a[i][j] = lp.coeff(i, j);
        if (lp.relations[i] == Relation::GreaterEqual) a[i][s++] = -1.0;
    }

    std::size_t rank_a = 0, rank_ab = 0;
    std::vector<std::size_t> pivot_rows;
    detail::row_ranks(a, b, rank_a, rank_ab, pivot_rows);
    if (rank_ab > rank_a) return {LPStatus::Infeasible, 0.0};
    if (rank_a == 0) {
        // no effective constraints: feasible at 0; any positive cost is a ray
        for (std::size_t j = 0; j < cols; ++j)
            if (cost[j] > 1e-9) return {LPStatus::Unbounded, 0.0};
        return {LPStatus::Optimal, 0.0};
    }

    Matrix ar(rank_a, std::vector<double>(cols));
    std::vector<double> br(rank_a);
    for (std::size_t i = 0; i < rank_a; ++i) {
        ar[i] = a[pivot_rows[i]];
        br[i] = b[pivot_rows[i]];
    }

    bool any_feasible = false;
    bool unbounded = false;
    double best = 0.0;

    std::vector<std::size_t> comb(rank_a);
    for (std::size_t i = 0; i < rank_a; ++i) comb[i] = i;
    bool done = cols < rank_a;
    while (!done) {
        Matrix basis(rank_a, std::vector<double>(rank_a));
        for (std::size_t i = 0; i < rank_a; ++i)
            for (std::size_t k = 0; k < rank_a; ++k) basis[i][k] = ar[i][comb[k]];
        std::vector<double> xb;
        if (solve_square(basis, br, xb)) {
            bool feasible = true;
            for (double val : xb)
                if (val < -1e-9) {
                    feasible = false;
                    break;
                }
            if (feasible) {
                double obj = 0.0;
                for (std::size_t k = 0; k < rank_a; ++k) obj += cost[comb[k]] * xb[k];
                if (!any_feasible || obj > best) best = obj;
                any_feasible = true;

                // improving recession direction? need y with B^T y = c_B,
                // then a nonbasic j with c_j - y.a_j > 0 and B^{-1} a_j <= 0
                Matrix bt(rank_a, std::vector<double>(rank_a));
                for (std::size_t i = 0; i < rank_a; ++i)
                    for (std::size_t k = 0; k < rank_a; ++k) bt[i][k] = basis[k][i];
                std::vector<double> cb(rank_a), y;
                for (std::size_t k = 0; k < rank_a; ++k) cb[k] = cost[comb[k]];
                if (solve_square(bt, cb, y)) {
                    for (std::size_t j = 0; j < cols && !unbounded; ++j) {
                        if (std::find(comb.begin(), comb.end(), j) != comb.end()) continue;
                        double reduced = cost[j];
                        std::vector<double> col(rank_a);
                        for (std::size_t i = 0; i < rank_a; ++i) {
                            reduced -= y[i] * ar[i][j];
                            col[i] = ar[i][j];
                        }
                        if (reduced <= 1e-7) continue;
                        std::vector<double> dir;
                        if (!solve_square(basis, col, dir)) continue;
                        bool ray = true;
                        for (double d : dir)
                            if (d > 1e-9) {
                                ray = false;
                                break;
                            }
                        if (ray) unbounded = true;
                    }
                }
            }
        }
        detail::next_combination_done(comb, cols, done);
    }

    if (!any_feasible) return {LPStatus::Infeasible, 0.0};
    if (unbounded) return {LPStatus::Unbounded, 0.0};
    return {LPStatus::Optimal, best};
}

// ---------------------------------------------------------------------------
// reweighting oracle: simplex grid refinement plus exact pair line search

/// Maximizes min_i (sum_t M[i][t] a_t - m[i]) over the weight simplex.
/// M entries are +-1 signs. The returned value is always attained by a
/// feasible point, hence a lower bound on the true optimum.
class SimplexGridOracle {
  public:
    SimplexGridOracle(std::vector<std::vector<int>> signs, std::vector<double> baseline)
        : m_(std::move(signs)), base_(std::move(baseline)), n_(m_.size()), t_(m_[0].size()) {}

    double maximize() {
        std::vector<double> best_alpha(t_, 0.0);
        double best = -1e300;

        // full coarse grid at step 1/8
        std::vector<std::size_t> counts(t_, 0);
        enumerate_compositions(counts, 0, 8, [&](const std::vector<std::size_t>& parts) {
            std::vector<double> alpha(t_);
            for (std::size_t k = 0; k < t_; ++k) alpha[k] = static_cast<double>(parts[k]) / 8.0;
            const double val = objective(alpha);
            if (val > best) {
                best = val;
                best_alpha = alpha;
            }
        });

        // local refinement down to step 1e-3
        for (double h = 1.0 / 16.0; h > 5e-4; h /= 2.0) refine(best_alpha, best, h);

        // exact line search along pair-exchange directions until no move helps
        for (int sweep = 0; sweep < 200; ++sweep) {
            if (!pair_line_search(best_alpha, best)) break;
        }
        return best;
    }

  private:
    double objective(const std::vector<double>& alpha) const {
        double worst = 1e300;
        for (std::size_t i = 0; i < n_; ++i) {
            double dot = 0.0;
            for (std::size_t k = 0; k < t_; ++k) dot += alpha[k] * m_[i][k];
            worst = std::min(worst, dot - base_[i]);
        }
        return worst;
    }

    template <typename F>
    void enumerate_compositions(std::vector<std::size_t>& counts, std::size_t pos,
                                std::size_t remaining, F&& fn) {
        if (pos + 1 == counts.size()) {
            counts[pos] = remaining;
            fn(counts);
            return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
            counts[pos] = c;
            enumerate_compositions(counts, pos + 1, remaining - c, fn);
        }
    }

    void refine(std::vector<double>& best_alpha, double& best, double h) {
        const std::vector<double> center = best_alpha;
        std::vector<double> alpha(t_, 0.0);
        search_offsets(center, alpha, 0, best_alpha, best, h);
    }

    void search_offsets(const std::vector<double>& center, std::vector<double>& alpha,
                        std::size_t pos, std::vector<double>& best_alpha, double& best,
                        double h) {
        if (pos + 1 == t_) {
            double sum = 0.0;
            for (std::size_t k = 0; k + 1 < t_; ++k) sum += alpha[k];
            const double last = 1.0 - sum;
            if (last < 0.0) return;
            alpha[t_ - 1] = last;
            const double val = objective(alpha);
            if (val > best) {
                best = val;
                best_alpha = alpha;
            }
            return;
        }
        for (int step = -2; step <= 2; ++step) {
            const double v = center[pos] + step * h;
            if (v < 0.0 || v > 1.0) continue;
            alpha[pos] = v;
            search_offsets(center, alpha, pos + 1, best_alpha, best, h);
        }
    }

    // Exact maximization of the piecewise-linear objective along
    // alpha + s*(e_to - e_from), s in [-alpha_to, alpha_from]: the optimum is
    // at an interval end or where two active linear pieces cross.
    bool pair_line_search(std::vector<double>& alpha, double& best) {
        bool improved = false;
        std::vector<double> g0(n_), slope(n_);
        for (std::size_t from = 0; from < t_; ++from) {
            for (std::size_t to = 0; to < t_; ++to) {
                if (from == to || alpha[from] <= 0.0) continue;
                for (std::size_t i = 0; i < n_; ++i) {
                    double dot = 0.0;
                    for (std::size_t k = 0; k < t_; ++k) dot += alpha[k] * m_[i][k];
                    g0[i] = dot - base_[i];
                    slope[i] = m_[i][to] - m_[i][from];
                }
                const double lo = -alpha[to], hi = alpha[from];
                std::vector<double> candidates{lo, hi, 0.0};
                for (std::size_t i = 0; i < n_; ++i)
                    for (std::size_t j = i + 1; j < n_; ++j) {
                        const double ds = slope[i] - slope[j];
                        if (std::abs(ds) < 1e-12) continue;
                        const double s = (g0[j] - g0[i]) / ds;
                        if (s > lo && s < hi) candidates.push_back(s);
                    }
                double best_s = 0.0, best_val = -1e300;
                for (double s : candidates) {
                    double worst = 1e300;
                    for (std::size_t i = 0; i < n_; ++i)
                        worst = std::min(worst, g0[i] + s * slope[i]);
                    if (worst > best_val) {
                        best_val = worst;
                        best_s = s;
                    }
                }
                if (best_val > best + 1e-12) {
                    alpha[to] += best_s;
                    alpha[from] -= best_s;
                    alpha[to] = std::max(alpha[to], 0.0);
                    alpha[from] = std::max(alpha[from], 0.0);
                    best = best_val;
                    improved = true;
                }
            }
        }
        return improved;
    }

    std::vector<std::vector<int>> m_;
    std::vector<double> base_;
    std::size_t n_, t_;
};

// ---------------------------------------------------------------------------
// stump / depth-2 oracles by explicit prediction

/// Minimum weighted error over all (feature, threshold, polarity) stumps.
inline double best_stump_error(const marginboost::Dataset& ds,
                               const std::vector<double>& weights,
                               const marginboost::ThresholdGrid& grid,
                               const std::vector<std::size_t>& sample) {
    double best = 1e300;
    for (std::size_t f = 0; f < ds.n_cols; ++f) {
        for (std::size_t j = 1; j <= grid.thresholds_per_feature; ++j) {
            const double t = grid.value(j);
            for (int left : {-1, +1}) {
                double err = 0.0;
                for (std::size_t i : sample) {
                    const int pred = ds.at(i, f) <= t ? left : -left;
                    if (pred != ds.labels[i]) err += weights[i];
                }
                best = std::min(best, err);
            }
        }
    }
    return best;
}

inline double best_stump_error(const marginboost::Dataset& ds,
                               const std::vector<double>& weights,
                               const marginboost::ThresholdGrid& grid) {
    std::vector<std::size_t> all(ds.n_rows);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return best_stump_error(ds, weights, grid, all);
}

/// Minimum weighted error achievable by any depth-2 tree: exhaustive over the
/// root split with exact per-child stump search.
inline double best_depth2_error(const marginboost::Dataset& ds,
                                const std::vector<double>& weights,
                                const marginboost::ThresholdGrid& grid) {
    double best = 1e300;
    for (std::size_t f = 0; f < ds.n_cols; ++f) {
        for (std::size_t j = 1; j <= grid.thresholds_per_feature; ++j) {
            const double t = grid.value(j);
            std::vector<std::size_t> left, right;
            for (std::size_t i = 0; i < ds.n_rows; ++i)
                (ds.at(i, f) <= t ? left : right).push_back(i);
            const double err_left = left.empty() ? 0.0 : best_stump_error(ds, weights, grid, left);
            const double err_right =
                right.empty() ? 0.0 : best_stump_error(ds, weights, grid, right);
            best = std::min(best, err_left + err_right);
        }
    }
    return best;
}

}  // namespace oracles
