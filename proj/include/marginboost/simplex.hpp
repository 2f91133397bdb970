// Dense two-phase primal simplex for standard-form programs
//
//     maximize c.x   subject to   A x {>=,=} b,   x >= 0
//
// Surplus variables turn >= rows into equalities; rows that cannot start
// from a surplus basis get an artificial variable and phase 1 drives the
// artificials to zero. Pricing is Dantzig's rule; the ratio test breaks ties
// lexicographically over the initial-basis columns (which carry the basis
// inverse), the classic anti-cycling scheme. The reweighting programs are
// extremely degenerate - every margin row is tight at the incumbent weights -
// and index-based tie-breaking wanders such plateaus for tens of thousands
// of zero-step pivots before proving optimality; the lexicographic rule
// terminates directly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "marginboost/errors.hpp"

namespace marginboost {

enum class Relation { GreaterEqual, Equal };

struct LinearProgram {
    std::size_t num_vars = 0;          // v
    std::vector<double> objective;     // c, length v (maximized)
    std::vector<double> constraints;   // row-major r x v
    std::vector<Relation> relations;   // length r
    std::vector<double> rhs;           // length r

    std::size_t num_rows() const { return rhs.size(); }
    double coeff(std::size_t row, std::size_t col) const {
        return constraints[row * num_vars + col];
    }

    void validate() const {
        if (num_vars == 0) throw std::invalid_argument("LP has no variables");
        if (objective.size() != num_vars) throw std::invalid_argument("objective length mismatch");
        if (relations.size() != num_rows() || constraints.size() != num_rows() * num_vars)
            throw std::invalid_argument("constraint shape mismatch");
        for (double v : objective)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite objective entry");
        for (double v : constraints)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite constraint entry");
        for (double v : rhs)
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite rhs entry");
    }
};

enum class LPStatus { Optimal, Infeasible, Unbounded };

struct LPSolution {
    LPStatus status = LPStatus::Optimal;
    std::vector<double> x;
    double objective_value = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

class SimplexTableau {
  public:
    SimplexTableau(const LinearProgram& lp, std::size_t max_iterations)
        : v_(lp.num_vars), r_(lp.num_rows()), max_iterations_(max_iterations) {
        // column layout: structural | surplus (one per >= row) | artificial
        surplus_col_.assign(r_, SIZE_MAX);
        std::size_t ns = 0;
        for (std::size_t i = 0; i < r_; ++i)
            if (lp.relations[i] == Relation::GreaterEqual) surplus_col_[i] = v_ + ns++;
        art_start_ = v_ + ns;

        std::vector<std::size_t> art_rows;
        for (std::size_t i = 0; i < r_; ++i) {
            // a >= row with negative rhs flips into -a.x + s = -b with the
            // surplus basic; everything else needs an artificial
            const bool surplus_basis = surplus_col_[i] != SIZE_MAX && lp.rhs[i] < 0.0;
            if (!surplus_basis) art_rows.push_back(i);
        }
        cols_ = art_start_ + art_rows.size();
        tab_.assign(r_ * (cols_ + 1), 0.0);
        basis_.assign(r_, SIZE_MAX);
        banned_.assign(cols_, false);

        std::size_t next_art = art_start_;
        for (std::size_t i = 0; i < r_; ++i) {
            const double sign = lp.rhs[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < v_; ++j) at(i, j) = sign * lp.coeff(i, j);
            if (surplus_col_[i] != SIZE_MAX) at(i, surplus_col_[i]) = -sign;
            rhs(i) = sign * lp.rhs[i];
            if (surplus_col_[i] != SIZE_MAX && lp.rhs[i] < 0.0) {
                basis_[i] = surplus_col_[i];
            } else {
                basis_[i] = next_art;
                at(i, next_art) = 1.0;
                ++next_art;
            }
        }
        // the initial basis columns hold B^{-1} from here on; the
        // lexicographic ratio test orders rows by them
        lex_cols_ = basis_;
        // pristine copy: final basic values are re-solved against it so
        // thousands of pivots of tableau drift never reach the solution
        initial_tab_ = tab_;
    }

    LPSolution solve(const LinearProgram& lp) {
        LPSolution sol;
        if (art_start_ < cols_ && !phase_one()) {
            sol.status = LPStatus::Infeasible;
            sol.iterations = iterations_;
            return sol;
        }

        // phase 2 objective: original costs, artificials banned
        for (std::size_t j = art_start_; j < cols_; ++j) banned_[j] = true;
        cost_.assign(cols_, 0.0);
        for (std::size_t j = 0; j < v_; ++j) cost_[j] = lp.objective[j];
        rebuild_reduced();

        if (!iterate()) {
            sol.status = LPStatus::Unbounded;
            sol.iterations = iterations_;
            return sol;
        }

        sol.status = LPStatus::Optimal;
        sol.x.assign(v_, 0.0);
        std::vector<double> basic_values;
        if (resolve_basis(basic_values)) {
            for (std::size_t i = 0; i < r_; ++i)
                if (basis_[i] < v_) sol.x[basis_[i]] = basic_values[i];
        } else {
            for (std::size_t i = 0; i < r_; ++i)
                if (basis_[i] < v_) sol.x[basis_[i]] = rhs(i);
        }
        sol.objective_value = 0.0;
        for (std::size_t j = 0; j < v_; ++j) sol.objective_value += lp.objective[j] * sol.x[j];
        sol.iterations = iterations_;
        return sol;
    }

  private:
    static constexpr double kPivotTol = 1e-10;
    static constexpr double kCostTol = 1e-7;    // above the update-noise floor
    static constexpr double kVerifyTol = 1e-5;  // entering costs below this re-verify
    static constexpr double kFeasTol = 1e-8;
    static constexpr double kLexTol = 1e-12;
    static constexpr std::size_t kRebuildPeriod = 256;  // reduced-cost refresh

    // Recomputes the reduced-cost row and objective from the tableau; long
    // pivot chains otherwise accumulate noise that manufactures phantom
    // improving columns on degenerate plateaus.
    void rebuild_reduced() {
        reduced_ = cost_;
        obj_ = 0.0;
        for (std::size_t i = 0; i < r_; ++i) {
            const double cb = cost_[basis_[i]];
            if (cb == 0.0) continue;
            obj_ += cb * rhs(i);
            for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= cb * at(i, j);
        }
        for (std::size_t i = 0; i < r_; ++i) reduced_[basis_[i]] = 0.0;
    }

    double& at(std::size_t i, std::size_t j) { return tab_[i * (cols_ + 1) + j]; }
    double& rhs(std::size_t i) { return tab_[i * (cols_ + 1) + cols_]; }

    void pivot(std::size_t row, std::size_t col) {
        const double inv = 1.0 / at(row, col);
        for (std::size_t j = 0; j <= cols_; ++j) tab_[row * (cols_ + 1) + j] *= inv;
        at(row, col) = 1.0;
        for (std::size_t i = 0; i < r_; ++i) {
            if (i == row) continue;
            const double factor = at(i, col);
            if (factor == 0.0) continue;
            double* dst = tab_.data() + i * (cols_ + 1);
            const double* src = tab_.data() + row * (cols_ + 1);
            for (std::size_t j = 0; j <= cols_; ++j) dst[j] -= factor * src[j];
            at(i, col) = 0.0;
        }
        obj_ += reduced_[col] * rhs(row);
        const double factor = reduced_[col];
        const double* src = tab_.data() + row * (cols_ + 1);
        for (std::size_t j = 0; j < cols_; ++j) reduced_[j] -= factor * src[j];
        reduced_[col] = 0.0;

        if (basis_[row] >= art_start_) banned_[basis_[row]] = true;  // never re-enters
        basis_[row] = col;
        ++iterations_;
        if (iterations_ > max_iterations_)
            throw NumericError("simplex iteration cap exceeded (" +
                               std::to_string(max_iterations_) + ")");
    }

    // Returns false when no improving column remains (optimum reached).
    // `stop_at` lets phase 1 quit on value once the artificial mass is gone
    // instead of polishing reduced costs through accumulated noise.
    bool iterate(double stop_at = std::numeric_limits<double>::infinity()) {
        std::size_t since_rebuild = 0;
        for (;;) {
            if (obj_ >= stop_at) return true;
            if (since_rebuild >= kRebuildPeriod) {
                rebuild_reduced();
                since_rebuild = 0;
            }

            std::size_t enter = SIZE_MAX;
            double best = kCostTol;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!banned_[j] && reduced_[j] > best) {
                    best = reduced_[j];
                    enter = j;
                }
            }
            // marginal or absent candidates must survive a fresh reduced-cost
            // computation; stale rows otherwise feed phantom pivots
            if (since_rebuild > 0 &&
                (enter == SIZE_MAX || reduced_[enter] < kVerifyTol)) {
                rebuild_reduced();
                since_rebuild = 0;
                continue;
            }
            if (enter == SIZE_MAX) return true;

            const std::size_t leave = select_leaving(enter);
            if (leave == SIZE_MAX) return false;  // improving ray
            pivot(leave, enter);
            ++since_rebuild;
        }
    }

    // Lexicographic minimum-ratio rule: ties on rhs/a break by the rows'
    // entries at the initial-basis columns, scaled by the pivot column.
    std::size_t select_leaving(std::size_t enter) {
        std::size_t leave = SIZE_MAX;
        double best_ratio = 0.0;
        for (std::size_t i = 0; i < r_; ++i) {
            const double a = at(i, enter);
            if (a <= kPivotTol) continue;
            // rhs drifts a few ulps negative on degenerate bases; a negative
            // ratio would walk the basis out of feasibility
            const double ratio = std::max(rhs(i), 0.0) / a;
            if (leave == SIZE_MAX || ratio < best_ratio - kLexTol) {
                leave = i;
                best_ratio = ratio;
                continue;
            }
            if (ratio > best_ratio + kLexTol) continue;
            const double a_best = at(leave, enter);
            for (std::size_t k = 0; k < lex_cols_.size(); ++k) {
                const double vi = at(i, lex_cols_[k]) / a;
                const double vb = at(leave, lex_cols_[k]) / a_best;
                if (vi < vb - kLexTol) {
                    leave = i;
                    best_ratio = ratio;
                    break;
                }
                if (vi > vb + kLexTol) break;
            }
        }
        return leave;
    }

    // Solves B y = b over the pristine constraint data for the final basis
    // (Gaussian elimination, partial pivoting). Returns false when the basis
    // matrix is numerically singular; callers then fall back to the tableau.
    bool resolve_basis(std::vector<double>& values) const {
        const std::size_t n = r_;
        std::vector<double> m(n * n);
        values.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k)
                m[i * n + k] = initial_tab_[i * (cols_ + 1) + basis_[k]];
            values[i] = initial_tab_[i * (cols_ + 1) + cols_];
        }
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < n; ++i)
                if (std::abs(m[perm[i] * n + col]) > std::abs(m[perm[piv] * n + col])) piv = i;
            if (std::abs(m[perm[piv] * n + col]) < 1e-12) return false;
            std::swap(perm[col], perm[piv]);
            const std::size_t pr = perm[col];
            for (std::size_t i = col + 1; i < n; ++i) {
                const std::size_t ri = perm[i];
                const double f = m[ri * n + col] / m[pr * n + col];
                if (f == 0.0) continue;
                for (std::size_t k = col; k < n; ++k) m[ri * n + k] -= f * m[pr * n + k];
                values[ri] -= f * values[pr];
            }
        }
        std::vector<double> y(n);
        for (std::size_t col = n; col-- > 0;) {
            const std::size_t pr = perm[col];
            double acc = values[pr];
            for (std::size_t k = col + 1; k < n; ++k) acc -= m[pr * n + k] * y[k];
            y[col] = acc / m[pr * n + col];
        }
        values = std::move(y);
        return true;
    }

    bool phase_one() {
        // maximize -sum(artificials)
        cost_.assign(cols_, 0.0);
        for (std::size_t j = art_start_; j < cols_; ++j) cost_[j] = -1.0;
        rebuild_reduced();

        if (!iterate(-kFeasTol))
            throw NumericError("phase-1 objective reported unbounded; numeric breakdown");
        if (obj_ < -kFeasTol) return false;  // artificials cannot reach zero

        // drive leftover zero-level artificials out of the basis; the largest
        // available pivot element keeps the multipliers tame
        for (std::size_t i = 0; i < r_; ++i) {
            if (basis_[i] < art_start_) continue;
            std::size_t col = SIZE_MAX;
            double best = kPivotTol;
            for (std::size_t j = 0; j < art_start_; ++j) {
                if (std::abs(at(i, j)) > best) {
                    best = std::abs(at(i, j));
                    col = j;
                }
            }
            if (col != SIZE_MAX) pivot(i, col);
            // otherwise the row is redundant; the artificial stays basic at 0
        }
        return true;
    }

    std::size_t v_, r_, cols_ = 0, art_start_ = 0;
    std::size_t max_iterations_;
    std::vector<double> tab_;
    std::vector<double> initial_tab_;
    std::vector<double> cost_;
    std::vector<double> reduced_;
    std::vector<std::size_t> basis_;
    std::vector<std::size_t> surplus_col_;
    std::vector<std::size_t> lex_cols_;
    std::vector<char> banned_;
    double obj_ = 0.0;
    std::size_t iterations_ = 0;
};

}  // namespace detail

/// Solves the program; exceeding `max_iterations` pivots raises NumericError
/// (distinct from an Unbounded status).
inline LPSolution solve_lp(const LinearProgram& lp, std::size_t max_iterations = 1000000) {
    lp.validate();
    detail::SimplexTableau tableau(lp, max_iterations);
    return tableau.solve(lp);
}

/// Plain-text dump for cross-checking against external solvers:
/// "v r" on the first line, the objective row, then one "coeffs... rel rhs"
/// line per constraint.
inline void dump_lp(const LinearProgram& lp, std::ostream& out) {
    char buf[40];
    out << lp.num_vars << ' ' << lp.num_rows() << '\n';
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", lp.objective[j]);
        out << buf << (j + 1 < lp.num_vars ? " " : "\n");
    }
    for (std::size_t i = 0; i < lp.num_rows(); ++i) {
        for (std::size_t j = 0; j < lp.num_vars; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", lp.coeff(i, j));
            out << buf << ' ';
        }
        out << (lp.relations[i] == Relation::GreaterEqual ? ">=" : "=") << ' ';
        std::snprintf(buf, sizeof(buf), "%.17g", lp.rhs[i]);
        out << buf << '\n';
    }
}

}  // namespace marginboost
