// Margin diagnostics for voting ensembles: the margins themselves, cumulative
// margin distributions, the Bernoulli KL function and its partial inverse,
// the equilibrium-margin bound and the older VC-type bounds.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "marginboost/boosting.hpp"
#include "marginboost/dataset.hpp"
#include "marginboost/errors.hpp"

namespace marginboost {

/// One margin per training observation, each in [-1, 1].
struct MarginProfile {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

/// m_i = y_i * sum_t w_t h_t(x_i) with normalized weights. Values are clamped
/// into [-1, 1] to strip accumulation noise; mathematically they already lie
/// there because the weights sit on the simplex and predictions are +-1.
inline MarginProfile margins(const Ensemble& e, const Dataset& ds) {
    if (e.size() == 0) throw std::invalid_argument("margins need a nonempty ensemble");
    if (e.n_features != ds.n_cols)
        throw DataError("ensemble expects " + std::to_string(e.n_features) +
                        " features, dataset has " + std::to_string(ds.n_cols));
    MarginProfile profile;
    profile.values.resize(ds.n_rows);
    for (std::size_t i = 0; i < ds.n_rows; ++i) {
        double sum = 0.0;
        const auto x = ds.row(i);
        for (std::size_t t = 0; t < e.trees.size(); ++t)
            sum += e.weights[t] * e.trees[t].predict(x);
        profile.values[i] = std::clamp(ds.labels[i] * sum, -1.0, 1.0);
    }
    return profile;
}

/// Empirical CDF of the margins: sorted unique values paired with
/// P[m <= theta] (a right-continuous step function ending at 1).
inline std::vector<std::pair<double, double>> cmd(const MarginProfile& profile) {
    if (profile.values.empty()) throw std::invalid_argument("cmd needs a nonempty profile");
    std::vector<double> sorted = profile.values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> out;
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i + 1 == sorted.size() || sorted[i + 1] != sorted[i])
            out.emplace_back(sorted[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

struct MarginStats {
    double min = 0.0;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

/// Order statistics; quantiles interpolate linearly on (n-1) spacing, which
/// makes the even-n median the midpoint of the two central values.
inline MarginStats margin_stats(const MarginProfile& profile) {
    if (profile.values.empty()) throw std::invalid_argument("margin_stats needs a nonempty profile");
    std::vector<double> sorted = profile.values;
    std::sort(sorted.begin(), sorted.end());
    const auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
    };
    MarginStats stats;
    stats.min = sorted.front();
    stats.mean = 0.0;
    for (double v : sorted) stats.mean += v;
    stats.mean /= static_cast<double>(sorted.size());
    stats.median = quantile(0.5);
    stats.q1 = quantile(0.25);
    stats.q3 = quantile(0.75);
    return stats;
}

/// Bernoulli KL divergence q*ln(q/p) + (1-q)*ln((1-q)/(1-p)) with 0*ln0 := 0.
inline double kl_bernoulli(double q, double p) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("kl_bernoulli: q must be in [0,1]");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("kl_bernoulli: p must be in (0,1)");
    double out = 0.0;
    if (q > 0.0) out += q * std::log(q / p);
    if (q < 1.0) out += (1.0 - q) * std::log((1.0 - q) / (1.0 - p));
    return out;
}

/// Partial inverse in p: the unique p in [q, 1) with kl_bernoulli(q, p) = u,
/// found by bisection on [q, 1 - 1e-12] (stop at width < 1e-14 or 200
/// iterations); results are capped at 1 - 1e-12.
inline double kl_inverse(double q, double u) {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("kl_inverse: q must be in [0,1)");
    if (!(u >= 0.0)) throw std::invalid_argument("kl_inverse: u must be >= 0");
    const double cap = 1.0 - 1e-12;
    if (u == 0.0) return q;
    if (q >= cap) return cap;
    if (kl_bernoulli(q, cap) <= u) return cap;
    double lo = q, hi = cap;
    for (int it = 0; it < 200 && (hi - lo) >= 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = (mid <= q) ? 0.0 : kl_bernoulli(q, mid);
        (v < u ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Largest candidate theta in (sqrt(8/|H|), 1] whose empirical margin
/// fraction P[m <= theta] does not exceed q. Candidates are the unique margin
/// values plus the point 1; absent when none qualifies.
inline std::optional<double> theta_hat(const MarginProfile& profile, double q, double ln_h) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("theta_hat: q must be in [0,1]");
    if (!(ln_h > std::log(8.0)))
        throw std::invalid_argument("theta_hat: need ln|H| > ln 8 so the lower limit is < 1");
    if (profile.values.empty()) throw std::invalid_argument("theta_hat: empty profile");

    const double theta_min = std::exp(0.5 * (std::log(8.0) - ln_h));  // sqrt(8/|H|)
    std::vector<double> sorted = profile.values;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    const auto fraction_at = [&](double theta) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), theta) -
                                   sorted.begin()) /
               n;
    };

    if (1.0 > theta_min && fraction_at(1.0) <= q) return 1.0;
    for (std::size_t i = sorted.size(); i-- > 0;) {
        const double c = sorted[i];
        if (i + 1 < sorted.size() && sorted[i + 1] == c) continue;  // skip duplicate
        if (!(c > theta_min) || c > 1.0) continue;
        if (static_cast<double>(i + 1) / n <= q) return c;
    }
    return std::nullopt;
}

struct EMarginRow {
    double q = 0.0;
    double theta = 0.0;   // theta_hat(q)
    double u = 0.0;       // capacity term fed to the KL inverse
    double kl_inv = 0.0;  // D^{-1}(q; u)
};

struct EMarginResult {
    double q_star = 0.0;      // EMargin error
    double theta_star = 0.0;  // EMargin
    double bound_value = 0.0;
    std::vector<EMarginRow> per_q_table;  // rows with defined theta_hat only
};

/// Equilibrium-margin bound: minimizes ln|H|/n + D^{-1}(q; u[theta_hat(q)])
/// over q in {0, 1/n, ..., 1}. q values without a defined theta_hat are
/// skipped; ties pick the smallest q. At q = 1 the KL inverse degenerates and
/// the row is assigned the cap 1 - 1e-12 (the bound is vacuous there).
inline EMarginResult emargin_bound(const MarginProfile& profile, double ln_h, std::size_t n,
                                   double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    const double nn = static_cast<double>(n);
    const double log_term = std::log(2.0 * nn * nn / ln_h);

    EMarginResult result;
    bool have_best = false;
    double best_value = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double q = static_cast<double>(k) / nn;
        const auto theta = theta_hat(profile, q, ln_h);
        if (!theta) continue;
        EMarginRow row;
        row.q = q;
        row.theta = *theta;
        row.u = (8.0 * ln_h / (row.theta * row.theta) * log_term + ln_h + std::log(1.0 / delta)) / nn;
        row.kl_inv = (q < 1.0) ? kl_inverse(q, row.u) : 1.0 - 1e-12;
        result.per_q_table.push_back(row);
        if (!have_best || row.kl_inv < best_value) {
            have_best = true;
            best_value = row.kl_inv;
            result.q_star = q;
            result.theta_star = row.theta;
        }
    }
    if (!have_best) throw NumericError("EMargin bound: margins below resolution limit");
    result.bound_value = ln_h / nn + best_value;
    return result;
}

struct SchapirePoint {
    double theta = 0.0;
    double empirical = 0.0;  // P[m <= theta]
    double capacity = 0.0;
    double total = 0.0;
};

/// Margin-distribution bound curve: P[m <= theta] plus
/// sqrt((ln n * ln|H|)/theta^2 + ln(1/delta)) / sqrt(n), with the big-O
/// constant fixed at 1 (reported as such in output headers).
inline std::vector<SchapirePoint> schapire_bound(const MarginProfile& profile, double ln_h,
                                                 std::size_t n, double delta,
                                                 const std::vector<double>& thetas) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must be in (0,1)");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    std::vector<double> sorted = profile.values;
    std::sort(sorted.begin(), sorted.end());
    const double nn = static_cast<double>(n);

    std::vector<SchapirePoint> curve;
    curve.reserve(thetas.size());
    for (double theta : thetas) {
        if (!(theta > 0.0)) throw std::invalid_argument("schapire_bound: theta must be > 0");
        SchapirePoint pt;
        pt.theta = theta;
        pt.empirical = static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), theta) -
                                           sorted.begin()) /
                       static_cast<double>(sorted.size());
        pt.capacity = std::sqrt((std::log(nn) * ln_h) / (theta * theta) + std::log(1.0 / delta)) /
                      std::sqrt(nn);
        pt.total = pt.empirical + pt.capacity;
        curve.push_back(pt);
    }
    return curve;
}

/// Round-count bound: training error + sqrt(T*d/n), constant fixed at 1.
inline double freund_schapire_bound(double train_error, int rounds, double vc_dim,
                                    std::size_t n) {
    if (!(train_error >= 0.0 && train_error <= 1.0))
        throw std::invalid_argument("train_error must be in [0,1]");
    if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
    if (!(vc_dim > 0.0)) throw std::invalid_argument("vc_dim must be > 0");
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    return train_error +
           std::sqrt(static_cast<double>(rounds) * vc_dim / static_cast<double>(n));
}

struct Dominance {
    double min_improvement = 0.0;
    double avg_improvement = 0.0;
    bool dominates = false;  // min improvement >= -1e-9
};

/// Per-observation improvement of profile `b` over profile `a`.
inline Dominance compare_profiles(const MarginProfile& a, const MarginProfile& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("compare_profiles: profiles differ in length");
    if (a.size() == 0) throw std::invalid_argument("compare_profiles: empty profiles");
    Dominance d;
    d.min_improvement = b.values[0] - a.values[0];
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = b.values[i] - a.values[i];
        d.min_improvement = std::min(d.min_improvement, diff);
        d.avg_improvement += diff;
    }
    d.avg_improvement /= static_cast<double>(a.size());
    d.dominates = d.min_improvement >= -1e-9;
    return d;
}

/// Everything the analyze report carries for one profile.
struct BoundReport {
    std::vector<SchapirePoint> schapire_curve;
    double freund_schapire = 0.0;
    EMarginResult emargin;
    double delta = 0.05;
};

}  // namespace marginboost
