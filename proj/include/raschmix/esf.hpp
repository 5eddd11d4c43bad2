#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "stats.hpp"

namespace raschmix {

// Elementary symmetric functions gamma_r(eps_1..eps_m) of the item
// easiness values eps_j = exp(-beta_j), built with the summation
// recurrence: adding item j maps gamma_r <- gamma_r + eps_j * gamma_{r-1}.
// Every term is non-negative, so the recurrence is forward stable; the
// only hazard is range, which the public interface avoids by working in
// log space.  The linear-domain tables used inside Newton iterations
// (where the scale factor cancels in probability ratios) live in
// raschmix::detail further down.

struct EsfTable {
    int m = 0;
    // log gamma_r over the full item set, r = 0..m
    std::vector<double> log_gamma;
    // log dgamma_r/deps_j = log gamma_{r-1} over items without j;
    // (m+1) x m row-major, row r = 0 is -inf.  Filled only for order >= 1.
    std::vector<double> log_dgamma;

    double log_dgamma_at(int r, int j) const {
        return log_dgamma[static_cast<std::size_t>(r) * m + j];
    }
};

namespace detail {

// log-space summation recurrence over an index subset
inline std::vector<double> esf_log_subset(std::span<const double> log_eps,
                                          std::span<const int> keep) {
    const int k = static_cast<int>(keep.size());
    std::vector<double> g(static_cast<std::size_t>(k) + 1,
                          -std::numeric_limits<double>::infinity());
    g[0] = 0.0;
    int filled = 0;
    for (int j : keep) {
        ++filled;
        for (int r = std::min(filled, k); r >= 1; --r)
            g[r] = log_add_exp(g[r], log_eps[j] + g[r - 1]);
    }
    return g;
}

}  // namespace detail

// gamma over the full set; order >= 1 adds the first-derivative table
// via prefix/suffix combination (leave-one-out values without deflation,
// so no cancellation even for extreme easiness spreads).
inline EsfTable esf(std::span<const double> log_eps, int order = 0) {
    const int m = static_cast<int>(log_eps.size());
    if (m < 1) throw std::invalid_argument("esf: need at least one item");
    for (double v : log_eps)
        if (std::isnan(v)) throw std::invalid_argument("esf: NaN easiness");
    const double neg_inf = -std::numeric_limits<double>::infinity();

    EsfTable table;
    table.m = m;

    if (order <= 0) {
        std::vector<int> all(m);
        for (int j = 0; j < m; ++j) all[j] = j;
        table.log_gamma = detail::esf_log_subset(log_eps, all);
        return table;
    }

    // forward[k] = log gamma over items 0..k-1, backward[k] = over k..m-1
    std::vector<std::vector<double>> forward(m + 1), backward(m + 1);
    forward[0].assign(static_cast<std::size_t>(m) + 1, neg_inf);
    forward[0][0] = 0.0;
    for (int k = 0; k < m; ++k) {
        forward[k + 1] = forward[k];
        for (int r = std::min(k + 1, m); r >= 1; --r)
            forward[k + 1][r] =
                log_add_exp(forward[k + 1][r], log_eps[k] + forward[k + 1][r - 1]);
    }
    backward[m].assign(static_cast<std::size_t>(m) + 1, neg_inf);
    backward[m][0] = 0.0;
    for (int k = m; k-- > 0;) {
        backward[k] = backward[k + 1];
        for (int r = std::min(m - k, m); r >= 1; --r)
            backward[k][r] =
                log_add_exp(backward[k][r], log_eps[k] + backward[k][r - 1]);
    }

    table.log_gamma = forward[m];
    table.log_dgamma.assign(static_cast<std::size_t>(m + 1) * m, neg_inf);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(m) + 1);
    for (int j = 0; j < m; ++j) {
        for (int r = 1; r <= m; ++r) {
            // gamma_{r-1} over items without j
            const int target = r - 1;
            terms.clear();
            const int s_hi = std::min(target, j);
            for (int s = std::max(0, target - (m - 1 - j)); s <= s_hi; ++s)
                terms.push_back(forward[j][s] + backward[j + 1][target - s]);
            table.log_dgamma[static_cast<std::size_t>(r) * m + j] =
                terms.empty() ? neg_inf : log_sum_exp(terms);
        }
    }
    return table;
}

// log gamma_r over the items excluding those in `drop` (each in [0, m))
inline std::vector<double> esf_drop(std::span<const double> log_eps,
                                    std::span<const int> drop) {
    const int m = static_cast<int>(log_eps.size());
    std::vector<char> dropped(static_cast<std::size_t>(m), 0);
    for (int j : drop) {
        if (j < 0 || j >= m) throw std::invalid_argument("esf_drop: index out of range");
        dropped[j] = 1;
    }
    std::vector<int> keep;
    keep.reserve(m);
    for (int j = 0; j < m; ++j)
        if (!dropped[j]) keep.push_back(j);
    return detail::esf_log_subset(log_eps, keep);
}

namespace detail {

// Linear-domain tables for the CML Newton step.  Easiness is rescaled by
// its maximum, u_j = eps_j / max_k eps_k, so every symmetric-function
// term lies in (0, C(m,r)]; the scale factor cancels in the ratios
//   pi_rj  = u_j  gamma_{r-1}^{(-j)}(u)  / gamma_r(u)
//   pi_rjl = u_j u_l gamma_{r-2}^{(-j,-l)}(u) / gamma_r(u).
// If an interior gamma_r(u) underflows to zero the caller must fall back
// to the log-space path.
struct LinearEsf {
    int m = 0;
    std::vector<double> u;       // scaled easiness, max element = 1
    std::vector<double> gamma;   // gamma_r(u), r = 0..m
    std::vector<double> gamma1;  // (m+1) x m row-major: gamma_r(u) without item j
    bool usable = false;         // interior gamma_r all positive
};

inline void linear_esf_subset(std::span<const double> u, int skip_a, int skip_b,
                              std::span<double> out) {
    const int m = static_cast<int>(u.size());
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    int filled = 0;
    for (int j = 0; j < m; ++j) {
        if (j == skip_a || j == skip_b) continue;
        ++filled;
        const double uj = u[j];
        const int hi = std::min(filled, static_cast<int>(out.size()) - 1);
        for (int r = hi; r >= 1; --r) out[r] += uj * out[r - 1];
    }
}

inline LinearEsf linear_esf_tables(std::span<const double> log_eps) {
    LinearEsf t;
    t.m = static_cast<int>(log_eps.size());
    const double shift = *std::max_element(log_eps.begin(), log_eps.end());
    t.u.resize(t.m);
    for (int j = 0; j < t.m; ++j) t.u[j] = std::exp(log_eps[j] - shift);

    t.gamma.assign(static_cast<std::size_t>(t.m) + 1, 0.0);
    linear_esf_subset(t.u, -1, -1, t.gamma);

    t.usable = true;
    for (int r = 1; r < t.m; ++r)
        if (t.gamma[r] <= 0.0 || !std::isfinite(t.gamma[r])) t.usable = false;
    if (!t.usable) return t;

    t.gamma1.assign(static_cast<std::size_t>(t.m + 1) * t.m, 0.0);
    std::vector<double> col(static_cast<std::size_t>(t.m) + 1);
    for (int j = 0; j < t.m; ++j) {
        linear_esf_subset(t.u, j, -1, col);
        for (int r = 0; r <= t.m; ++r)
            t.gamma1[static_cast<std::size_t>(r) * t.m + j] = col[r];
    }
    return t;
}

}  // namespace detail

}  // namespace raschmix
