#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "core_data.hpp"
#include "esf.hpp"

namespace raschmix {

// Weighted conditional maximum likelihood for Rasch item difficulties.
// Conditioning on raw scores removes the person parameters, so the
// likelihood depends on the data only through weighted item totals
// x_j = sum_i w_i y_ij and weighted score counts W_r -- Newton cost is
// independent of n.

struct CmlOptions {
    double tol = 1e-8;      // relative gradient: max_j |g_j| / max(1, total weight)
    int max_iter = 200;
    // Pin items whose weighted mean response is within 1e-10 of 0 or 1 at
    // +/-30 logits instead of erroring.  EM posteriors can transiently
    // starve an item in some class; aborting the whole fit would be wrong.
    bool clamp_degenerate = false;
};

struct CmlFit {
    std::vector<double> beta;        // re-centered to sum zero
    double cond_loglik = 0.0;
    double gradient_norm = 0.0;      // relative gradient at the returned beta
    int iterations = 0;
    bool converged = false;
    std::vector<int> clamped_items;  // indices pinned at +/-30 logits (if any)
};

// Score-aggregated sufficient statistics of the conditional likelihood.
struct CmlStats {
    int m = 0;
    std::vector<double> item_totals;    // x_j, length m
    std::vector<double> score_weights;  // W_r, r = 0..m
    double total_weight = 0.0;
};

inline CmlStats cml_stats(const ResponseMatrix& data, std::span<const double> w) {
    if (w.size() != static_cast<std::size_t>(data.n()))
        throw std::invalid_argument("cml: weight vector length mismatch");
    CmlStats s;
    s.m = data.m();
    s.item_totals.assign(static_cast<std::size_t>(s.m), 0.0);
    s.score_weights.assign(static_cast<std::size_t>(s.m) + 1, 0.0);
    for (int i = 0; i < data.n(); ++i) {
        const double wi = w[i];
        if (wi < 0.0) throw std::invalid_argument("cml: negative weight");
        if (wi == 0.0) continue;
        const int r = data.row_score(i);
        // extreme scores have conditional likelihood 1 regardless of beta;
        // they contribute exactly nothing, so leave them out of the stats
        if (r == 0 || r == s.m) continue;
        s.total_weight += wi;
        s.score_weights[r] += wi;
        const auto row = data.row(i);
        for (int j = 0; j < s.m; ++j)
            if (row[j]) s.item_totals[j] += wi;
    }
    return s;
}

namespace detail {

// -sum_j x_j beta_j - sum_r W_r log gamma_r
inline double cml_loglik_stats(const CmlStats& s, std::span<const double> beta) {
    std::vector<double> log_eps(static_cast<std::size_t>(s.m));
    for (int j = 0; j < s.m; ++j) log_eps[j] = -beta[j];
    const EsfTable t = esf(log_eps, 0);
    double ll = 0.0;
    for (int j = 0; j < s.m; ++j) ll -= s.item_totals[j] * beta[j];
    for (int r = 0; r <= s.m; ++r)
        if (s.score_weights[r] > 0.0) ll -= s.score_weights[r] * t.log_gamma[r];
    return ll;
}

// One evaluation of loglik, gradient and (optionally) Hessian.  Fast path
// uses the linear-domain ESF tables; falls back to log space when the
// easiness spread underflows them.
struct CmlDerivs {
    double loglik = 0.0;
    std::vector<double> grad;     // dl/dbeta_j
    std::vector<double> hess;     // m x m row-major, negative semi-definite
};

inline CmlDerivs cml_derivs(const CmlStats& s, std::span<const double> beta,
                            bool want_hessian) {
    const int m = s.m;
    std::vector<double> log_eps(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) log_eps[j] = -beta[j];

    CmlDerivs d;
    d.grad.assign(static_cast<std::size_t>(m), 0.0);
    if (want_hessian) d.hess.assign(static_cast<std::size_t>(m) * m, 0.0);

    // pi[r*m+j] = P(y_j = 1 | score r), pi2 per pair below
    std::vector<double> pi(static_cast<std::size_t>(m + 1) * m, 0.0);
    std::vector<double> log_gamma;

    const LinearEsf lin = linear_esf_tables(log_eps);
    if (lin.usable) {
        const double shift = log_eps[static_cast<std::size_t>(
            std::max_element(log_eps.begin(), log_eps.end()) - log_eps.begin())];
        log_gamma.resize(static_cast<std::size_t>(m) + 1);
        for (int r = 0; r <= m; ++r) log_gamma[r] = r * shift + std::log(lin.gamma[r]);
        for (int r = 1; r < m; ++r) {
            if (s.score_weights[r] <= 0.0) continue;
            const double inv = 1.0 / lin.gamma[r];
            for (int j = 0; j < m; ++j)
                pi[static_cast<std::size_t>(r) * m + j] =
                    lin.u[j] * lin.gamma1[static_cast<std::size_t>(r - 1) * m + j] * inv;
        }
        if (want_hessian) {
            std::vector<double> pair(static_cast<std::size_t>(m) + 1);
            for (int j = 0; j < m; ++j) {
                for (int l = j + 1; l < m; ++l) {
                    linear_esf_subset(lin.u, j, l, pair);
                    double hjl = 0.0;
                    for (int r = 2; r < m; ++r) {
                        const double wr = s.score_weights[r];
                        if (wr <= 0.0) continue;
                        const double pjl = lin.u[j] * lin.u[l] * pair[r - 2] / lin.gamma[r];
                        hjl -= wr * (pjl - pi[static_cast<std::size_t>(r) * m + j] *
                                               pi[static_cast<std::size_t>(r) * m + l]);
                    }
                    if (s.score_weights[1] > 0.0)
                        hjl += s.score_weights[1] * pi[static_cast<std::size_t>(1) * m + j] *
                               pi[static_cast<std::size_t>(1) * m + l];
                    d.hess[static_cast<std::size_t>(j) * m + l] = hjl;
                    d.hess[static_cast<std::size_t>(l) * m + j] = hjl;
                }
            }
        }
    } else {
        const EsfTable t = esf(log_eps, 1);
        log_gamma = t.log_gamma;
        for (int r = 1; r < m; ++r) {
            if (s.score_weights[r] <= 0.0) continue;
            for (int j = 0; j < m; ++j)
                pi[static_cast<std::size_t>(r) * m + j] =
                    std::exp(log_eps[j] + t.log_dgamma_at(r, j) - t.log_gamma[r]);
        }
        if (want_hessian) {
            for (int j = 0; j < m; ++j) {
                for (int l = j + 1; l < m; ++l) {
                    const int drop[2] = {j, l};
                    const std::vector<double> pair = esf_drop(log_eps, drop);
                    double hjl = 0.0;
                    for (int r = 1; r < m; ++r) {
                        const double wr = s.score_weights[r];
                        if (wr <= 0.0) continue;
                        const double pjl =
                            r >= 2 ? std::exp(log_eps[j] + log_eps[l] + pair[r - 2] -
                                              t.log_gamma[r])
                                   : 0.0;
                        hjl -= wr * (pjl - pi[static_cast<std::size_t>(r) * m + j] *
                                               pi[static_cast<std::size_t>(r) * m + l]);
                    }
                    d.hess[static_cast<std::size_t>(j) * m + l] = hjl;
                    d.hess[static_cast<std::size_t>(l) * m + j] = hjl;
                }
            }
        }
    }

    d.loglik = 0.0;
    for (int j = 0; j < m; ++j) d.loglik -= s.item_totals[j] * beta[j];
    for (int r = 0; r <= m; ++r)
        if (s.score_weights[r] > 0.0) d.loglik -= s.score_weights[r] * log_gamma[r];

    for (int j = 0; j < m; ++j) {
        double acc = -s.item_totals[j];
        for (int r = 1; r < m; ++r)
            if (s.score_weights[r] > 0.0)
                acc += s.score_weights[r] * pi[static_cast<std::size_t>(r) * m + j];
        d.grad[j] = acc;
        if (want_hessian) {
            double hjj = 0.0;
            for (int r = 1; r < m; ++r) {
                const double wr = s.score_weights[r];
                if (wr <= 0.0) continue;
                const double p = pi[static_cast<std::size_t>(r) * m + j];
                hjj -= wr * p * (1.0 - p);
            }
            d.hess[static_cast<std::size_t>(j) * m + j] = hjj;
        }
    }
    return d;
}

}  // namespace detail

inline double conditional_loglik(std::span<const double> beta, const ResponseMatrix& data,
                                 std::span<const double> weights) {
    if (beta.size() != static_cast<std::size_t>(data.m()))
        throw std::invalid_argument("conditional_loglik: beta length mismatch");
    const CmlStats s = cml_stats(data, weights);
    std::vector<double> b(beta.begin(), beta.end());
    return detail::cml_loglik_stats(s, b);
}

inline double conditional_loglik(std::span<const double> beta, const ResponseMatrix& data) {
    const std::vector<double> unit(static_cast<std::size_t>(data.n()), 1.0);
    return conditional_loglik(beta, data, unit);
}

// Core Newton fit on aggregated statistics.  `item_names` is used only
// for degenerate-item diagnostics and may be empty.
inline CmlFit fit_cml_stats(const CmlStats& stats, const CmlOptions& options = {},
                            std::span<const double> beta0 = {},
                            std::span<const std::string> item_names = {}) {
    const int m = stats.m;
    if (m < 2) throw std::invalid_argument("fit_cml: need at least 2 items");
    if (stats.total_weight <= 0.0) throw std::invalid_argument("fit_cml: zero total weight");

    constexpr double kDegenerateTol = 1e-10;
    constexpr double kClampLogit = 30.0;

    CmlFit fit;
    std::vector<char> clamped(static_cast<std::size_t>(m), 0);
    std::vector<double> clamp_value(static_cast<std::size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        const double mean = stats.item_totals[j] / stats.total_weight;
        if (mean > kDegenerateTol && mean < 1.0 - kDegenerateTol) continue;
        if (!options.clamp_degenerate) {
            const std::string name = item_names.empty()
                                         ? "item " + std::to_string(j + 1)
                                         : "item '" + std::string(item_names[j]) + "'";
            throw data_error("degenerate " + name + ": weighted mean response is " +
                             (mean <= kDegenerateTol ? "0" : "1"));
        }
        clamped[j] = 1;
        clamp_value[j] = mean <= kDegenerateTol ? kClampLogit : -kClampLogit;
        fit.clamped_items.push_back(j);
    }

    // free coordinates: not clamped, minus one anchor fixed at 0
    std::vector<int> free_idx;
    int anchor = -1;
    for (int j = 0; j < m; ++j) {
        if (clamped[j]) continue;
        if (anchor < 0)
            anchor = j;
        else
            free_idx.push_back(j);
    }
    if (anchor < 0) throw data_error("fit_cml: every item is degenerate");

    std::vector<double> beta(static_cast<std::size_t>(m), 0.0);
    if (!beta0.empty()) {
        if (beta0.size() != static_cast<std::size_t>(m))
            throw std::invalid_argument("fit_cml: beta0 length mismatch");
        std::copy(beta0.begin(), beta0.end(), beta.begin());
        const double shift = beta[anchor];
        for (auto& b : beta) b -= shift;
    }
    for (int j = 0; j < m; ++j)
        if (clamped[j]) beta[j] = clamp_value[j];

    const int nf = static_cast<int>(free_idx.size());
    const double weight_scale = std::max(1.0, stats.total_weight);
    double loglik = -std::numeric_limits<double>::infinity();

    for (int it = 0; it <= options.max_iter; ++it) {
        const bool last = it == options.max_iter;
        detail::CmlDerivs d = detail::cml_derivs(stats, beta, !last);
        loglik = d.loglik;
        double gmax = 0.0;
        for (int j : free_idx) gmax = std::max(gmax, std::abs(d.grad[j]));
        if (anchor >= 0) gmax = std::max(gmax, std::abs(d.grad[anchor]));
        fit.gradient_norm = gmax / weight_scale;
        fit.iterations = it;
        if (fit.gradient_norm < options.tol) {
            fit.converged = true;
            break;
        }
        if (last) break;
        if (nf == 0) break;  // only the anchor is free: nothing to move

        Eigen::MatrixXd H(nf, nf);
        Eigen::VectorXd g(nf);
        for (int a = 0; a < nf; ++a) {
            g(a) = d.grad[free_idx[a]];
            for (int b = 0; b < nf; ++b)
                H(a, b) = d.hess[static_cast<std::size_t>(free_idx[a]) * m + free_idx[b]];
        }

        // Newton direction; gradient ascent when the Hessian is unusable
        Eigen::VectorXd step(nf);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
        const Eigen::VectorXd& ev = eig.eigenvalues();
        double ev_min = std::numeric_limits<double>::infinity(), ev_max = 0.0;
        for (int a = 0; a < nf; ++a) {
            ev_min = std::min(ev_min, std::abs(ev(a)));
            ev_max = std::max(ev_max, std::abs(ev(a)));
        }
        if (ev_min <= 0.0 || ev_max / ev_min > 1e12) {
            step = g / weight_scale;  // unit-scale ascent direction
        } else {
            step = -(eig.eigenvectors() *
                     (eig.eigenvectors().transpose() * g).cwiseQuotient(ev));
        }

        double scale = 1.0;
        std::vector<double> trial(beta);
        for (int h = 0; h < 40; ++h) {
            for (int a = 0; a < nf; ++a) trial[free_idx[a]] = beta[free_idx[a]] + scale * step(a);
            if (detail::cml_loglik_stats(stats, trial) >= loglik - 1e-12) break;
            scale *= 0.5;
        }
        beta = trial;
    }

    // report under the sum-to-zero identification (loglik is invariant)
    double mean = 0.0;
    for (double b : beta) mean += b;
    mean /= m;
    for (auto& b : beta) b -= mean;
    fit.beta = std::move(beta);
    fit.cond_loglik = loglik;
    return fit;
}

inline CmlFit fit_cml(const ResponseMatrix& data, std::span<const double> weights,
                      const CmlOptions& options = {}, std::span<const double> beta0 = {}) {
    const CmlStats stats = cml_stats(data, weights);
    return fit_cml_stats(stats, options, beta0, data.item_names());
}

inline CmlFit fit_cml(const ResponseMatrix& data, const CmlOptions& options = {}) {
    std::vector<double> w(static_cast<std::size_t>(data.n()), 1.0);
    return fit_cml(data, w, options);
}

}  // namespace raschmix
