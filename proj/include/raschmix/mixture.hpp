#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cml.hpp"
#include "core_data.hpp"
#include "rng.hpp"
#include "scoredist.hpp"
#include "stats.hpp"

namespace raschmix {

// EM estimation of the K-class Rasch mixture
//   L = prod_i sum_k pi_k * h(y_i | r_i, beta^(k)) * g(r_i | delta^(k))
// with CML item fits per class in the M-step, plus BIC selection over K
// and over the score-model specification.

class estimation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MixtureSpec {
    int K = 1;
    ScoreKind score_kind = ScoreKind::mean_variance;
    bool restricted = true;  // one score distribution shared by all classes
    int n_starts = 5;
    int max_em_iter = 500;
    double em_tol = 1e-8;  // relative logL change
    std::uint64_t seed = 0;
};

struct MixtureFit {
    MixtureSpec spec;
    std::vector<double> pi;                   // K mixing weights, ascending
    std::vector<std::vector<double>> beta_k;  // K difficulty vectors, sum-zero each
    std::vector<ScoreModel> score_models;     // size K, or 1 when restricted
    std::vector<double> posterior;            // n x K row-major
    int n = 0;
    double loglik = -std::numeric_limits<double>::infinity();
    int df = 0;
    int n_effective = 0;
    double bic = std::numeric_limits<double>::quiet_NaN();
    int em_iterations = 0;
    bool converged = false;
    int best_start_index = -1;
    int degenerate_starts = 0;
    std::vector<double> loglik_trace;  // per-iteration logL of the winning start

    const ScoreModel& score_model(int k) const {
        return score_models[spec.restricted ? 0 : static_cast<std::size_t>(k)];
    }
    double posterior_at(int i, int k) const {
        return posterior[static_cast<std::size_t>(i) * spec.K + k];
    }
};

inline int df_count(int K, int m, ScoreKind kind, bool restricted) {
    return (K - 1) + K * (m - 1) + score_param_count(kind, m) * (restricted ? 1 : K);
}

inline std::string model_label(ScoreKind kind, bool restricted) {
    return restricted ? "restricted (" + to_string(kind) + ")" : to_string(kind);
}

namespace detail {

inline void require_interior_scores(const ResponseMatrix& data, const char* who) {
    for (int i = 0; i < data.n(); ++i) {
        const int r = data.row_score(i);
        if (r == 0 || r == data.m())
            throw data_error(std::string(who) + ": person '" + data.person_id(i) +
                             "' has an extreme score; apply extreme filtering first");
    }
}

// log h(y_i | r_i, beta) for one class, all persons
inline void class_log_h(const ResponseMatrix& data, std::span<const double> beta,
                        std::span<double> out) {
    const int m = data.m();
    std::vector<double> log_eps(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) log_eps[j] = -beta[j];
    const EsfTable t = esf(log_eps, 0);
    for (int i = 0; i < data.n(); ++i) {
        const auto row = data.row(i);
        double dot = 0.0;
        for (int j = 0; j < m; ++j)
            if (row[j]) dot += beta[j];
        out[i] = -dot - t.log_gamma[data.row_score(i)];
    }
}

struct EmStart {
    std::vector<double> pi;
    std::vector<std::vector<double>> beta_k;
    std::vector<ScoreModel> score_models;  // size K, or 1 when restricted
    std::vector<double> posterior;         // n x K
    double loglik = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

inline std::optional<EmStart> run_em_start(const ResponseMatrix& data,
                                           const MixtureSpec& spec,
                                           const ScoreModel* shared_model,
                                           std::uint64_t start_seed) {
    const int n = data.n();
    const int m = data.m();
    const int K = spec.K;
    const std::vector<int>& scores = data.row_scores();

    EmStart st;
    st.pi.assign(static_cast<std::size_t>(K), 0.0);
    st.beta_k.assign(static_cast<std::size_t>(K),
                     std::vector<double>(static_cast<std::size_t>(m), 0.0));
    st.score_models.assign(spec.restricted ? 1 : static_cast<std::size_t>(K), ScoreModel{});
    if (spec.restricted) st.score_models[0] = *shared_model;
    st.posterior.resize(static_cast<std::size_t>(n) * K);

    Rng rng(start_seed);
    for (int i = 0; i < n; ++i) {
        const std::vector<double> row = rng.dirichlet_uniform(K);
        std::copy(row.begin(), row.end(),
                  st.posterior.begin() + static_cast<std::size_t>(i) * K);
    }

    // shared log g by raw score (restricted case only)
    std::vector<double> shared_lp;
    if (spec.restricted) shared_lp = shared_model->log_probs();

    std::vector<double> weights_k(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> log_h(
        static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<std::vector<double>> lp_k(static_cast<std::size_t>(K));
    std::vector<double> row_terms(static_cast<std::size_t>(K));

    CmlOptions cml_opt;
    cml_opt.tol = 1e-10;
    cml_opt.clamp_degenerate = true;

    double ll_old = -std::numeric_limits<double>::infinity();
    const double collapse_floor = 1.0 / (10.0 * n);

    for (int it = 0; it < spec.max_em_iter; ++it) {
        // mixing weights from the current posteriors
        for (int k = 0; k < K; ++k) st.pi[k] = 0.0;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < K; ++k)
                st.pi[k] += st.posterior[static_cast<std::size_t>(i) * K + k];
        for (int k = 0; k < K; ++k) {
            st.pi[k] /= n;
            if (st.pi[k] < collapse_floor) return std::nullopt;  // collapsed class
        }

        // M-step: per-class weighted CML and score-distribution fits
        for (int k = 0; k < K; ++k) {
            for (int i = 0; i < n; ++i)
                weights_k[i] = st.posterior[static_cast<std::size_t>(i) * K + k];
            const CmlFit cml = fit_cml_stats(cml_stats(data, weights_k), cml_opt,
                                             st.beta_k[k], data.item_names());
            st.beta_k[k] = cml.beta;
            class_log_h(data, st.beta_k[k], log_h[k]);
            if (spec.restricted) {
                lp_k[k] = shared_lp;
            } else {
                st.score_models[k] = fit_scoredist(scores, weights_k, m, spec.score_kind);
                lp_k[k] = st.score_models[k].log_probs();
            }
        }

        // E-step + full-likelihood evaluation.  When the score model is
        // restricted the shared g factor cancels from the posterior ratio,
        // so the softmax omits it; the total logL still includes it.
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            const int r = scores[i];
            for (int k = 0; k < K; ++k) {
                double t = std::log(st.pi[k]) + log_h[k][i];
                if (!spec.restricted) t += lp_k[k][r - 1];
                row_terms[k] = t;
            }
            const double lse = log_sum_exp(row_terms);
            ll += lse;
            if (spec.restricted) ll += shared_lp[r - 1];
            double rowsum = 0.0;
            for (int k = 0; k < K; ++k) {
                const double p = std::exp(row_terms[k] - lse);
                st.posterior[static_cast<std::size_t>(i) * K + k] = p;
                rowsum += p;
            }
            assert(std::abs(rowsum - 1.0) < 1e-10);
            (void)rowsum;
        }

        st.trace.push_back(ll);
        st.loglik = ll;
        st.iterations = it + 1;
        if (it > 0 && std::abs(ll - ll_old) / (1.0 + std::abs(ll)) < spec.em_tol) {
            st.converged = true;
            break;
        }
        ll_old = ll;
    }
    return st;
}

}  // namespace detail

// log of the mixture likelihood at given parameters (score_models has
// size K, or size 1 shared across classes when restricted)
inline double mixture_loglik(const ResponseMatrix& data, std::span<const double> pi,
                             const std::vector<std::vector<double>>& beta_k,
                             const std::vector<ScoreModel>& score_models, bool restricted) {
    const int n = data.n();
    const int K = static_cast<int>(pi.size());
    if (K < 1 || beta_k.size() != static_cast<std::size_t>(K))
        throw std::invalid_argument("mixture_loglik: dimension mismatch");
    if (score_models.size() != (restricted ? 1u : static_cast<std::size_t>(K)))
        throw std::invalid_argument("mixture_loglik: score model count mismatch");
    for (const auto& b : beta_k)
        if (b.size() != static_cast<std::size_t>(data.m()))
            throw std::invalid_argument("mixture_loglik: beta length mismatch");
    detail::require_interior_scores(data, "mixture_loglik");

    std::vector<std::vector<double>> log_h(
        static_cast<std::size_t>(K), std::vector<double>(static_cast<std::size_t>(n)));
    std::vector<std::vector<double>> lp(score_models.size());
    for (std::size_t k = 0; k < score_models.size(); ++k) lp[k] = score_models[k].log_probs();
    for (int k = 0; k < K; ++k) detail::class_log_h(data, beta_k[k], log_h[k]);

    double ll = 0.0;
    std::vector<double> terms(static_cast<std::size_t>(K));
    for (int i = 0; i < n; ++i) {
        const int r = data.row_score(i);
        for (int k = 0; k < K; ++k) {
            const std::vector<double>& lpk = restricted ? lp[0] : lp[k];
            terms[k] = std::log(pi[k]) + log_h[k][i] + lpk[r - 1];
        }
        ll += log_sum_exp(terms);
    }
    return ll;
}

inline double mixture_loglik(const ResponseMatrix& data, const MixtureFit& fit) {
    return mixture_loglik(data, fit.pi, fit.beta_k, fit.score_models, fit.spec.restricted);
}

inline MixtureFit em_fit(const ResponseMatrix& data, const MixtureSpec& spec) {
    if (spec.K < 1) throw std::invalid_argument("em_fit: K must be >= 1");
    if (spec.n_starts < 1) throw std::invalid_argument("em_fit: n_starts must be >= 1");
    if (spec.max_em_iter < 1) throw std::invalid_argument("em_fit: max_em_iter must be >= 1");
    if (!(spec.em_tol > 0.0)) throw std::invalid_argument("em_fit: em_tol must be > 0");
    detail::require_interior_scores(data, "em_fit");
    if (spec.K > data.distinct_pattern_count())
        throw data_error("em_fit: K = " + std::to_string(spec.K) +
                         " exceeds the number of distinct response patterns (" +
                         std::to_string(data.distinct_pattern_count()) + ")");

    // Restricted semantics: one shared delta fitted from all persons with
    // unit weight (the per-class posterior weights sum to 1 per person, so
    // this is the exact M-step solution and never changes across iterations).
    ScoreModel shared;
    if (spec.restricted) {
        std::vector<double> unit(static_cast<std::size_t>(data.n()), 1.0);
        shared = fit_scoredist(data.row_scores(), unit, data.m(), spec.score_kind);
        shared.restricted = true;
    }

    std::optional<detail::EmStart> best;
    int best_index = -1;
    int degenerate = 0;
    std::string last_error = "class collapsed below 1/(10n) in every start";
    for (int s = 0; s < spec.n_starts; ++s) {
        std::optional<detail::EmStart> st;
        try {
            st = detail::run_em_start(data, spec, spec.restricted ? &shared : nullptr,
                                      derive_seed(spec.seed, static_cast<std::uint64_t>(s)));
        } catch (const std::exception& e) {
            // a start can drive a class onto a degenerate corner (e.g. all
            // items degenerate under its weights); treat like a collapse
            last_error = e.what();
            st = std::nullopt;
        }
        if (!st) {
            ++degenerate;
            continue;
        }
        if (!best || st->loglik > best->loglik) {
            best = std::move(st);
            best_index = s;
        }
    }
    if (!best)
        throw estimation_error("em_fit: no usable start at K = " + std::to_string(spec.K) +
                               " (" + last_error + ")");

    // canonical label order: ascending pi, ties by first item difficulty
    const int K = spec.K;
    std::vector<int> order(static_cast<std::size_t>(K));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (best->pi[a] != best->pi[b]) return best->pi[a] < best->pi[b];
        if (best->beta_k[a][0] != best->beta_k[b][0]) return best->beta_k[a][0] < best->beta_k[b][0];
        return a < b;
    });

    MixtureFit fit;
    fit.spec = spec;
    fit.n = data.n();
    fit.pi.resize(static_cast<std::size_t>(K));
    fit.beta_k.resize(static_cast<std::size_t>(K));
    if (spec.restricted) {
        fit.score_models = {best->score_models[0]};
    } else {
        fit.score_models.resize(static_cast<std::size_t>(K));
    }
    fit.posterior.resize(static_cast<std::size_t>(data.n()) * K);
    for (int k = 0; k < K; ++k) {
        fit.pi[k] = best->pi[order[k]];
        fit.beta_k[k] = std::move(best->beta_k[order[k]]);
        if (!spec.restricted) fit.score_models[k] = std::move(best->score_models[order[k]]);
        for (int i = 0; i < data.n(); ++i)
            fit.posterior[static_cast<std::size_t>(i) * K + k] =
                best->posterior[static_cast<std::size_t>(i) * K + order[k]];
    }
    fit.loglik = best->loglik;
    fit.em_iterations = best->iterations;
    fit.converged = best->converged;
    fit.best_start_index = best_index;
    fit.degenerate_starts = degenerate;
    fit.loglik_trace = std::move(best->trace);
    fit.df = df_count(K, data.m(), spec.score_kind, spec.restricted);
    fit.n_effective = data.n();
    fit.bic = -2.0 * fit.loglik + fit.df * std::log(static_cast<double>(fit.n_effective));
    return fit;
}

// ---- model selection ---------------------------------------------------

struct SelectionRow {
    std::string model_label;
    int k = 0;
    bool ok = false;
    std::string error;  // when !ok
    MixtureFit fit;     // valid when ok
};

struct SelectionResult {
    std::vector<SelectionRow> rows;
    int chosen = -1;  // index into rows; -1 when no fit succeeded

    int chosen_k() const { return chosen >= 0 ? rows[chosen].k : -1; }
    const SelectionRow& chosen_row() const {
        if (chosen < 0) throw estimation_error("selection: no feasible model");
        return rows[chosen];
    }
};

namespace detail {

// argmin BIC; ties within 1e-6 go to the earlier row (rows are ordered
// from most parsimonious to least by construction)
inline void choose_by_bic(SelectionResult& res) {
    constexpr double kTie = 1e-6;
    for (int i = 0; i < static_cast<int>(res.rows.size()); ++i) {
        if (!res.rows[i].ok) continue;
        if (res.chosen < 0 || res.rows[i].fit.bic < res.rows[res.chosen].fit.bic - kTie)
            res.chosen = i;
    }
}

}  // namespace detail

// Fit every K in [k_min, k_max]; K with no usable start is reported as a
// failed row, not a fatal error.
inline SelectionResult select_k(const ResponseMatrix& data, int k_min, int k_max,
                                const MixtureSpec& base) {
    if (k_min < 1 || k_max < k_min)
        throw std::invalid_argument("select_k: need 1 <= kmin <= kmax");
    SelectionResult res;
    for (int k = k_min; k <= k_max; ++k) {
        MixtureSpec spec = base;
        spec.K = k;
        spec.seed = derive_seed(base.seed, static_cast<std::uint64_t>(k));
        SelectionRow row;
        row.k = k;
        row.model_label = model_label(base.score_kind, base.restricted);
        try {
            row.fit = em_fit(data, spec);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    detail::choose_by_bic(res);
    return res;
}

// Fit the four score-model candidates at fixed K, in the canonical order
// saturated, restricted (saturated), mean-variance, restricted (mean-variance).
inline SelectionResult select_score_model(const ResponseMatrix& data, int K,
                                          const MixtureSpec& base) {
    if (K < 1) throw std::invalid_argument("select_score_model: K must be >= 1");
    const std::pair<ScoreKind, bool> candidates[] = {
        {ScoreKind::saturated, false},
        {ScoreKind::saturated, true},
        {ScoreKind::mean_variance, false},
        {ScoreKind::mean_variance, true},
    };
    SelectionResult res;
    std::uint64_t idx = 0;
    for (const auto& [kind, restricted] : candidates) {
        MixtureSpec spec = base;
        spec.K = K;
        spec.score_kind = kind;
        spec.restricted = restricted;
        spec.seed = derive_seed(base.seed, static_cast<std::uint64_t>(K), ++idx);
        SelectionRow row;
        row.k = K;
        row.model_label = model_label(kind, restricted);
        try {
            row.fit = em_fit(data, spec);
            row.ok = true;
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        res.rows.push_back(std::move(row));
    }
    // same tie rule as select_k, but order rows by df first so that ties
    // resolve toward parsimony
    std::vector<int> by_df(std::size(candidates));
    std::iota(by_df.begin(), by_df.end(), 0);
    std::stable_sort(by_df.begin(), by_df.end(), [&](int a, int b) {
        const int da = res.rows[a].ok ? res.rows[a].fit.df : 0;
        const int db = res.rows[b].ok ? res.rows[b].fit.df : 0;
        return da < db;
    });
    constexpr double kTie = 1e-6;
    for (int i : by_df) {
        if (!res.rows[i].ok) continue;
        if (res.chosen < 0 || res.rows[i].fit.bic < res.rows[res.chosen].fit.bic - kTie)
            res.chosen = i;
    }
    return res;
}

}  // namespace raschmix
