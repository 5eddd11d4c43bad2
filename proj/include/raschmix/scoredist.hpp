#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stats.hpp"

namespace raschmix {

// Models for the raw-score distribution g(r | delta) over the interior
// scores r = 1..m-1.  Two specifications: a saturated multinomial (one
// free logit per category beyond the reference, m-2 parameters) and the
// two-parameter mean-variance family
//   g(r | delta) proportional to exp(delta_1 * r/m + delta_2 * 4r(m-r)/m^2).

enum class ScoreKind { saturated, mean_variance };

inline std::string to_string(ScoreKind kind) {
    return kind == ScoreKind::saturated ? "saturated" : "mean-variance";
}

inline ScoreKind parse_score_kind(const std::string& text) {
    if (text == "saturated") return ScoreKind::saturated;
    if (text == "mean-variance" || text == "meanvar") return ScoreKind::mean_variance;
    throw std::invalid_argument("unknown score model '" + text +
                                "' (expected saturated or mean-variance)");
}

inline int score_param_count(ScoreKind kind, int m) {
    return kind == ScoreKind::saturated ? m - 2 : 2;
}

struct ScoreModel {
    ScoreKind kind = ScoreKind::mean_variance;
    bool restricted = false;   // delta shared across latent classes
    int m = 0;                 // item count; categories are 1..m-1
    std::vector<double> delta;

    // log g(r | delta) for r = 1..m-1 (index r-1), normalized
    std::vector<double> log_probs() const {
        if (m < 2) throw std::invalid_argument("score model: m must be >= 2");
        const int ncat = m - 1;
        std::vector<double> t(static_cast<std::size_t>(ncat));
        if (kind == ScoreKind::saturated) {
            if (delta.size() != static_cast<std::size_t>(m - 2))
                throw std::invalid_argument("score model: saturated delta must have length m-2");
            t[0] = 0.0;  // category r = 1 is the reference
            for (int r = 2; r <= ncat; ++r) t[r - 1] = delta[r - 2];
        } else {
            if (delta.size() != 2)
                throw std::invalid_argument("score model: mean-variance delta must have length 2");
            for (int r = 1; r <= ncat; ++r) {
                const double z1 = static_cast<double>(r) / m;
                const double z2 = 4.0 * r * (m - r) / (static_cast<double>(m) * m);
                t[r - 1] = delta[0] * z1 + delta[1] * z2;
            }
        }
        const double lse = log_sum_exp(t);
        for (auto& v : t) v -= lse;
        return t;
    }
};

inline double score_prob(const ScoreModel& model, int r) {
    if (r < 1 || r > model.m - 1)
        throw std::invalid_argument("score_prob: score " + std::to_string(r) +
                                    " outside 1.." + std::to_string(model.m - 1));
    return std::exp(model.log_probs()[r - 1]);
}

inline double score_loglik(std::span<const int> scores, std::span<const double> weights,
                           const ScoreModel& model) {
    if (scores.size() != weights.size())
        throw std::invalid_argument("score_loglik: length mismatch");
    const std::vector<double> lp = model.log_probs();
    double ll = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int r = scores[i];
        if (r < 1 || r > model.m - 1)
            throw std::invalid_argument("score_loglik: score out of range");
        ll += weights[i] * lp[r - 1];
    }
    return ll;
}

namespace detail {

// weighted category totals over r = 1..m-1
inline std::vector<double> score_counts(std::span<const int> scores,
                                        std::span<const double> weights, int m) {
    if (scores.size() != weights.size())
        throw std::invalid_argument("fit_scoredist: length mismatch");
    std::vector<double> counts(static_cast<std::size_t>(m - 1), 0.0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const int r = scores[i];
        if (r < 1 || r > m - 1)
            throw std::invalid_argument("fit_scoredist: score " + std::to_string(r) +
                                        " outside 1.." + std::to_string(m - 1));
        if (weights[i] < 0.0) throw std::invalid_argument("fit_scoredist: negative weight");
        counts[r - 1] += weights[i];
    }
    return counts;
}

inline ScoreModel fit_saturated(std::span<const double> counts, int m) {
    constexpr double kFloor = 1e-10;  // keeps empty categories' loglik finite
    const int ncat = m - 1;
    double total = 0.0;
    for (double c : counts) total += c;
    std::vector<double> p(static_cast<std::size_t>(ncat));
    double psum = 0.0;
    for (int r = 0; r < ncat; ++r) {
        p[r] = std::max(counts[r] / total, kFloor);
        psum += p[r];
    }
    for (auto& v : p) v /= psum;
    ScoreModel model;
    model.kind = ScoreKind::saturated;
    model.m = m;
    model.delta.resize(static_cast<std::size_t>(m - 2));
    for (int r = 2; r <= ncat; ++r) model.delta[r - 2] = std::log(p[r - 1]) - std::log(p[0]);
    return model;
}

inline ScoreModel fit_mean_variance(std::span<const double> counts, int m) {
    const int ncat = m - 1;
    std::vector<double> z1(static_cast<std::size_t>(ncat)), z2(static_cast<std::size_t>(ncat));
    for (int r = 1; r <= ncat; ++r) {
        z1[r - 1] = static_cast<double>(r) / m;
        z2[r - 1] = 4.0 * r * (m - r) / (static_cast<double>(m) * m);
    }
    double total = 0.0, s1 = 0.0, s2 = 0.0;
    for (int r = 0; r < ncat; ++r) {
        total += counts[r];
        s1 += counts[r] * z1[r];
        s2 += counts[r] * z2[r];
    }

    ScoreModel model;
    model.kind = ScoreKind::mean_variance;
    model.m = m;
    model.delta = {0.0, 0.0};

    const double scale = std::max(1.0, total);
    auto loglik = [&](const ScoreModel& mdl) {
        const std::vector<double> lp = mdl.log_probs();
        double ll = 0.0;
        for (int r = 0; r < ncat; ++r) ll += counts[r] * lp[r];
        return ll;
    };

    for (int it = 0; it < 100; ++it) {
        const std::vector<double> lp = model.log_probs();
        double mu1 = 0.0, mu2 = 0.0, c11 = 0.0, c12 = 0.0, c22 = 0.0;
        for (int r = 0; r < ncat; ++r) {
            const double p = std::exp(lp[r]);
            mu1 += p * z1[r];
            mu2 += p * z2[r];
            c11 += p * z1[r] * z1[r];
            c12 += p * z1[r] * z2[r];
            c22 += p * z2[r] * z2[r];
        }
        const double g1 = s1 - total * mu1;
        const double g2 = s2 - total * mu2;
        if (std::max(std::abs(g1), std::abs(g2)) < 1e-12 * scale) break;
        // Hessian = -total * Cov(z); solve the 2x2 Newton system directly
        const double h11 = -total * (c11 - mu1 * mu1);
        const double h12 = -total * (c12 - mu1 * mu2);
        const double h22 = -total * (c22 - mu2 * mu2);
        const double det = h11 * h22 - h12 * h12;
        double d1, d2;
        if (std::abs(det) > 1e-300) {
            d1 = -(h22 * g1 - h12 * g2) / det;
            d2 = -(-h12 * g1 + h11 * g2) / det;
        } else {
            d1 = g1 / scale;
            d2 = g2 / scale;
        }
        const double ll0 = loglik(model);
        double step = 1.0;
        ScoreModel trial = model;
        for (int h = 0; h < 40; ++h) {
            trial.delta[0] = model.delta[0] + step * d1;
            trial.delta[1] = model.delta[1] + step * d2;
            if (loglik(trial) >= ll0 - 1e-12) break;
            step *= 0.5;
        }
        model = trial;
    }
    return model;
}

inline ScoreModel fit_scoredist_counts(std::span<const double> counts, int m, ScoreKind kind) {
    if (m < 2) throw std::invalid_argument("fit_scoredist: m must be >= 2");
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) throw std::invalid_argument("fit_scoredist: empty input (zero total weight)");
    return kind == ScoreKind::saturated ? fit_saturated(counts, m)
                                        : fit_mean_variance(counts, m);
}

}  // namespace detail

inline ScoreModel fit_scoredist(std::span<const int> scores, std::span<const double> weights,
                                int m, ScoreKind kind) {
    const std::vector<double> counts = detail::score_counts(scores, weights, m);
    return detail::fit_scoredist_counts(counts, m, kind);
}

}  // namespace raschmix
