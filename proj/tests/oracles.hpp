#pragma once

// Brute-force reference implementations used by the tests and the acceptance
// harness.  Everything here is deliberately naive: exponential-cost subset
// enumeration and finite differences, trusted because they are simple.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <raschmix/core_data.hpp>
#include <raschmix/rng.hpp>
#include <raschmix/stats.hpp>

namespace oracles {

// gamma_r(eps) by enumerating all 2^m subsets (linear domain; fine for m <= 20
// with moderate eps)
inline std::vector<double> esf_enumerate(std::span<const double> eps) {
    const int m = static_cast<int>(eps.size());
    std::vector<double> gamma(static_cast<std::size_t>(m) + 1, 0.0);
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        double prod = 1.0;
        int bits = 0;
        for (int j = 0; j < m; ++j)
            if (mask & (1u << j)) {
                prod *= eps[j];
                ++bits;
            }
        gamma[bits] += prod;
    }
    return gamma;
}

// gamma_{r}(eps without item `drop`) by enumeration
inline std::vector<double> esf_enumerate_drop(std::span<const double> eps, int drop) {
    std::vector<double> rest;
    for (int j = 0; j < static_cast<int>(eps.size()); ++j)
        if (j != drop) rest.push_back(eps[j]);
    return esf_enumerate(rest);
}

// conditional probability of a response row given its raw score, by
// enumerating all patterns with the same score
inline double conditional_pattern_prob(std::span<const std::uint8_t> row,
                                       std::span<const double> beta) {
    const int m = static_cast<int>(beta.size());
    int score = 0;
    double num = 1.0;
    for (int j = 0; j < m; ++j)
        if (row[j]) {
            num *= std::exp(-beta[j]);
            ++score;
        }
    double denom = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        if (std::popcount(mask) != score) continue;
        double prod = 1.0;
        for (int j = 0; j < m; ++j)
            if (mask & (1u << j)) prod *= std::exp(-beta[j]);
        denom += prod;
    }
    return num / denom;
}

// symmetric central difference for a scalar function of a coordinate vector
inline std::vector<double> central_gradient(const std::function<double(std::span<const double>)>& f,
                                            std::span<const double> x, double h = 1e-5) {
    std::vector<double> grad(x.size());
    std::vector<double> point(x.begin(), x.end());
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double save = point[j];
        point[j] = save + h;
        const double up = f(point);
        point[j] = save - h;
        const double down = f(point);
        point[j] = save;
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

inline std::vector<std::string> item_names(int m) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) names.push_back("I" + std::to_string(j + 1));
    return names;
}

// Rasch sample with normal abilities: the generic test fixture
inline raschmix::ResponseMatrix rasch_sample(int n, int m, std::span<const double> beta,
                                             std::uint64_t seed, double ability_sd = 1.0) {
    raschmix::Rng rng(seed);
    std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        const double theta = ability_sd * rng.normal();
        for (int j = 0; j < m; ++j)
            entries[static_cast<std::size_t>(i) * m + j] =
                rng.uniform() < raschmix::logistic(theta - beta[j]) ? 1 : 0;
    }
    return raschmix::ResponseMatrix(std::move(entries), n, m, item_names(m));
}

// equidistant difficulties on [-2, 2]
inline std::vector<double> spread_beta(int m) {
    std::vector<double> beta(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) beta[j] = m == 1 ? 0.0 : -2.0 + 4.0 * j / (m - 1);
    return beta;
}

}  // namespace oracles
