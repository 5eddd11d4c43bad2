#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <raschmix/dif.hpp>
#include <raschmix/rng.hpp>
#include <raschmix/sim.hpp>
#include <raschmix/stats.hpp>

#include "oracles.hpp"

using raschmix::ResponseMatrix;

namespace {

ResponseMatrix stack(const ResponseMatrix& a, const ResponseMatrix& b) {
    std::vector<std::uint8_t> entries;
    entries.reserve(static_cast<std::size_t>(a.n() + b.n()) * a.m());
    for (int i = 0; i < a.n(); ++i) {
        const auto row = a.row(i);
        entries.insert(entries.end(), row.begin(), row.end());
    }
    for (int i = 0; i < b.n(); ++i) {
        const auto row = b.row(i);
        entries.insert(entries.end(), row.begin(), row.end());
    }
    return ResponseMatrix(std::move(entries), a.n() + b.n(), a.m(), oracles::item_names(a.m()));
}

}  // namespace

TEST_CASE("chi-square upper tail matches reference values", "[dif]") {
    // classical 5% critical values
    CHECK(std::abs(raschmix::chi_square_upper_tail(3.841, 1) - 0.05) < 1e-3);
    CHECK(std::abs(raschmix::chi_square_upper_tail(5.991, 2) - 0.05) < 1e-3);
    CHECK(std::abs(raschmix::chi_square_upper_tail(11.070, 5) - 0.05) < 1e-3);
    CHECK(std::abs(raschmix::chi_square_upper_tail(18.307, 10) - 0.05) < 1e-3);
    // 1% critical value for one degree of freedom
    CHECK(std::abs(raschmix::chi_square_upper_tail(6.635, 1) - 0.01) < 1e-3);

    CHECK(raschmix::chi_square_upper_tail(0.0, 3) == 1.0);
    CHECK(raschmix::chi_square_upper_tail(500.0, 3) < 1e-12);
    double prev = 1.0;
    for (double x : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double p = raschmix::chi_square_upper_tail(x, 4);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("identical duplicated groups give a zero statistic", "[dif]") {
    const auto half = oracles::rasch_sample(150, 6, oracles::spread_beta(6), 601);
    const auto data = stack(half, half);
    std::vector<std::string> groups;
    for (int i = 0; i < data.n(); ++i) groups.push_back(i < half.n() ? "A" : "B");

    const auto report = raschmix::andersen_lr_test(data, groups);
    CHECK(report.method == "lr");
    CHECK(std::abs(report.statistic) < 1e-6);
    CHECK(report.p_value > 0.999);
    CHECK_FALSE(report.flagged);
    CHECK(report.lr_df == 5);
    for (double c : report.per_item_contrast) CHECK(std::abs(c) < 1e-7);
}

TEST_CASE("likelihood-ratio statistic is never meaningfully negative", "[dif]") {
    // group-wise optima can only improve on the pooled optimum
    const auto data = oracles::rasch_sample(300, 7, oracles::spread_beta(7), 602);
    raschmix::Rng rng(603);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> groups;
        for (int i = 0; i < data.n(); ++i)
            groups.push_back(rng.uniform() < 0.5 ? "left" : "right");
        const auto report = raschmix::andersen_lr_test(data, groups);
        CHECK(report.statistic >= -1e-6);
        CHECK(report.p_value >= 0.0);
        CHECK(report.p_value <= 1.0);
    }
}

TEST_CASE("null grouping rarely triggers the LR flag", "[dif]") {
    int flagged = 0;
    for (int rep = 0; rep < 10; ++rep) {
        const auto data = oracles::rasch_sample(
            400, 6, oracles::spread_beta(6), raschmix::derive_seed(604, rep));
        raschmix::Rng rng(raschmix::derive_seed(605, rep));
        std::vector<std::string> groups;
        for (int i = 0; i < data.n(); ++i)
            groups.push_back(rng.uniform() < 0.5 ? "A" : "B");
        if (raschmix::andersen_lr_test(data, groups).flagged) ++flagged;
    }
    CHECK(flagged <= 3);
}

TEST_CASE("LR test detects planted DIF given the true classes", "[dif]") {
    // coinciding impact and DIF, grouped by the generating class
    int significant = 0;
    int contrast_hits = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        raschmix::ScenarioSpec spec;
        spec.scenario_id = 5;
        spec.theta = 1.0;
        spec.delta = 2.0;
        spec.n = 500;
        spec.m = 8;
        spec.dif_items = {0, 1};
        spec.seed = raschmix::derive_seed(20260815, 100 + rep);
        const auto [data, truth] = raschmix::generate_scenario(spec);

        std::vector<std::string> groups;
        for (int c : truth.latent_class) groups.push_back(c == 0 ? "I" : "II");
        const auto report = raschmix::andersen_lr_test(data, groups);
        if (report.p_value < 0.01) ++significant;

        // the two planted items should carry the largest contrasts
        std::vector<int> order(static_cast<std::size_t>(spec.m));
        for (int j = 0; j < spec.m; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::abs(report.per_item_contrast[a]) > std::abs(report.per_item_contrast[b]);
        });
        const bool planted_on_top = (order[0] == 0 && order[1] == 1) ||
                                    (order[0] == 1 && order[1] == 0);
        if (planted_on_top) ++contrast_hits;
    }
    CHECK(significant >= 18);  // >= 90% of replications
    CHECK(contrast_hits >= 16);
}

TEST_CASE("mixture criterion stays quiet on single-class data", "[dif]") {
    int flagged = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        raschmix::ScenarioSpec spec;
        spec.scenario_id = 1;
        spec.n = 500;
        spec.m = 8;
        spec.dif_items = {0, 1};
        spec.seed = raschmix::derive_seed(20260815, 300 + rep);
        const auto [data, truth] = raschmix::generate_scenario(spec);
        const auto kept = raschmix::filter_extremes(data).first;

        raschmix::MixtureSpec base;
        base.seed = raschmix::derive_seed(20260815, 400 + rep);
        const auto report = raschmix::detect_dif_mixture(kept, base, 2);
        CHECK(report.method == "mixture");
        if (report.flagged) ++flagged;
    }
    CHECK(reps - flagged >= 18);  // no flag in >= 90% of replications
}

TEST_CASE("mixture criterion flags planted DIF without group labels", "[dif]") {
    // pure DIF, no impact; large n keeps the BIC hurdle beatable
    int flagged = 0;
    const int reps = 20;
    for (int rep = 0; rep < reps; ++rep) {
        raschmix::ScenarioSpec spec;
        spec.scenario_id = 2;
        spec.theta = 0.0;
        spec.delta = 2.0;
        spec.n = 8000;
        spec.m = 8;
        spec.dif_items = {0, 1};
        spec.seed = raschmix::derive_seed(20260815, 500 + rep);
        const auto [data, truth] = raschmix::generate_scenario(spec);
        const auto kept = raschmix::filter_extremes(data).first;

        raschmix::MixtureSpec base;
        base.seed = raschmix::derive_seed(20260815, 600 + rep);
        const auto report = raschmix::detect_dif_mixture(kept, base, 2);
        if (report.flagged) {
            ++flagged;
            double top = 0.0;
            for (double c : report.per_item_contrast) top = std::max(top, std::abs(c));
            CHECK(top > 0.5);  // the contrast table actually points at something
        }
    }
    CHECK(flagged > reps / 2);  // majority of replications
}

TEST_CASE("LR input validation", "[dif]") {
    const auto data = oracles::rasch_sample(40, 5, oracles::spread_beta(5), 606);
    SECTION("constant grouping column") {
        const std::vector<std::string> groups(static_cast<std::size_t>(data.n()), "only");
        CHECK_THROWS_MATCHES(raschmix::andersen_lr_test(data, groups), raschmix::data_error,
                             Catch::Matchers::MessageMatches(
                                 Catch::Matchers::ContainsSubstring("at least 2 groups")));
    }
    SECTION("label count mismatch") {
        const std::vector<std::string> groups{"A", "B"};
        CHECK_THROWS_AS(raschmix::andersen_lr_test(data, groups), std::invalid_argument);
    }
    SECTION("alpha out of range") {
        std::vector<std::string> groups;
        for (int i = 0; i < data.n(); ++i) groups.push_back(i % 2 ? "A" : "B");
        CHECK_THROWS_AS(raschmix::andersen_lr_test(data, groups, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(raschmix::andersen_lr_test(data, groups, 1.0), std::invalid_argument);
    }
}

TEST_CASE("group-degenerate item names the group and the item", "[dif]") {
    // group B's interior rows never solve the first item
    std::vector<std::uint8_t> entries{
        1, 0, 1,   // A
        1, 1, 0,   // A
        0, 1, 1,   // A
        0, 1, 1,   // B
        0, 1, 0,   // B
        0, 0, 1,   // B
    };
    const ResponseMatrix data(std::move(entries), 6, 3, oracles::item_names(3));
    const std::vector<std::string> groups{"A", "A", "A", "B", "B", "B"};
    CHECK_THROWS_MATCHES(raschmix::andersen_lr_test(data, groups), raschmix::data_error,
                         Catch::Matchers::MessageMatches(
                             Catch::Matchers::ContainsSubstring("group 'B'") &&
                             Catch::Matchers::ContainsSubstring("item 'I1'")));
}

TEST_CASE("mixture method validates its search bound", "[dif]") {
    const auto data = raschmix::filter_extremes(
        oracles::rasch_sample(100, 5, oracles::spread_beta(5), 607)).first;
    raschmix::MixtureSpec base;
    CHECK_THROWS_AS(raschmix::detect_dif_mixture(data, base, 1), std::invalid_argument);
}
