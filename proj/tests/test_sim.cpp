#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include <raschmix/sim.hpp>
#include <raschmix/stats.hpp>

#include "oracles.hpp"

using raschmix::ScenarioSpec;
using raschmix::StudyConfig;

namespace {

ScenarioSpec make_spec(int scenario, double theta, double delta) {
    ScenarioSpec s;
    s.scenario_id = scenario;
    s.theta = theta;
    s.delta = delta;
    s.n = 100;
    s.m = 6;
    return s;
}

// per-class column means of the responses
std::vector<std::vector<double>> class_means(const raschmix::ResponseMatrix& data,
                                             const std::vector<int>& latent_class) {
    std::vector<std::vector<double>> mean(2, std::vector<double>(static_cast<std::size_t>(data.m()), 0.0));
    std::vector<double> count(2, 0.0);
    for (int i = 0; i < data.n(); ++i) {
        const int c = latent_class[static_cast<std::size_t>(i)];
        count[c] += 1.0;
        const auto row = data.row(i);
        for (int j = 0; j < data.m(); ++j) mean[c][j] += row[j];
    }
    for (int c = 0; c < 2; ++c)
        for (auto& v : mean[c]) v /= std::max(1.0, count[c]);
    return mean;
}

}  // namespace

TEST_CASE("scenario constraints are enforced", "[sim]") {
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(0, 0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(6, 0, 0)), std::invalid_argument);
    // scenario 1: no impact, no DIF
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(1, 1.0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(1, 0, 1.0)), std::invalid_argument);
    // scenario 2: DIF only
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(2, 1.0, 1.0)), std::invalid_argument);
    CHECK_NOTHROW(raschmix::generate_scenario(make_spec(2, 0, 0)));
    // scenario 3: impact only
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(3, 0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(3, 1.0, 1.0)), std::invalid_argument);
    // scenarios 4 and 5 need impact
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(4, 0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(5, 0, 1.0)), std::invalid_argument);
    // negative magnitudes and degenerate sizes
    CHECK_THROWS_AS(raschmix::generate_scenario(make_spec(2, 0, -1.0)), std::invalid_argument);
    {
        auto s = make_spec(1, 0, 0);
        s.n = 0;
        CHECK_THROWS_AS(raschmix::generate_scenario(s), std::invalid_argument);
    }
    {
        auto s = make_spec(4, 1.0, 1.0);
        s.mix = 1.0;
        CHECK_THROWS_AS(raschmix::generate_scenario(s), std::invalid_argument);
    }
    {
        auto s = make_spec(2, 0, 1.0);
        s.dif_items = {2, 2};
        CHECK_THROWS_AS(raschmix::generate_scenario(s), std::invalid_argument);
        s.dif_items = {0, 99};
        CHECK_THROWS_AS(raschmix::generate_scenario(s), std::invalid_argument);
    }
    {
        auto s = make_spec(2, 0, 1.0);
        s.base_beta = {0.0, 0.0};  // wrong length for m = 6
        CHECK_THROWS_AS(raschmix::generate_scenario(s), std::invalid_argument);
    }
}

TEST_CASE("scenario 5 with zero DIF reproduces scenario 3 exactly", "[sim]") {
    auto s3 = make_spec(3, 1.2, 0.0);
    auto s5 = make_spec(5, 1.2, 0.0);
    s3.n = s5.n = 400;
    s3.seed = s5.seed = 777;
    const auto [d3, t3] = raschmix::generate_scenario(s3);
    const auto [d5, t5] = raschmix::generate_scenario(s5);

    REQUIRE(d3.n() == d5.n());
    for (int i = 0; i < d3.n(); ++i) {
        CHECK(t3.ability[i] == t5.ability[i]);
        const auto r3 = d3.row(i);
        const auto r5 = d5.row(i);
        for (int j = 0; j < d3.m(); ++j) CHECK(r3[j] == r5[j]);
    }
    // only the labels differ: scenario 5 ties class to the ability side
    for (int i = 0; i < d5.n(); ++i) {
        CHECK(t3.latent_class[i] == 0);
        CHECK(t5.latent_class[i] == (t5.ability[i] > 0.0 ? 1 : 0));
    }
}

TEST_CASE("item means track the generating difficulties", "[sim]") {
    auto spec = make_spec(1, 0.0, 0.0);
    spec.n = 20000;
    spec.m = 6;
    spec.seed = 901;
    const auto [data, truth] = raschmix::generate_scenario(spec);

    // all abilities are zero, so the solve probability is logistic(-beta_j)
    for (int j = 0; j < spec.m; ++j) {
        double mean = 0.0;
        for (int i = 0; i < data.n(); ++i) mean += data.row(i)[j];
        mean /= data.n();
        CHECK(std::abs(mean - raschmix::logistic(-truth.beta_class1[j])) < 0.015);
    }
    // equidistant difficulties: means strictly decreasing in j
    const auto means = class_means(data, truth.latent_class)[0];
    for (int j = 1; j < spec.m; ++j) CHECK(means[j] < means[j - 1]);
}

TEST_CASE("ground-truth difficulty vectors are sum-zero with the planted contrast", "[sim]") {
    const double delta = 1.5;
    const int m = 6;
    for (const bool split : {false, true}) {
        auto spec = make_spec(2, 0.0, delta);
        spec.m = m;
        spec.dif_items = {0, 1};
        spec.split_delta = split;
        const auto [data, truth] = raschmix::generate_scenario(spec);

        double s1 = 0.0, s2 = 0.0;
        for (int j = 0; j < m; ++j) {
            s1 += truth.beta_class1[j];
            s2 += truth.beta_class2[j];
        }
        CHECK(std::abs(s1) < 1e-12);
        CHECK(std::abs(s2) < 1e-12);

        // recentring spreads the contrast: +delta(1 - 2/m) on the planted
        // items, -2 delta/m elsewhere, identically for both delta modes
        for (int j = 0; j < m; ++j) {
            const double gap = truth.beta_class2[j] - truth.beta_class1[j];
            const double want = (j < 2) ? delta * (1.0 - 2.0 / m) : -2.0 * delta / m;
            INFO((split ? "split" : "one-sided") << ", item " << j + 1);
            CHECK(std::abs(gap - want) < 1e-12);
        }
    }
}

TEST_CASE("default DIF items are the two middle ones", "[sim]") {
    auto spec = make_spec(2, 0.0, 2.0);
    spec.m = 8;
    const auto [data, truth] = raschmix::generate_scenario(spec);
    for (int j = 0; j < spec.m; ++j) {
        const double gap = truth.beta_class2[j] - truth.beta_class1[j];
        if (j == 3 || j == 4)
            CHECK(gap > 1.0);
        else
            CHECK(gap < 0.0);
    }
}

TEST_CASE("planted DIF shows up in the class-wise item means", "[sim]") {
    auto spec = make_spec(2, 0.0, 3.0);
    spec.n = 5000;
    spec.m = 8;
    spec.dif_items = {2, 3};
    spec.seed = 902;
    const auto [data, truth] = raschmix::generate_scenario(spec);
    const auto means = class_means(data, truth.latent_class);
    for (int j = 0; j < spec.m; ++j) {
        const double gap = means[1][j] - means[0][j];
        if (j == 2 || j == 3)
            CHECK(gap < -0.3);  // class II fails the planted items conspicuously
        else
            CHECK(gap > 0.03);  // and finds every other item slightly easier
    }
}

TEST_CASE("scenario 4 decouples class from ability, scenario 5 ties them", "[sim]") {
    auto s4 = make_spec(4, 2.0, 1.0);
    s4.n = 20000;
    s4.seed = 903;
    const auto [d4, t4] = raschmix::generate_scenario(s4);
    double n_high = 0.0, n_ii = 0.0, n_ii_high = 0.0;
    for (int i = 0; i < s4.n; ++i) {
        const bool high = t4.ability[i] > 0.0;
        const bool ii = t4.latent_class[i] == 1;
        n_high += high;
        n_ii += ii;
        n_ii_high += high && ii;
    }
    const double joint = n_ii_high / s4.n;
    const double product = (n_high / s4.n) * (n_ii / s4.n);
    CHECK(std::abs(joint - product) < 0.01);  // independent up to sampling noise

    auto s5 = make_spec(5, 2.0, 1.0);
    s5.n = 2000;
    s5.seed = 904;
    const auto [d5, t5] = raschmix::generate_scenario(s5);
    for (int i = 0; i < s5.n; ++i)
        CHECK(t5.latent_class[i] == (t5.ability[i] > 0.0 ? 1 : 0));
}

TEST_CASE("study grid skips invalid combinations in a fixed order", "[sim]") {
    StudyConfig cfg;
    cfg.scenarios = {1, 2, 3, 5};
    cfg.theta_grid = {0.0, 1.0};
    cfg.delta_grid = {0.0, 1.0};
    cfg.replications = 1;
    cfg.n = 60;
    cfg.m = 5;
    cfg.k_min = 1;
    cfg.k_max = 1;
    cfg.fit.n_starts = 1;
    cfg.seed = 5;
    const auto result = raschmix::run_study(cfg);

    // scenario 1 keeps (0,0); scenario 2 keeps theta 0 with both deltas;
    // scenario 3 keeps (1,0); scenario 5 keeps theta 1 with both deltas
    REQUIRE(result.cells.size() == 6);
    const std::vector<std::array<double, 3>> want{
        {1, 0, 0}, {2, 0, 0}, {2, 0, 1}, {3, 1, 0}, {5, 1, 0}, {5, 1, 1}};
    for (std::size_t c = 0; c < want.size(); ++c) {
        CHECK(result.cells[c].scenario_id == static_cast<int>(want[c][0]));
        CHECK(result.cells[c].theta == want[c][1]);
        CHECK(result.cells[c].delta == want[c][2]);
        CHECK(result.cells[c].seeds.size() == 1);
    }
}

TEST_CASE("study runs are deterministic", "[sim]") {
    StudyConfig cfg;
    cfg.scenarios = {1};
    cfg.theta_grid = {0.0};
    cfg.delta_grid = {0.0};
    cfg.replications = 2;
    cfg.n = 80;
    cfg.m = 5;
    cfg.k_min = 1;
    cfg.k_max = 2;
    cfg.fit.n_starts = 2;
    cfg.seed = 1234;
    const auto a = raschmix::study_to_csv(raschmix::run_study(cfg));
    const auto b = raschmix::study_to_csv(raschmix::run_study(cfg));
    CHECK(a == b);
    CHECK(a.rfind("scenario,theta,delta,n,m,replications,replications_ok,flagged,"
                  "rate_flagged,mean_k_hat\n", 0) == 0);
}

TEST_CASE("a cell where every replication fails is reported missing", "[sim]") {
    StudyConfig cfg;
    cfg.scenarios = {1};
    cfg.replications = 2;
    cfg.n = 2;  // tiny draws: K = 3 always exceeds the pattern count
    cfg.m = 4;
    cfg.k_min = 3;
    cfg.k_max = 3;
    cfg.fit.n_starts = 1;
    cfg.seed = 9;
    const auto result = raschmix::run_study(cfg);
    REQUIRE(result.cells.size() == 1);
    CHECK(result.cells[0].missing);
    CHECK(result.cells[0].replications_ok == 0);
    CHECK(result.cells[0].replications == 2);
}

TEST_CASE("study configuration validation", "[sim]") {
    StudyConfig cfg;
    SECTION("no scenarios") { CHECK_THROWS_AS(raschmix::run_study(cfg), std::invalid_argument); }
    SECTION("no replications") {
        cfg.scenarios = {1};
        cfg.replications = 0;
        CHECK_THROWS_AS(raschmix::run_study(cfg), std::invalid_argument);
    }
    SECTION("grids leave nothing valid") {
        cfg.scenarios = {3};
        cfg.theta_grid = {0.0};  // scenario 3 needs impact
        CHECK_THROWS_AS(raschmix::run_study(cfg), std::invalid_argument);
    }
}

TEST_CASE("study CSV round-trips through the parser", "[sim]") {
    StudyConfig cfg;
    cfg.scenarios = {1, 2};
    cfg.theta_grid = {0.0};
    cfg.delta_grid = {0.0, 2.0};
    cfg.replications = 2;
    cfg.n = 70;
    cfg.m = 5;
    cfg.k_min = 1;
    cfg.k_max = 2;
    cfg.fit.n_starts = 2;
    cfg.seed = 77;
    const auto result = raschmix::run_study(cfg);
    const std::string csv = raschmix::study_to_csv(result);

    std::istringstream in(csv);
    const auto table = raschmix::read_csv(in, "round-trip");
    const auto cells = raschmix::study_cells_from_csv(table, "round-trip");
    REQUIRE(cells.size() == result.cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
        CHECK(cells[c].scenario_id == result.cells[c].scenario_id);
        CHECK(cells[c].theta == result.cells[c].theta);
        CHECK(cells[c].delta == result.cells[c].delta);
        CHECK(cells[c].replications == result.cells[c].replications);
        CHECK(cells[c].replications_ok == result.cells[c].replications_ok);
        CHECK(cells[c].flagged == result.cells[c].flagged);
        CHECK(cells[c].rate_flagged == result.cells[c].rate_flagged);
        CHECK(cells[c].mean_k_hat == result.cells[c].mean_k_hat);
    }

    std::istringstream bad("a,b\n1,2\n");
    const auto bad_table = raschmix::read_csv(bad, "bad");
    CHECK_THROWS_AS(raschmix::study_cells_from_csv(bad_table, "bad"), raschmix::data_error);
}
