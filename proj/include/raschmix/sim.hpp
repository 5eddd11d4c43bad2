#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "core_data.hpp"
#include "mixture.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace raschmix {

// Monte-Carlo study of DIF detection via the number of latent classes.
// Five scenarios:
//   1  no impact, no DIF          (theta = 0, delta = 0)
//   2  DIF only                   (theta = 0, delta >= 0)
//   3  impact only                (theta > 0, delta = 0)
//   4  impact and DIF, class membership independent of ability
//   5  impact and DIF, class membership coinciding with ability
// Abilities are the two-point set {-theta/2, +theta/2}; class II adds
// delta to two DIF items (then re-centers).

struct ScenarioSpec {
    int scenario_id = 1;
    double theta = 0.0;  // ability impact between the two person groups
    double delta = 0.0;  // DIF magnitude on the two DIF items
    int n = 500;
    int m = 20;
    std::vector<double> base_beta;       // empty -> equidistant on [-2, 2]
    std::array<int, 2> dif_items{-1, -1};  // -1 -> the two middle items
    double mix = 0.5;                    // class-II proportion where drawn
    bool split_delta = false;            // apply -delta/2 / +delta/2 instead of 0 / +delta
    std::uint64_t seed = 0;
};

struct GroundTruth {
    std::vector<int> latent_class;  // 0 = class I, 1 = class II
    std::vector<double> ability;
    std::vector<double> beta_class1;  // item parameters actually used, sum-zero
    std::vector<double> beta_class2;
};

namespace detail {

inline void validate_scenario(const ScenarioSpec& s) {
    if (s.scenario_id < 1 || s.scenario_id > 5)
        throw std::invalid_argument("scenario_id must be 1..5");
    if (s.n < 1 || s.m < 2) throw std::invalid_argument("scenario: need n >= 1, m >= 2");
    if (s.theta < 0.0 || s.delta < 0.0)
        throw std::invalid_argument("scenario: theta and delta must be >= 0");
    if (!(s.mix > 0.0 && s.mix < 1.0))
        throw std::invalid_argument("scenario: mix must be in (0,1)");
    const bool impact = s.theta > 0.0;
    switch (s.scenario_id) {
        case 1:
            if (impact || s.delta > 0.0)
                throw std::invalid_argument("scenario 1 requires theta = 0 and delta = 0");
            break;
        case 2:
            if (impact) throw std::invalid_argument("scenario 2 requires theta = 0");
            break;
        case 3:
            if (!impact) throw std::invalid_argument("scenario 3 requires theta > 0");
            if (s.delta > 0.0) throw std::invalid_argument("scenario 3 requires delta = 0");
            break;
        default:
            if (!impact)
                throw std::invalid_argument("scenarios 4 and 5 require theta > 0");
            break;
    }
}

inline std::vector<double> default_base_beta(int m) {
    std::vector<double> beta(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j)
        beta[j] = m == 1 ? 0.0 : -2.0 + 4.0 * j / (m - 1);
    return beta;
}

inline void recenter(std::vector<double>& beta) {
    double mean = 0.0;
    for (double b : beta) mean += b;
    mean /= static_cast<double>(beta.size());
    for (auto& b : beta) b -= mean;
}

}  // namespace detail

inline std::pair<ResponseMatrix, GroundTruth> generate_scenario(const ScenarioSpec& spec) {
    detail::validate_scenario(spec);
    const int n = spec.n, m = spec.m;

    std::vector<double> base =
        spec.base_beta.empty() ? detail::default_base_beta(m) : spec.base_beta;
    if (static_cast<int>(base.size()) != m)
        throw std::invalid_argument("scenario: base_beta length != m");
    detail::recenter(base);

    std::array<int, 2> dif = spec.dif_items;
    if (dif[0] < 0 && dif[1] < 0) dif = {m / 2 - 1, m / 2};
    if (dif[0] == dif[1] || dif[0] < 0 || dif[1] < 0 || dif[0] >= m || dif[1] >= m)
        throw std::invalid_argument("scenario: dif_items must be two distinct indices in [0, m)");

    GroundTruth truth;
    truth.beta_class1 = base;
    truth.beta_class2 = base;
    if (spec.split_delta) {
        truth.beta_class1[dif[0]] -= spec.delta / 2.0;
        truth.beta_class1[dif[1]] -= spec.delta / 2.0;
        truth.beta_class2[dif[0]] += spec.delta / 2.0;
        truth.beta_class2[dif[1]] += spec.delta / 2.0;
        detail::recenter(truth.beta_class1);
    } else {
        truth.beta_class2[dif[0]] += spec.delta;
        truth.beta_class2[dif[1]] += spec.delta;
    }
    detail::recenter(truth.beta_class2);

    const bool impact = spec.theta > 0.0;
    // which scenarios draw the class label independently of ability
    const bool free_class = spec.scenario_id == 2 || spec.scenario_id == 4;

    Rng rng(spec.seed);
    std::vector<std::uint8_t> entries(static_cast<std::size_t>(n) * m);
    truth.latent_class.resize(n);
    truth.ability.resize(n);
    for (int i = 0; i < n; ++i) {
        // fixed per-person draw order (ability, class, m responses) so that
        // coinciding scenarios collapse onto scenario 3 when delta = 0
        int side = 0;
        if (impact) side = rng.uniform() < 0.5 ? 0 : 1;
        const double theta_i = impact ? (side == 0 ? -spec.theta / 2.0 : spec.theta / 2.0) : 0.0;

        int cls = 0;
        if (free_class)
            cls = rng.uniform() < spec.mix ? 1 : 0;
        else if (spec.scenario_id == 5)
            cls = side;

        const std::vector<double>& beta = cls == 0 ? truth.beta_class1 : truth.beta_class2;
        for (int j = 0; j < m; ++j)
            entries[static_cast<std::size_t>(i) * m + j] =
                rng.uniform() < logistic(theta_i - beta[j]) ? 1 : 0;
        truth.latent_class[i] = cls;
        truth.ability[i] = theta_i;
    }

    std::vector<std::string> item_names;
    item_names.reserve(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) item_names.push_back("I" + std::to_string(j + 1));
    ResponseMatrix data(std::move(entries), n, m, std::move(item_names));
    return {std::move(data), std::move(truth)};
}

// ---- study runner -------------------------------------------------------

struct StudyConfig {
    std::vector<int> scenarios;
    std::vector<double> theta_grid{0.0};
    std::vector<double> delta_grid{0.0};
    int replications = 20;
    int n = 500;
    int m = 20;
    std::vector<double> base_beta;         // empty -> equidistant on [-2, 2]
    std::array<int, 2> dif_items{-1, -1};  // -1 -> the two middle items
    double mix = 0.5;
    bool split_delta = false;
    int k_min = 1;
    int k_max = 3;
    MixtureSpec fit;        // score model, starts, EM settings for select_k
    std::uint64_t seed = 0;  // master seed; per-replication seeds derive from it
};

struct StudyCell {
    int scenario_id = 0;
    double theta = 0.0;
    double delta = 0.0;
    int replications = 0;      // requested
    int replications_ok = 0;   // fitted successfully
    int flagged = 0;           // K-hat > 1
    double rate_flagged = 0.0;
    double mean_k_hat = 0.0;
    std::vector<int> k_hats;               // per successful replication
    std::vector<std::uint64_t> seeds;      // per-replication generator seeds
    bool missing = false;                  // every replication failed
};

struct StudyResult {
    StudyConfig config;
    std::vector<StudyCell> cells;
};

// One study cell: `cell_seed` splits into (generate, fit) streams per
// replication, so cells and replications are independent of each other
// and of scheduling.
inline StudyCell run_study_cell(const ScenarioSpec& proto, const StudyConfig& cfg,
                                std::uint64_t cell_seed) {
    StudyCell cell;
    cell.scenario_id = proto.scenario_id;
    cell.theta = proto.theta;
    cell.delta = proto.delta;
    cell.replications = cfg.replications;
    double k_sum = 0.0;
    for (int rep = 0; rep < cfg.replications; ++rep) {
        const std::uint64_t gen_seed = derive_seed(cell_seed, 2 * static_cast<std::uint64_t>(rep));
        const std::uint64_t fit_seed =
            derive_seed(cell_seed, 2 * static_cast<std::uint64_t>(rep) + 1);
        cell.seeds.push_back(gen_seed);
        try {
            ScenarioSpec spec = proto;
            spec.seed = gen_seed;
            auto [data, truth] = generate_scenario(spec);
            auto [filtered, report] = filter_extremes(data);
            MixtureSpec fit_spec = cfg.fit;
            fit_spec.seed = fit_seed;
            const SelectionResult sel = select_k(filtered, cfg.k_min, cfg.k_max, fit_spec);
            const int k_hat = sel.chosen_k();
            if (k_hat < 1) continue;  // every K failed in this replication
            ++cell.replications_ok;
            cell.k_hats.push_back(k_hat);
            k_sum += k_hat;
            if (k_hat > 1) ++cell.flagged;
        } catch (const std::exception&) {
            // degenerate draw (e.g. no informative rows); count as failed
        }
    }
    if (cell.replications_ok > 0) {
        cell.rate_flagged = static_cast<double>(cell.flagged) / cell.replications_ok;
        cell.mean_k_hat = k_sum / cell.replications_ok;
    } else {
        cell.missing = true;
    }
    return cell;
}

inline StudyResult run_study(const StudyConfig& cfg) {
    if (cfg.scenarios.empty()) throw std::invalid_argument("run_study: no scenarios");
    if (cfg.theta_grid.empty() || cfg.delta_grid.empty())
        throw std::invalid_argument("run_study: empty parameter grid");
    if (cfg.replications < 1) throw std::invalid_argument("run_study: replications must be >= 1");

    StudyResult result;
    result.config = cfg;
    std::vector<ScenarioSpec> protos;
    for (int scenario : cfg.scenarios) {
        for (double theta : cfg.theta_grid) {
            for (double delta : cfg.delta_grid) {
                ScenarioSpec proto;
                proto.scenario_id = scenario;
                proto.theta = theta;
                proto.delta = delta;
                proto.n = cfg.n;
                proto.m = cfg.m;
                proto.base_beta = cfg.base_beta;
                proto.dif_items = cfg.dif_items;
                proto.mix = cfg.mix;
                proto.split_delta = cfg.split_delta;
                try {
                    detail::validate_scenario(proto);
                } catch (const std::invalid_argument&) {
                    continue;  // grid point not meaningful for this scenario
                }
                protos.push_back(std::move(proto));
            }
        }
    }
    if (protos.empty())
        throw std::invalid_argument(
            "run_study: no valid (scenario, theta, delta) combination in the grids");
    for (std::size_t c = 0; c < protos.size(); ++c)
        result.cells.push_back(
            run_study_cell(protos[c], cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(c))));
    return result;
}

// ---- CSV serialization ---------------------------------------------------

namespace detail {

// shortest round-trip decimal representation
inline std::string format_double(double v) {
    std::array<char, 32> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

}  // namespace detail

inline std::string study_to_csv(const StudyResult& result) {
    std::string out =
        "scenario,theta,delta,n,m,replications,replications_ok,flagged,rate_flagged,mean_k_hat\n";
    for (const StudyCell& c : result.cells) {
        out += std::to_string(c.scenario_id) + ',' + detail::format_double(c.theta) + ',' +
               detail::format_double(c.delta) + ',' + std::to_string(result.config.n) + ',' +
               std::to_string(result.config.m) + ',' + std::to_string(c.replications) + ',' +
               std::to_string(c.replications_ok) + ',' + std::to_string(c.flagged) + ',' +
               detail::format_double(c.rate_flagged) + ',' +
               detail::format_double(c.mean_k_hat) + '\n';
    }
    return out;
}

// Parse the cells back from study_to_csv output (used by `report`).
inline std::vector<StudyCell> study_cells_from_csv(const CsvTable& table,
                                                   const std::string& origin = "<csv>") {
    const std::vector<std::string> expected = {
        "scenario", "theta", "delta", "n", "m", "replications",
        "replications_ok", "flagged", "rate_flagged", "mean_k_hat"};
    if (table.header != expected)
        throw data_error(origin + ": not a study CSV (unexpected header)");
    std::vector<StudyCell> cells;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        StudyCell c;
        try {
            c.scenario_id = std::stoi(row[0]);
            c.theta = std::stod(row[1]);
            c.delta = std::stod(row[2]);
            c.replications = std::stoi(row[5]);
            c.replications_ok = std::stoi(row[6]);
            c.flagged = std::stoi(row[7]);
            c.rate_flagged = std::stod(row[8]);
            c.mean_k_hat = std::stod(row[9]);
        } catch (const std::exception&) {
            throw data_error(origin + ": bad numeric value in row " + std::to_string(i + 1));
        }
        c.missing = c.replications_ok == 0;
        cells.push_back(std::move(c));
    }
    if (cells.empty()) throw data_error(origin + ": study CSV has no rows");
    return cells;
}

}  // namespace raschmix
