#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dif.hpp"
#include "mixture.hpp"
#include "sim.hpp"

namespace raschmix {

// JSON documents for fit/selection/DIF/study results.  ordered_json keeps
// key order stable so equal inputs serialize to identical bytes.

using json = nlohmann::ordered_json;

inline json spec_to_json(const MixtureSpec& spec) {
    return json{{"k", spec.K},
                {"score_model", to_string(spec.score_kind)},
                {"restricted", spec.restricted},
                {"n_starts", spec.n_starts},
                {"max_em_iter", spec.max_em_iter},
                {"em_tol", spec.em_tol},
                {"seed", spec.seed}};
}

inline json score_model_to_json(const ScoreModel& model) {
    return json{{"kind", to_string(model.kind)},
                {"restricted", model.restricted},
                {"m", model.m},
                {"delta", model.delta}};
}

inline json fit_to_json(const MixtureFit& fit, const std::vector<std::string>& item_names,
                        bool include_posterior = false) {
    json classes = json::array();
    for (int k = 0; k < fit.spec.K; ++k) {
        json cls{{"pi", fit.pi[k]}, {"beta", fit.beta_k[k]}};
        if (!fit.spec.restricted) cls["score_model"] = score_model_to_json(fit.score_models[k]);
        classes.push_back(std::move(cls));
    }
    json doc{{"spec", spec_to_json(fit.spec)},
             {"items", item_names},
             {"n_effective", fit.n_effective},
             {"loglik", fit.loglik},
             {"df", fit.df},
             {"bic", fit.bic},
             {"classes", std::move(classes)}};
    if (fit.spec.restricted) doc["score_model"] = score_model_to_json(fit.score_models[0]);
    doc["convergence"] = json{{"em_iterations", fit.em_iterations},
                              {"converged", fit.converged},
                              {"best_start_index", fit.best_start_index},
                              {"degenerate_starts", fit.degenerate_starts}};
    doc["seed"] = fit.spec.seed;
    if (include_posterior) {
        json post = json::array();
        for (int i = 0; i < fit.n; ++i) {
            json row = json::array();
            for (int k = 0; k < fit.spec.K; ++k) row.push_back(fit.posterior_at(i, k));
            post.push_back(std::move(row));
        }
        doc["posterior"] = std::move(post);
    }
    return doc;
}

inline json selection_to_json(const SelectionResult& result,
                              const std::vector<std::string>& item_names) {
    json rows = json::array();
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const SelectionRow& row = result.rows[i];
        json entry{{"model", row.model_label}, {"k", row.k}, {"ok", row.ok}};
        if (row.ok) {
            entry["df"] = row.fit.df;
            entry["loglik"] = row.fit.loglik;
            entry["bic"] = row.fit.bic;
            entry["chosen"] = static_cast<int>(i) == result.chosen;
            entry["fit"] = fit_to_json(row.fit, item_names);
        } else {
            entry["error"] = row.error;
        }
        rows.push_back(std::move(entry));
    }
    return json{{"rows", std::move(rows)},
                {"chosen_index", result.chosen},
                {"chosen_k", result.chosen_k()}};
}

inline json dif_to_json(const DifReport& report, const std::vector<std::string>& item_names) {
    json doc{{"method", report.method}, {"flagged", report.flagged}};
    json contrast = json::object();
    for (std::size_t j = 0; j < report.per_item_contrast.size(); ++j)
        contrast[item_names[j]] = report.per_item_contrast[j];
    doc["per_item_contrast"] = std::move(contrast);
    if (report.method == "lr") {
        doc["statistic"] = report.statistic;
        doc["df"] = report.lr_df;
        doc["p_value"] = report.p_value;
        doc["alpha"] = report.alpha;
        json groups = json::array();
        for (std::size_t g = 0; g < report.group_labels.size(); ++g)
            groups.push_back(json{{"label", report.group_labels[g]},
                                  {"n", report.group_sizes[g]},
                                  {"cond_loglik", report.group_fits[g].cond_loglik},
                                  {"beta", report.group_fits[g].beta}});
        doc["groups"] = std::move(groups);
        doc["pooled_cond_loglik"] = report.pooled_fit.cond_loglik;
    } else {
        doc["selection"] = selection_to_json(report.selection, item_names);
    }
    return doc;
}

inline json study_to_json(const StudyResult& result) {
    const StudyConfig& cfg = result.config;
    json cells = json::array();
    for (const StudyCell& c : result.cells) {
        cells.push_back(json{{"scenario", c.scenario_id},
                             {"theta", c.theta},
                             {"delta", c.delta},
                             {"replications", c.replications},
                             {"replications_ok", c.replications_ok},
                             {"flagged", c.flagged},
                             {"rate_flagged", c.rate_flagged},
                             {"mean_k_hat", c.mean_k_hat},
                             {"k_hats", c.k_hats},
                             {"seeds", c.seeds},
                             {"missing", c.missing}});
    }
    return json{{"config", json{{"scenarios", cfg.scenarios},
                                {"theta_grid", cfg.theta_grid},
                                {"delta_grid", cfg.delta_grid},
                                {"replications", cfg.replications},
                                {"n", cfg.n},
                                {"m", cfg.m},
                                {"base_beta", cfg.base_beta},
                                {"dif_items", cfg.dif_items},
                                {"mix", cfg.mix},
                                {"split_delta", cfg.split_delta},
                                {"k_min", cfg.k_min},
                                {"k_max", cfg.k_max},
                                {"fit", spec_to_json(cfg.fit)},
                                {"seed", cfg.seed}}},
                {"cells", std::move(cells)}};
}

}  // namespace raschmix
