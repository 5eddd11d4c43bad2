#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cml.hpp"
#include "core_data.hpp"
#include "mixture.hpp"
#include "stats.hpp"

namespace raschmix {

// DIF detection.  Two routes: the mixture criterion (more than one latent
// class selected by BIC signals DIF, no group labels needed) and the
// Andersen likelihood-ratio test for known groups.

struct DifReport {
    std::string method;  // "mixture" | "lr"
    bool flagged = false;
    // item-wise difficulty differences between the two largest classes /
    // groups; zero mean because both vectors are sum-to-zero
    std::vector<double> per_item_contrast;

    // mixture method
    SelectionResult selection;

    // LR method
    double statistic = std::numeric_limits<double>::quiet_NaN();
    int lr_df = 0;
    double p_value = std::numeric_limits<double>::quiet_NaN();
    double alpha = 0.05;
    std::vector<std::string> group_labels;
    std::vector<int> group_sizes;
    std::vector<CmlFit> group_fits;
    CmlFit pooled_fit;
};

// Mixture criterion: run select_k over 1..k_max; DIF is flagged when the
// BIC-chosen number of classes exceeds 1.
inline DifReport detect_dif_mixture(const ResponseMatrix& data, const MixtureSpec& base,
                                    int k_max) {
    if (k_max < 2) throw std::invalid_argument("detect_dif_mixture: k_max must be >= 2");
    DifReport report;
    report.method = "mixture";
    report.selection = select_k(data, 1, k_max, base);
    const int k_hat = report.selection.chosen_k();
    if (k_hat < 1) throw estimation_error("detect_dif_mixture: no K could be fitted");
    report.flagged = k_hat > 1;
    report.per_item_contrast.assign(static_cast<std::size_t>(data.m()), 0.0);
    if (k_hat > 1) {
        // classes are sorted by ascending pi, so the two largest are last
        const MixtureFit& fit = report.selection.chosen_row().fit;
        const std::vector<double>& largest = fit.beta_k[static_cast<std::size_t>(k_hat - 1)];
        const std::vector<double>& second = fit.beta_k[static_cast<std::size_t>(k_hat - 2)];
        for (int j = 0; j < data.m(); ++j)
            report.per_item_contrast[j] = largest[j] - second[j];
    }
    return report;
}

// Andersen LR test: 2 * (sum of group-wise CML optima - pooled optimum),
// chi-square with (G-1)(m-1) degrees of freedom.
inline DifReport andersen_lr_test(const ResponseMatrix& data,
                                  std::span<const std::string> groups, double alpha = 0.05) {
    if (groups.size() != static_cast<std::size_t>(data.n()))
        throw std::invalid_argument("andersen_lr_test: group label count != n");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("andersen_lr_test: alpha must be in (0,1)");

    std::map<std::string, std::vector<int>> members;
    for (int i = 0; i < data.n(); ++i) members[std::string(groups[i])].push_back(i);
    if (members.size() < 2)
        throw data_error("andersen_lr_test: need at least 2 groups, got " +
                         std::to_string(members.size()));

    DifReport report;
    report.method = "lr";
    report.alpha = alpha;

    double group_loglik = 0.0;
    for (const auto& [label, rows] : members) {
        const ResponseMatrix part = subset_rows(data, rows);
        CmlFit fit;
        try {
            fit = fit_cml(part);
        } catch (const data_error& e) {
            throw data_error("group '" + label + "': " + e.what());
        }
        group_loglik += fit.cond_loglik;
        report.group_labels.push_back(label);
        report.group_sizes.push_back(static_cast<int>(rows.size()));
        report.group_fits.push_back(std::move(fit));
    }
    report.pooled_fit = fit_cml(data);

    report.statistic = 2.0 * (group_loglik - report.pooled_fit.cond_loglik);
    report.lr_df = (static_cast<int>(members.size()) - 1) * (data.m() - 1);
    report.p_value = chi_square_upper_tail(report.statistic, report.lr_df);
    report.flagged = report.p_value < alpha;

    // contrast between the two largest groups
    int a = 0, b = 1;
    for (std::size_t g = 0; g < report.group_sizes.size(); ++g) {
        if (report.group_sizes[g] > report.group_sizes[a]) {
            b = a;
            a = static_cast<int>(g);
        } else if (static_cast<int>(g) != a && report.group_sizes[g] > report.group_sizes[b]) {
            b = static_cast<int>(g);
        }
    }
    report.per_item_contrast.resize(static_cast<std::size_t>(data.m()));
    for (int j = 0; j < data.m(); ++j)
        report.per_item_contrast[j] = report.group_fits[a].beta[j] - report.group_fits[b].beta[j];
    return report;
}

}  // namespace raschmix
