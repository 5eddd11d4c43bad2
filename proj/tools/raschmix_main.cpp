// raschmix — batch CLI for Rasch mixture model estimation and DIF detection.
//
// Subcommands:
//   fit       fit one mixture specification, emit a JSON artifact
//   select    sweep K (or the four score-model specs) and pick by BIC
//   simulate  Monte-Carlo study of the K-hat > 1 detection rate
//   dif       DIF detection: label-free mixture method or Andersen's LR test
//   report    re-render an existing study CSV as an SVG chart
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
// Every run prints its resolved seed (--seed, else $RASCHMIX_SEED, else a
// fresh one), so any output can be reproduced exactly.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <raschmix/raschmix.hpp>

namespace {

using raschmix::json;

// flag/argument problems detected after CLI11 parsing; exit code 1
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr const char* kSeedEnvVar = "RASCHMIX_SEED";

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv(kSeedEnvVar)) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw usage_error(std::string(kSeedEnvVar) + " is not an unsigned integer: '" +
                              env + "'");
        return static_cast<std::uint64_t>(v);
    }
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw raschmix::data_error("cannot write file: " + path);
    out << content;
    if (!out.good()) throw raschmix::data_error("write failed: " + path);
}

// "lo:hi:step" (inclusive), "lo:hi" (step 1), "a,b,c", or a single number
std::vector<double> parse_grid(const std::string& text) {
    auto parse_num = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw usage_error("bad number '" + s + "' in grid '" + text + "'");
        }
    };
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t i = 0; i <= s.size(); ++i)
            if (i == s.size() || s[i] == sep) {
                parts.push_back(s.substr(start, i - start));
                start = i + 1;
            }
        return parts;
    };
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 2 && parts.size() != 3)
            throw usage_error("grid must be lo:hi or lo:hi:step, got '" + text + "'");
        const double lo = parse_num(parts[0]);
        const double hi = parse_num(parts[1]);
        const double step = parts.size() == 3 ? parse_num(parts[2]) : 1.0;
        if (step <= 0.0) throw usage_error("grid step must be > 0 in '" + text + "'");
        if (hi < lo) throw usage_error("grid upper bound below lower in '" + text + "'");
        std::vector<double> values;
        for (int i = 0;; ++i) {
            const double v = lo + step * i;
            if (v > hi + 1e-12) break;
            values.push_back(v);
            if (values.size() > 10000) throw usage_error("grid too fine: '" + text + "'");
        }
        return values;
    }
    std::vector<double> values;
    for (const std::string& part : split(text, ','))
        values.push_back(parse_num(part));
    return values;
}

// ---- input loading --------------------------------------------------------

struct Loaded {
    raschmix::ResponseMatrix data;
    raschmix::FilterReport filter;
    std::string source;
    bool dichotomized = true;
    bool extremes_removed = true;
    std::vector<std::string> group;  // aligned with data rows when requested
};

Loaded load_input(const std::string& path, bool no_dichotomize, bool keep_extremes,
                  const std::string& group_column = "") {
    raschmix::RawMatrix raw;
    std::vector<std::string> group_values;
    std::string source;
    if (path.empty()) {
        if (!group_column.empty())
            throw usage_error("the bundled dataset has no '" + group_column +
                              "' column; pass --data");
        raw = raschmix::load_verbal_aggression();
        source = "bundled:verbal_aggression";
    } else {
        const raschmix::CsvTable table = raschmix::read_csv_file(path);
        std::vector<std::string> exclude;
        if (!group_column.empty()) {
            std::size_t col = table.header.size();
            for (std::size_t j = 0; j < table.header.size(); ++j)
                if (table.header[j] == group_column) col = j;
            if (col == table.header.size())
                throw usage_error("no column named '" + group_column + "' in " + path);
            for (const auto& row : table.rows) group_values.push_back(row[col]);
            exclude.push_back(group_column);
        }
        raw = raschmix::csv_to_raw(table, path, exclude);
        source = path;
    }

    raschmix::ResponseMatrix all =
        no_dichotomize ? raschmix::as_binary(raw) : raschmix::dichotomize(raw);

    Loaded out{std::move(all), {}, std::move(source), !no_dichotomize, !keep_extremes, {}};
    out.filter.n_input = out.data.n();
    if (keep_extremes) {
        out.filter.n_effective = out.data.n();
        out.group = std::move(group_values);
        return out;
    }
    std::vector<int> keep;
    for (int i = 0; i < out.data.n(); ++i) {
        const int r = out.data.row_score(i);
        if (r == 0)
            ++out.filter.n_removed_zero;
        else if (r == out.data.m())
            ++out.filter.n_removed_perfect;
        else
            keep.push_back(i);
    }
    if (keep.empty())
        throw raschmix::data_error(out.source +
                                   ": no informative responses after removing extreme scores");
    if (!group_values.empty())
        for (int i : keep) out.group.push_back(group_values[i]);
    out.data = raschmix::subset_rows(out.data, keep);
    out.filter.n_effective = out.data.n();
    return out;
}

json data_to_json(const Loaded& in) {
    return json{{"source", in.source},
                {"n_input", in.filter.n_input},
                {"n_removed_zero_score", in.filter.n_removed_zero},
                {"n_removed_perfect_score", in.filter.n_removed_perfect},
                {"n_effective", in.filter.n_effective},
                {"dichotomized", in.dichotomized},
                {"extremes_removed", in.extremes_removed}};
}

// ---- output helpers --------------------------------------------------------

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

// human-readable selection table, rendered from the machine JSON document
// (columns Model, k, #Df, logL, BIC; the BIC argmin row is marked)
void print_selection_table(const json& selection) {
    std::size_t model_width = 5;  // "Model"
    for (const auto& row : selection.at("rows"))
        model_width = std::max(model_width, row.at("model").get<std::string>().size());
    std::printf("%-*s  %3s  %4s  %9s  %9s\n", static_cast<int>(model_width), "Model", "k",
                "#Df", "logL", "BIC");
    for (const auto& row : selection.at("rows")) {
        const std::string model = row.at("model").get<std::string>();
        const int k = row.at("k").get<int>();
        if (!row.at("ok").get<bool>()) {
            std::printf("%-*s  %3d  failed: %s\n", static_cast<int>(model_width),
                        model.c_str(), k, row.at("error").get<std::string>().c_str());
            continue;
        }
        std::printf("%-*s  %3d  %4d  %9.1f  %9.1f%s\n", static_cast<int>(model_width),
                    model.c_str(), k, row.at("df").get<int>(),
                    row.at("loglik").get<double>(), row.at("bic").get<double>(),
                    row.at("chosen").get<bool>() ? "  *" : "");
    }
    std::printf("(* = lowest BIC)\n");
}

std::string selection_to_csv(const json& selection) {
    std::string out = "model,k,df,loglik,bic,chosen\n";
    for (const auto& row : selection.at("rows")) {
        if (!row.at("ok").get<bool>()) continue;
        out += csv_field(row.at("model").get<std::string>()) + ',' +
               std::to_string(row.at("k").get<int>()) + ',' +
               std::to_string(row.at("df").get<int>()) + ',' +
               raschmix::detail::format_double(row.at("loglik").get<double>()) + ',' +
               raschmix::detail::format_double(row.at("bic").get<double>()) + ',' +
               (row.at("chosen").get<bool>() ? "1" : "0") + '\n';
    }
    return out;
}

void emit_json(const json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_file(out_path, text);
}

// ---- subcommand state -------------------------------------------------------

struct Options {
    std::string command;

    std::string data_path;
    bool no_dichotomize = false;
    bool keep_extremes = false;
    std::optional<std::uint64_t> seed;

    int k = 1;
    bool k_given = false;
    int k_min = 1;
    int k_max = 4;
    std::string score = "mean-variance";
    bool unrestricted = false;
    std::string score_candidates;
    int starts = 5;
    bool posterior = false;

    std::string method = "mixture";
    std::string group_column;
    double alpha = 0.05;
    int dif_kmax = 4;

    std::vector<int> scenarios{1, 2, 3, 5};
    std::string theta_grid = "0:1";
    std::string delta_grid = "0:3";
    int sim_n = 500;
    int sim_m = 20;
    int reps = 20;
    int sim_kmin = 1;
    int sim_kmax = 3;
    std::string dif_items;
    bool split_delta = false;
    double mix = 0.5;
    std::string base_beta;

    std::string out_path;
    std::string json_path;
    std::string svg_path;
    std::string in_path;
};

raschmix::MixtureSpec make_spec(const Options& opt, std::uint64_t seed) {
    raschmix::MixtureSpec spec;
    spec.K = opt.k;
    spec.score_kind = raschmix::parse_score_kind(opt.score);
    spec.restricted = !opt.unrestricted;
    if (opt.starts < 1) throw usage_error("--starts must be >= 1");
    spec.n_starts = opt.starts;
    spec.seed = seed;
    return spec;
}

// ---- subcommands ------------------------------------------------------------

int cmd_fit(const Options& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed);
    std::printf("seed: %" PRIu64 "\n", seed);
    if (opt.k < 1) throw usage_error("--k must be >= 1");
    const Loaded in = load_input(opt.data_path, opt.no_dichotomize, opt.keep_extremes);
    const raschmix::MixtureSpec spec = make_spec(opt, seed);
    const raschmix::MixtureFit fit = raschmix::em_fit(in.data, spec);
    std::printf("fit: %s  K=%d  #Df=%d  logL=%.1f  BIC=%.1f  n=%d\n",
                raschmix::model_label(spec.score_kind, spec.restricted).c_str(), spec.K,
                fit.df, fit.loglik, fit.bic, fit.n_effective);
    if (!fit.converged)
        std::printf("warning: EM did not converge within %d iterations\n",
                    spec.max_em_iter);
    json doc{{"seed", seed},
             {"data", data_to_json(in)},
             {"fit", raschmix::fit_to_json(fit, in.data.item_names(), opt.posterior)}};
    emit_json(doc, opt.out_path);
    return 0;
}

int cmd_select(const Options& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed);
    std::printf("seed: %" PRIu64 "\n", seed);
    const Loaded in = load_input(opt.data_path, opt.no_dichotomize, opt.keep_extremes);

    raschmix::SelectionResult sel;
    if (!opt.score_candidates.empty()) {
        if (opt.score_candidates != "all")
            throw usage_error("--score-candidates only supports 'all'");
        if (!opt.k_given) throw usage_error("--score-candidates all requires --k");
        if (opt.k < 1) throw usage_error("--k must be >= 1");
        raschmix::MixtureSpec base = make_spec(opt, seed);
        sel = raschmix::select_score_model(in.data, opt.k, base);
    } else {
        if (opt.k_min < 1) throw usage_error("--kmin must be >= 1");
        if (opt.k_min > opt.k_max) throw usage_error("--kmin must not exceed --kmax");
        raschmix::MixtureSpec base = make_spec(opt, seed);
        sel = raschmix::select_k(in.data, opt.k_min, opt.k_max, base);
    }

    const json selection = raschmix::selection_to_json(sel, in.data.item_names());
    print_selection_table(selection);
    if (!opt.out_path.empty()) write_file(opt.out_path, selection_to_csv(selection));
    if (!opt.json_path.empty())
        emit_json(json{{"seed", seed}, {"data", data_to_json(in)}, {"selection", selection}},
                  opt.json_path);
    return 0;
}

int cmd_dif(const Options& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed);
    std::printf("seed: %" PRIu64 "\n", seed);
    if (opt.method != "mixture" && opt.method != "lr")
        throw usage_error("--method must be 'mixture' or 'lr'");

    raschmix::DifReport report;
    Loaded in = load_input(opt.data_path, opt.no_dichotomize, opt.keep_extremes,
                           opt.method == "lr" ? opt.group_column : "");
    if (opt.method == "mixture") {
        if (opt.dif_kmax < 2) throw usage_error("--kmax must be >= 2");
        raschmix::MixtureSpec base = make_spec(opt, seed);
        report = raschmix::detect_dif_mixture(in.data, base, opt.dif_kmax);
        std::printf("dif (mixture): K-hat = %d -> %s\n", report.selection.chosen_k(),
                    report.flagged ? "DIF flagged" : "no DIF flagged");
    } else {
        if (opt.group_column.empty()) throw usage_error("--method lr requires --group");
        const std::set<std::string> distinct(in.group.begin(), in.group.end());
        if (distinct.size() < 2)
            throw usage_error("group column '" + opt.group_column +
                              "' has fewer than 2 distinct values");
        report = raschmix::andersen_lr_test(in.data, in.group, opt.alpha);
        std::printf("dif (lr): statistic = %.3f  df = %d  p = %.4g  alpha = %g -> %s\n",
                    report.statistic, report.lr_df, report.p_value, report.alpha,
                    report.flagged ? "DIF flagged" : "no DIF flagged");
        for (std::size_t g = 0; g < report.group_labels.size(); ++g)
            std::printf("  group %s: n = %d\n", report.group_labels[g].c_str(),
                        report.group_sizes[g]);
    }

    std::printf("per-item contrast (largest two %s):\n",
                opt.method == "mixture" ? "classes" : "groups");
    for (int j = 0; j < in.data.m(); ++j)
        std::printf("  %-14s %+8.3f\n", in.data.item_names()[j].c_str(),
                    report.per_item_contrast[j]);

    json doc{{"seed", seed},
             {"data", data_to_json(in)},
             {"dif", raschmix::dif_to_json(report, in.data.item_names())}};
    emit_json(doc, opt.out_path);
    return 0;
}

int cmd_simulate(const Options& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed);
    std::printf("seed: %" PRIu64 "\n", seed);

    raschmix::StudyConfig cfg;
    cfg.scenarios = opt.scenarios;
    cfg.theta_grid = parse_grid(opt.theta_grid);
    cfg.delta_grid = parse_grid(opt.delta_grid);
    if (opt.reps < 1) throw usage_error("--reps must be >= 1");
    if (opt.sim_n < 1) throw usage_error("--n must be >= 1");
    if (opt.sim_m < 2) throw usage_error("--m must be >= 2");
    if (opt.sim_kmin < 1) throw usage_error("--kmin must be >= 1");
    if (opt.sim_kmin > opt.sim_kmax) throw usage_error("--kmin must not exceed --kmax");
    cfg.replications = opt.reps;
    cfg.n = opt.sim_n;
    cfg.m = opt.sim_m;
    cfg.k_min = opt.sim_kmin;
    cfg.k_max = opt.sim_kmax;
    for (int s : cfg.scenarios)
        if (s < 1 || s > 5) throw usage_error("--scenario values must be 1..5");
    if (!opt.dif_items.empty()) {
        const std::vector<double> idx = parse_grid(opt.dif_items);
        if (idx.size() != 2) throw usage_error("--dif-items needs two indices, e.g. 1,2");
        cfg.dif_items = {static_cast<int>(idx[0]) - 1, static_cast<int>(idx[1]) - 1};
        for (int j : cfg.dif_items)
            if (j < 0 || j >= cfg.m)
                throw usage_error("--dif-items indices must be in 1.." +
                                  std::to_string(cfg.m));
        if (cfg.dif_items[0] == cfg.dif_items[1])
            throw usage_error("--dif-items indices must be distinct");
    }
    cfg.split_delta = opt.split_delta;
    if (!(opt.mix > 0.0 && opt.mix < 1.0)) throw usage_error("--mix must be in (0,1)");
    cfg.mix = opt.mix;
    if (!opt.base_beta.empty()) cfg.base_beta = parse_grid(opt.base_beta);
    Options fit_opt = opt;
    fit_opt.k = 1;
    cfg.fit = make_spec(fit_opt, seed);
    cfg.seed = seed;

    const raschmix::StudyResult result = raschmix::run_study(cfg);

    std::printf("%8s  %6s  %6s  %5s  %12s  %10s\n", "scenario", "theta", "delta", "ok",
                "rate K-hat>1", "mean K-hat");
    for (const auto& c : result.cells) {
        if (c.missing)
            std::printf("%8d  %6g  %6g  %5d  %12s  %10s\n", c.scenario_id, c.theta,
                        c.delta, c.replications_ok, "missing", "-");
        else
            std::printf("%8d  %6g  %6g  %5d  %12.2f  %10.2f\n", c.scenario_id, c.theta,
                        c.delta, c.replications_ok, c.rate_flagged, c.mean_k_hat);
    }

    const std::string csv = raschmix::study_to_csv(result);
    if (opt.out_path.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(opt.out_path, csv);
    if (!opt.json_path.empty()) emit_json(raschmix::study_to_json(result), opt.json_path);
    if (!opt.svg_path.empty())
        write_file(opt.svg_path, raschmix::render_study_svg(result.cells));
    return 0;
}

int cmd_report(const Options& opt) {
    const std::uint64_t seed = resolve_seed(opt.seed);
    std::printf("seed: %" PRIu64 "\n", seed);
    const raschmix::CsvTable table = raschmix::read_csv_file(opt.in_path);
    const std::vector<raschmix::StudyCell> cells =
        raschmix::study_cells_from_csv(table, opt.in_path);
    write_file(opt.svg_path, raschmix::render_study_svg(cells));
    std::printf("report: %zu cells -> %s\n", cells.size(), opt.svg_path.c_str());
    return 0;
}

void add_data_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--data", opt.data_path,
                    "input CSV (default: the bundled Verbal Aggression data)");
    cmd->add_flag("--no-dichotomize", opt.no_dichotomize,
                  "treat input as already binary instead of mapping 0->0, {1,2}->1");
    cmd->add_flag("--keep-extremes", opt.keep_extremes,
                  "keep rows with all-0 or all-1 responses instead of dropping them");
}

void add_fit_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--score", opt.score, "score model: mean-variance | saturated")
        ->capture_default_str();
    cmd->add_flag("--unrestricted", opt.unrestricted,
                  "class-specific score distributions (default: restricted/shared)");
    cmd->add_option("--starts", opt.starts, "random EM starts per fit")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"Rasch mixture models by conditional maximum likelihood: "
                 "fitting, BIC selection, DIF detection, simulation study"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed_flag;

    CLI::App* fit = app.add_subcommand("fit", "fit one mixture specification");
    add_data_flags(fit, opt);
    add_fit_flags(fit, opt);
    fit->add_option("--k", opt.k, "number of latent classes")->capture_default_str();
    fit->add_flag("--posterior", opt.posterior, "include the posterior matrix in the JSON");
    fit->add_option("--out", opt.out_path, "write the JSON artifact here (default: stdout)");

    CLI::App* select = app.add_subcommand("select", "choose K or the score model by BIC");
    add_data_flags(select, opt);
    add_fit_flags(select, opt);
    select->add_option("--kmin", opt.k_min, "smallest K")->capture_default_str();
    select->add_option("--kmax", opt.k_max, "largest K")->capture_default_str();
    auto* sel_k = select->add_option("--k", opt.k, "fixed K for --score-candidates all");
    select->add_option("--score-candidates", opt.score_candidates,
                       "'all': compare the four score-model specifications");
    select->add_option("--out", opt.out_path, "write the selection CSV here");
    select->add_option("--json", opt.json_path, "write the full JSON artifact here");

    CLI::App* dif = app.add_subcommand("dif", "differential item functioning checks");
    add_data_flags(dif, opt);
    add_fit_flags(dif, opt);
    dif->add_option("--method", opt.method, "mixture | lr")->capture_default_str();
    dif->add_option("--kmax", opt.dif_kmax, "largest K for the mixture method")
        ->capture_default_str();
    dif->add_option("--group", opt.group_column, "group column for the LR test");
    dif->add_option("--alpha", opt.alpha, "LR significance level")->capture_default_str();
    dif->add_option("--out", opt.out_path, "write the JSON artifact here (default: stdout)");

    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo detection-rate study");
    simulate->add_option("--scenario", opt.scenarios,
                         "scenario ids (1..5); repeatable or comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--theta", opt.theta_grid, "ability impact grid, e.g. 0:1 or 1")
        ->capture_default_str();
    simulate->add_option("--delta", opt.delta_grid, "DIF magnitude grid, e.g. 0:3:1")
        ->capture_default_str();
    simulate->add_option("--n", opt.sim_n, "persons per replication")->capture_default_str();
    simulate->add_option("--m", opt.sim_m, "items")->capture_default_str();
    simulate->add_option("--reps", opt.reps, "replications per cell")->capture_default_str();
    simulate->add_option("--kmin", opt.sim_kmin, "smallest K searched")
        ->capture_default_str();
    simulate->add_option("--kmax", opt.sim_kmax, "largest K searched")->capture_default_str();
    add_fit_flags(simulate, opt);
    simulate->add_option("--dif-items", opt.dif_items,
                         "1-based indices of the two DIF items (default: middle two)");
    simulate->add_flag("--split-delta", opt.split_delta,
                       "apply -delta/2 and +delta/2 instead of 0 and +delta");
    simulate->add_option("--mix", opt.mix, "class-II proportion")->capture_default_str();
    simulate->add_option("--base-beta", opt.base_beta,
                         "comma-separated base difficulties (default: equidistant [-2,2])");
    simulate->add_option("--out", opt.out_path, "write the study CSV here (default: stdout)");
    simulate->add_option("--json", opt.json_path, "write the study JSON here");
    simulate->add_option("--svg", opt.svg_path, "write the detection-rate chart here");

    CLI::App* report = app.add_subcommand("report", "re-render a study CSV to SVG");
    report->add_option("--in", opt.in_path, "study CSV produced by simulate")->required();
    report->add_option("--svg", opt.svg_path, "output SVG path")->required();

    for (CLI::App* cmd : {fit, select, dif, simulate, report})
        cmd->add_option("--seed", seed_flag,
                        "RNG seed (default: $RASCHMIX_SEED, else generated)");

    try {
        app.parse(argc, argv);
        opt.seed = seed_flag;
        opt.k_given = sel_k->count() > 0;
        if (fit->parsed()) return cmd_fit(opt);
        if (select->parsed()) return cmd_select(opt);
        if (dif->parsed()) return cmd_dif(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        if (report->parsed()) return cmd_report(opt);
        return 1;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const usage_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const raschmix::data_error& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 3;
    }
}
