// welfare-lcb: estimates and lower confidence bands for optimal treatment
// welfare over finite policy classes, plus the synthetic-design experiments.
// Links only the public C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "csv.hpp"
#include "welfare_lcb.h"

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kSpecVersion = "1";

void check(wlcb_status st) {
    if (st != WLCB_OK) throw std::runtime_error(wlcb_last_error());
}

template <typename T, void (*Free)(T*)>
struct Handle {
    T* ptr = nullptr;
    Handle() = default;
    explicit Handle(T* p) : ptr(p) {}
    ~Handle() { Free(ptr); }
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    Handle(Handle&& other) noexcept : ptr(other.ptr) { other.ptr = nullptr; }
    Handle& operator=(Handle&& other) noexcept {
        if (this != &other) {
            Free(ptr);
            ptr = other.ptr;
            other.ptr = nullptr;
        }
        return *this;
    }
    T** out() { return &ptr; }
    T* get() const { return ptr; }
};

using SampleH = Handle<wlcb_sample, wlcb_sample_free>;
using PoliciesH = Handle<wlcb_policies, wlcb_policies_free>;
using FirstStageH = Handle<wlcb_first_stage, wlcb_first_stage_free>;
using PanelH = Handle<wlcb_panel, wlcb_panel_free>;

struct CommonOpts {
    double alpha = 0.05;
    std::int64_t n_sim = 100000;
    std::string kappa = "sqrt-log-n";
    std::uint64_t seed = 0;
    double ridge = 1e-8;
    bool bootstrap = false;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--alpha", opts.alpha, "significance level in (0,1)");
    cmd->add_option("--nsim", opts.n_sim, "critical-value simulation draws");
    cmd->add_option("--kappa", opts.kappa, "GMS tuning: 'sqrt-log-n' or a number");
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--ridge", opts.ridge, "QLR covariance ridge scale");
    cmd->add_flag("--bootstrap", opts.bootstrap, "multiplier bootstrap over score rows");
    cmd->add_option("--out", opts.out, "output file")->required();
    cmd->add_option("--format", opts.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
}

wlcb_lcb_config make_config(const CommonOpts& opts) {
    wlcb_lcb_config cfg;
    wlcb_lcb_config_init(&cfg);
    cfg.alpha = opts.alpha;
    cfg.n_sim = opts.n_sim;
    cfg.seed = opts.seed;
    cfg.ridge = opts.ridge;
    cfg.multiplier_bootstrap = opts.bootstrap ? 1 : 0;
    if (opts.kappa != "sqrt-log-n") {
        try {
            cfg.kappa = std::stod(opts.kappa);
        } catch (const std::exception&) {
            throw std::runtime_error("--kappa must be 'sqrt-log-n' or a number, got '" +
                                     opts.kappa + "'");
        }
        cfg.kappa_auto = 0;
    }
    return cfg;
}

json config_json(const CommonOpts& opts) {
    return json{{"alpha", opts.alpha}, {"nsim", opts.n_sim},  {"kappa", opts.kappa},
                {"seed", opts.seed},   {"ridge", opts.ridge}, {"bootstrap", opts.bootstrap},
                {"format", opts.format}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
    if (!out) throw std::runtime_error("failed writing output file: " + path);
}

void write_report(const std::string& path, const std::string& format, const json& doc,
                  const std::string& csv_text) {
    if (format == "csv") {
        write_text(path, csv_text);
    } else {
        write_text(path, doc.dump(2) + "\n");
    }
}

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

const char* method_key(wlcb_method m) {
    switch (m) {
        case WLCB_LCB_NAIVE: return "naive";
        case WLCB_LCB_MAX_LF: return "max-lf";
        case WLCB_LCB_MAX_GMS: return "max-gms";
        case WLCB_LCB_QLR_MIX: return "qlr-mix";
    }
    return "?";
}

wlcb_method parse_method(const std::string& name) {
    if (name == "naive") return WLCB_LCB_NAIVE;
    if (name == "max-lf" || name == "maxlf") return WLCB_LCB_MAX_LF;
    if (name == "max-gms" || name == "maxgms") return WLCB_LCB_MAX_GMS;
    if (name == "qlr-mix" || name == "qlrmix" || name == "qlr") return WLCB_LCB_QLR_MIX;
    throw std::runtime_error("unknown method '" + name +
                             "' (expected naive, max-lf, max-gms, qlr-mix)");
}

// ---------------------------------------------------------------- analyze

struct AnalyzeOpts {
    CommonOpts common;
    std::string input;
    std::string treatment;
    std::string outcome;
    std::string covariates;  // comma-separated column names
    std::string continuous;  // subset tagged continuous
    std::string policy_col;
    std::string cell_col;  // first-stage cell column; default policy col
    std::string cutoffs;   // comma-separated cutoff values
    std::string cells;     // semicolon-separated cell sets
    bool treat_all = false;
    bool treat_none = false;
    bool gain = false;
    std::string pi = "cell";  // "cell" or "known:<value>"
    bool no_smoothing = false;
    int crossfit = 0;
    std::string bin_col;
    int bins = 0;
    double margin_delta = 0.0;
    double margin_eta = 0.0;
};

int column_index(const std::vector<std::string>& names, const std::string& name,
                 const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error(std::string(what) + " column '" + name +
                             "' is not among the declared covariates");
}

int cmd_analyze(const AnalyzeOpts& opts) {
    const wlcb_cli::CsvTable table = wlcb_cli::read_csv(opts.input);
    const int treat_col = table.column(opts.treatment);
    const int outcome_col = table.column(opts.outcome);
    const std::vector<std::string> cov_names = split_list(opts.covariates, ',');
    if (cov_names.empty()) throw std::runtime_error("at least one covariate column required");
    std::vector<int> cov_cols;
    for (const auto& name : cov_names) cov_cols.push_back(table.column(name));

    const auto n = static_cast<std::int64_t>(table.rows.size());
    const auto k = static_cast<std::int32_t>(cov_cols.size());
    std::vector<std::int32_t> treat(static_cast<std::size_t>(n));
    std::vector<double> outcome(static_cast<std::size_t>(n));
    std::vector<double> covs(static_cast<std::size_t>(n * k));
    std::vector<std::int32_t> kinds(static_cast<std::size_t>(k), WLCB_COL_DISCRETE);
    for (const auto& name : split_list(opts.continuous, ',')) {
        kinds[static_cast<std::size_t>(column_index(cov_names, name, "continuous"))] =
            WLCB_COL_CONTINUOUS;
    }
    if (!opts.bin_col.empty()) {
        kinds[static_cast<std::size_t>(column_index(cov_names, opts.bin_col, "bin"))] =
            WLCB_COL_CONTINUOUS;
    }

    for (std::int64_t i = 0; i < n; ++i) {
        const auto& row = table.rows[static_cast<std::size_t>(i)];
        const double d = wlcb_cli::parse_cell(row[static_cast<std::size_t>(treat_col)], i + 1,
                                              opts.treatment);
        if (d != 0.0 && d != 1.0) {
            throw std::runtime_error("treatment column must be binary (0/1); found '" +
                                     row[static_cast<std::size_t>(treat_col)] + "' at data row " +
                                     std::to_string(i + 1));
        }
        treat[static_cast<std::size_t>(i)] = static_cast<std::int32_t>(d);
        outcome[static_cast<std::size_t>(i)] =
            wlcb_cli::parse_cell(row[static_cast<std::size_t>(outcome_col)], i + 1, opts.outcome);
        for (std::int32_t j = 0; j < k; ++j) {
            covs[static_cast<std::size_t>(i * k + j)] = wlcb_cli::parse_cell(
                row[static_cast<std::size_t>(cov_cols[static_cast<std::size_t>(j)])], i + 1,
                cov_names[static_cast<std::size_t>(j)]);
        }
    }

    SampleH sample;
    check(wlcb_sample_create(n, k, treat.data(), outcome.data(), covs.data(), kinds.data(),
                             sample.out()));
    if (!opts.bin_col.empty()) {
        if (opts.bins < 2) throw std::runtime_error("--bins must be at least 2 with --bin-col");
        SampleH binned;
        check(wlcb_sample_bin_covariate(sample.get(),
                                        column_index(cov_names, opts.bin_col, "bin"), opts.bins,
                                        binned.out()));
        sample = std::move(binned);
    }

    const int policy_col = column_index(
        cov_names, opts.policy_col.empty() ? cov_names[0] : opts.policy_col, "policy");
    const int cell_col =
        opts.cell_col.empty() ? policy_col : column_index(cov_names, opts.cell_col, "cell");

    // test class
    PoliciesH policies;
    check(wlcb_policies_create(policies.out()));
    std::vector<std::string> labels;
    const std::string policy_name = cov_names[static_cast<std::size_t>(policy_col)];
    for (const auto& c : split_list(opts.cutoffs, ',')) {
        const double cutoff = wlcb_cli::parse_cell(c, 0, "--cutoffs");
        const std::string label = policy_name + "<=" + c;
        check(wlcb_policies_add_cutoff_le(policies.get(), policy_col, cutoff, label.c_str()));
        labels.push_back(label);
    }
    for (const auto& set : split_list(opts.cells, ';')) {
        std::vector<double> values;
        for (const auto& v : split_list(set, ',')) {
            values.push_back(wlcb_cli::parse_cell(v, 0, "--cells"));
        }
        std::string set_label = set;  // keep labels comma-free for the CSV output
        for (auto& c : set_label) {
            if (c == ',') c = '|';
        }
        const std::string label = policy_name + " in {" + set_label + "}";
        check(wlcb_policies_add_cell_set(policies.get(), policy_col, values.data(),
                                         static_cast<std::int32_t>(values.size()), label.c_str()));
        labels.push_back(label);
    }
    if (opts.treat_all) {
        check(wlcb_policies_add_treat_all(policies.get(), "treat-all"));
        labels.push_back("treat-all");
    }
    if (opts.treat_none) {
        check(wlcb_policies_add_treat_none(policies.get(), "treat-none"));
        labels.push_back("treat-none");
    }
    const auto n_policies = static_cast<std::int32_t>(labels.size());
    if (n_policies == 0) {
        throw std::runtime_error(
            "no test policies: pass --cutoffs, --cells, --treat-all or --treat-none");
    }
    if (opts.gain) {
        check(wlcb_policies_add_treat_none(policies.get(), "baseline"));
    }

    // first stage
    std::optional<double> known_pi;
    if (opts.pi.rfind("known:", 0) == 0) {
        known_pi = wlcb_cli::parse_cell(opts.pi.substr(6), 0, "--pi");
    } else if (opts.pi != "cell") {
        throw std::runtime_error("--pi must be 'cell' or 'known:<value>', got '" + opts.pi + "'");
    }
    const double* pi_ptr = known_pi ? &*known_pi : nullptr;
    const std::int32_t smoothing = opts.no_smoothing ? 0 : 1;
    FirstStageH fs;
    check(wlcb_first_stage_fit(sample.get(), cell_col, smoothing, pi_ptr, fs.out()));

    PanelH level_panel;
    if (opts.crossfit > 0) {
        check(wlcb_panel_build_crossfit(sample.get(), cell_col, smoothing, pi_ptr, policies.get(),
                                        opts.crossfit, level_panel.out()));
    } else {
        check(wlcb_panel_build(sample.get(), fs.get(), policies.get(), level_panel.out()));
    }

    // inference panel: gain scores against the appended baseline, baseline dropped
    PanelH panel;
    if (opts.gain) {
        PanelH gain_full;
        check(wlcb_panel_gain(level_panel.get(), n_policies, gain_full.out()));
        std::vector<std::int32_t> keep(static_cast<std::size_t>(n_policies));
        for (std::int32_t j = 0; j < n_policies; ++j) keep[static_cast<std::size_t>(j)] = j;
        check(wlcb_panel_subset(gain_full.get(), keep.data(), n_policies, panel.out()));
    } else {
        panel = std::move(level_panel);
    }

    std::vector<double> w_hat(static_cast<std::size_t>(n_policies));
    std::vector<double> sigma_hat(static_cast<std::size_t>(n_policies));
    check(wlcb_panel_w_hat(panel.get(), w_hat.data()));
    check(wlcb_panel_sigma_hat(panel.get(), sigma_hat.data()));

    double cellwise_baseline = 0.0;
    if (opts.gain) {
        check(wlcb_welfare_cellwise(sample.get(), fs.get(), policies.get(), n_policies,
                                    &cellwise_baseline));
    }

    json estimates = json::array();
    int best = 0;
    for (std::int32_t j = 0; j < n_policies; ++j) {
        if (w_hat[static_cast<std::size_t>(j)] > w_hat[static_cast<std::size_t>(best)]) best = j;
        double naive = 0.0;
        check(wlcb_naive_lcb(w_hat[static_cast<std::size_t>(j)],
                             sigma_hat[static_cast<std::size_t>(j)], n, opts.common.alpha,
                             &naive));
        double cellwise = 0.0;
        check(wlcb_welfare_cellwise(sample.get(), fs.get(), policies.get(), j, &cellwise));
        estimates.push_back(json{{"label", labels[static_cast<std::size_t>(j)]},
                                 {"w_hat", w_hat[static_cast<std::size_t>(j)]},
                                 {"sigma_hat", sigma_hat[static_cast<std::size_t>(j)]},
                                 {"se", sigma_hat[static_cast<std::size_t>(j)] /
                                            std::sqrt(static_cast<double>(n))},
                                 {"naive_lcb", naive},
                                 {"w_cellwise",
                                  cellwise - (opts.gain ? cellwise_baseline : 0.0)}});
    }

    const wlcb_lcb_config cfg = make_config(opts.common);
    json lcbs;
    for (const wlcb_method m : {WLCB_LCB_MAX_LF, WLCB_LCB_MAX_GMS, WLCB_LCB_QLR_MIX}) {
        wlcb_lcb_result res;
        std::vector<double> lambda(static_cast<std::size_t>(n_policies), 0.0);
        std::vector<std::int32_t> selected(static_cast<std::size_t>(n_policies), 0);
        check(wlcb_panel_lcb(panel.get(), m, &cfg, &res, lambda.data(), selected.data()));
        json entry{{"value", res.value},
                   {"crit", res.crit},
                   {"argmax", res.argmax_policy},
                   {"argmax_label", labels[static_cast<std::size_t>(res.argmax_policy)]}};
        if (m == WLCB_LCB_MAX_GMS) {
            entry["selected"] =
                std::vector<std::int32_t>(selected.begin(), selected.begin() + res.n_selected);
            entry["fallback"] = res.gms_fallback != 0;
        }
        if (m == WLCB_LCB_QLR_MIX) {
            entry["lambda"] = lambda;
            entry["lambda_degenerate"] = res.lambda_degenerate != 0;
            entry["bisection_iterations"] = res.bisection_iterations;
        }
        lcbs[method_key(m)] = entry;
    }

    json diagnostics{{"first_stage_clipped", wlcb_first_stage_clipped(fs.get()) != 0}, {"n", n}};
    if (opts.margin_delta > 0.0 && opts.margin_eta > 0.0) {
        json margin = json::array();
        for (std::int32_t j = 0; j < n_policies; ++j) {
            if (j == best) continue;
            wlcb_margin_diag diag;
            check(wlcb_margin_diagnostics(sample.get(), fs.get(), policies.get(), best, j,
                                          opts.margin_delta, opts.margin_eta, opts.common.alpha,
                                          &diag, nullptr));
            margin.push_back(json{{"against", labels[static_cast<std::size_t>(j)]},
                                  {"sym_diff_share", diag.sym_diff_share},
                                  {"welfare_gap_hat", diag.welfare_gap_hat},
                                  {"margin_lhs", diag.margin_lhs},
                                  {"violated", diag.violated != 0}});
        }
        wlcb_margin_diag diag;
        check(wlcb_margin_diagnostics(sample.get(), fs.get(), policies.get(), best, best,
                                      opts.margin_delta, opts.margin_eta, opts.common.alpha,
                                      &diag, nullptr));
        std::vector<double> cell_t(static_cast<std::size_t>(diag.n_cells));
        check(wlcb_margin_diagnostics(sample.get(), fs.get(), policies.get(), best, best,
                                      opts.margin_delta, opts.margin_eta, opts.common.alpha,
                                      &diag, cell_t.data()));
        diagnostics["margin"] = json{{"pairs", margin},
                                     {"cell_t", cell_t},
                                     {"iut_reject_nonuniqueness", diag.iut_reject != 0}};
    }

    json config = config_json(opts.common);
    config["input"] = opts.input;
    config["treatment"] = opts.treatment;
    config["outcome"] = opts.outcome;
    config["covariates"] = cov_names;
    config["policy_col"] = policy_name;
    config["gain"] = opts.gain;
    config["pi"] = opts.pi;
    config["smoothing"] = !opts.no_smoothing;
    config["crossfit"] = opts.crossfit;
    if (!opts.bin_col.empty()) {
        config["bin_col"] = opts.bin_col;
        config["bins"] = opts.bins;
    }

    json doc{{"spec_version", kSpecVersion},
             {"command", "analyze"},
             {"config", config},
             {"estimates", estimates},
             {"lcbs", lcbs},
             {"best", json{{"index", best},
                           {"label", labels[static_cast<std::size_t>(best)]},
                           {"w_hat", w_hat[static_cast<std::size_t>(best)]}}},
             {"diagnostics", diagnostics}};

    std::ostringstream csv;
    csv << "record,label,w_hat,sigma_hat,naive_lcb,w_cellwise,value,crit\n";
    for (const auto& e : estimates) {
        csv << "estimate," << e["label"].get<std::string>() << "," << e["w_hat"].dump() << ","
            << e["sigma_hat"].dump() << "," << e["naive_lcb"].dump() << ","
            << e["w_cellwise"].dump() << ",,\n";
    }
    for (const auto& [key, entry] : lcbs.items()) {
        csv << "lcb," << key << ",,,,," << entry["value"].dump() << "," << entry["crit"].dump()
            << "\n";
    }
    write_report(opts.common.out, opts.common.format, doc, csv.str());

    std::cout << "analyze: N=" << n << ", " << n_policies << " test policies"
              << (opts.gain ? " (welfare gain vs treat-none)" : "") << "\n";
    for (const auto& e : estimates) {
        std::cout << "  " << e["label"].get<std::string>() << ": W=" << e["w_hat"].dump()
                  << " se=" << e["se"].dump() << " naive LCB=" << e["naive_lcb"].dump() << "\n";
    }
    for (const auto& [key, entry] : lcbs.items()) {
        std::cout << "  LCB[" << key << "] = " << entry["value"].dump() << " (crit "
                  << entry["crit"].dump() << ")\n";
    }
    std::cout << "wrote " << opts.common.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    CommonOpts common;
    std::string dgp = "dominance";
    std::int64_t n = 10000;
    double p = 0.5, pi1 = 0.5, pi0 = 0.5;
    double eps = -1.0;  // <0 => 1/sqrt(n) (dominance) or design default (margin)
    std::string variant = "welfare";
    std::string family = "two-point";
    std::vector<double> variances;
    double M = 5.0, nu = 1.0;
    bool closed_form_only = false;
    bool mse = false;
    bool coverage = false;
    bool rate_sweep = false;
    std::int64_t n_reps = 0;
    std::string methods = "max-lf,max-gms,qlr-mix";
    std::string n_grid = "1000,10000,100000,1000000";
    int bins = 5;
};

wlcb_dominance_dgp make_dominance(const SimulateOpts& opts, double eps) {
    wlcb_dominance_dgp dgp;
    wlcb_dominance_dgp_init(&dgp,
                            opts.variant == "gain" ? WLCB_VARIANT_GAIN : WLCB_VARIANT_WELFARE);
    dgp.p = opts.p;
    dgp.pi1 = opts.pi1;
    dgp.pi0 = opts.pi0;
    dgp.eps = eps;
    dgp.family = opts.family == "gaussian" ? WLCB_FAMILY_GAUSSIAN : WLCB_FAMILY_TWO_POINT;
    if (!opts.variances.empty()) {
        if (opts.variances.size() != 4) {
            throw std::runtime_error("--variances needs exactly 4 values: v11,v10,v01,v00");
        }
        dgp.var11 = opts.variances[0];
        dgp.var10 = opts.variances[1];
        dgp.var01 = opts.variances[2];
        dgp.var00 = opts.variances[3];
    }
    return dgp;
}

json population_json(const wlcb_population_moments& pm) {
    return json{{"w_gstar", pm.w_gstar},
                {"w_g", pm.w_g},
                {"sigma2_gstar", pm.sigma2_gstar},
                {"sigma2_g", pm.sigma2_g},
                {"sigma_gstar", std::sqrt(pm.sigma2_gstar)},
                {"sigma_g", std::sqrt(pm.sigma2_g)},
                {"delta_gap", pm.delta_gap}};
}

json coverage_json_and_csv(const wlcb_coverage_report& rep,
                           const std::vector<std::int32_t>& methods, std::ostringstream& csv) {
    json per;
    csv << "method,coverage,mean_lcb,se_lcb\n";
    for (const std::int32_t m : methods) {
        const char* key = method_key(static_cast<wlcb_method>(m));
        per[key] = json{{"coverage", rep.coverage[m]},
                        {"mean_lcb", rep.mean_lcb[m]},
                        {"se_lcb", rep.se_lcb[m]}};
        csv << key << "," << json(rep.coverage[m]).dump() << "," << json(rep.mean_lcb[m]).dump()
            << "," << json(rep.se_lcb[m]).dump() << "\n";
    }
    return json{{"w_gstar", rep.w_gstar},
                {"n_reps", rep.n_reps},
                {"per_method", per},
                {"gms_ge_lf_every_rep", rep.gms_ge_lf_every_rep != 0}};
}

int cmd_simulate(const SimulateOpts& opts) {
    const int modes = static_cast<int>(opts.closed_form_only) + static_cast<int>(opts.mse) +
                      static_cast<int>(opts.coverage) + static_cast<int>(opts.rate_sweep);
    if (modes != 1) {
        throw std::runtime_error(
            "pick exactly one of --closed-form-only, --mse, --coverage, --rate-sweep");
    }
    json config = config_json(opts.common);
    config["dgp"] = opts.dgp;
    config["n"] = opts.n;

    json result;
    std::ostringstream csv;

    if (opts.dgp == "dominance") {
        const double eps =
            opts.eps >= 0.0 ? opts.eps : 1.0 / std::sqrt(static_cast<double>(opts.n));
        config["p"] = opts.p;
        config["pi1"] = opts.pi1;
        config["pi0"] = opts.pi0;
        config["eps"] = eps;
        config["variant"] = opts.variant;
        config["family"] = opts.family;
        const wlcb_dominance_dgp dgp = make_dominance(opts, eps);

        if (opts.closed_form_only) {
            wlcb_population_moments pm;
            check(wlcb_closed_form_moments(&dgp, opts.n, opts.common.alpha, &pm));
            result["population"] = population_json(pm);
            csv << "key,value\n";
            for (const auto& [key, value] : result["population"].items()) {
                csv << key << "," << value.dump() << "\n";
            }
        } else if (opts.mse) {
            const std::int64_t reps = opts.n_reps > 0 ? opts.n_reps : 2000;
            config["nreps"] = reps;
            wlcb_mse_report rep;
            check(wlcb_mse_experiment(&dgp, opts.n, reps, opts.common.seed, &rep));
            result["mse"] = json{{"n", rep.n},
                                 {"n_reps", rep.n_reps},
                                 {"w_target", rep.w_target},
                                 {"mse_suboptimal", rep.mse_suboptimal},
                                 {"mse_oracle", rep.mse_oracle},
                                 {"se_suboptimal", rep.se_suboptimal},
                                 {"se_oracle", rep.se_oracle},
                                 {"n_mse_suboptimal", rep.mse_suboptimal * rep.n},
                                 {"n_mse_oracle", rep.mse_oracle * rep.n}};
            csv << "key,value\n";
            for (const auto& [key, value] : result["mse"].items()) {
                csv << key << "," << value.dump() << "\n";
            }
        } else if (opts.coverage) {
            const std::int64_t reps = opts.n_reps > 0 ? opts.n_reps : 1000;
            config["nreps"] = reps;
            config["methods"] = opts.methods;
            PoliciesH policies;
            check(wlcb_policies_create(policies.out()));
            check(wlcb_policies_add_treat_all(policies.get(), "treat-all"));
            check(wlcb_policies_add_treat_none(policies.get(), "treat-none"));
            const double zero = 0.0, one = 1.0;
            check(wlcb_policies_add_cell_set(policies.get(), 0, &zero, 1, "{0}"));
            check(wlcb_policies_add_cell_set(policies.get(), 0, &one, 1, "{1}"));
            std::vector<std::int32_t> methods;
            for (const auto& name : split_list(opts.methods, ',')) {
                methods.push_back(parse_method(name));
            }
            const wlcb_lcb_config cfg = make_config(opts.common);
            wlcb_coverage_report rep;
            check(wlcb_coverage_experiment_dominance(&dgp, opts.n, policies.get(), methods.data(),
                                                     static_cast<std::int32_t>(methods.size()),
                                                     &cfg, reps, opts.common.seed, &rep));
            result["coverage"] = coverage_json_and_csv(rep, methods, csv);
        } else {
            throw std::runtime_error("--rate-sweep applies to --dgp margin only");
        }
    } else if (opts.dgp == "margin") {
        config["M"] = opts.M;
        config["nu"] = opts.nu;
        if (opts.closed_form_only) {
            const double eps = opts.eps >= 0.0 ? opts.eps : 0.1;
            config["eps"] = eps;
            wlcb_margin_dgp dgp{opts.M, eps, opts.nu};
            wlcb_population_moments pm;
            check(wlcb_margin_moments(&dgp, opts.n, opts.common.alpha, &pm));
            result["population"] = population_json(pm);
            csv << "key,value\n";
            for (const auto& [key, value] : result["population"].items()) {
                csv << key << "," << value.dump() << "\n";
            }
        } else if (opts.rate_sweep) {
            double z = 0.0;
            check(wlcb_normal_quantile(1.0 - opts.common.alpha, &z));
            json rows = json::array();
            csv << "n,eps,delta_gap\n";
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            const std::vector<std::string> grid = split_list(opts.n_grid, ',');
            config["n_grid"] = opts.n_grid;
            for (const auto& item : grid) {
                const auto nn = static_cast<std::int64_t>(std::stod(item));
                // tuned sequence eps^nu = (4 z / 5) / sqrt(N)
                const double eps =
                    std::pow(0.8 * z / std::sqrt(static_cast<double>(nn)), 1.0 / opts.nu);
                wlcb_margin_dgp dgp{opts.M, eps, opts.nu};
                wlcb_population_moments pm;
                check(wlcb_margin_moments(&dgp, nn, opts.common.alpha, &pm));
                rows.push_back(json{{"n", nn}, {"eps", eps}, {"delta_gap", pm.delta_gap}});
                csv << nn << "," << json(eps).dump() << "," << json(pm.delta_gap).dump() << "\n";
                const double lx = std::log(static_cast<double>(nn));
                const double ly = std::log(pm.delta_gap);
                sx += lx;
                sy += ly;
                sxx += lx * lx;
                sxy += lx * ly;
            }
            const auto g = static_cast<double>(grid.size());
            const double slope = (g * sxy - sx * sy) / (g * sxx - sx * sx);
            result["sweep"] = rows;
            result["loglog_slope"] = slope;
            result["expected_slope"] = -(1.0 + 1.0 / opts.nu) / 2.0;
        } else if (opts.coverage) {
            const double eps = opts.eps >= 0.0 ? opts.eps : 0.1;
            config["eps"] = eps;
            config["bins"] = opts.bins;
            const std::int64_t reps = opts.n_reps > 0 ? opts.n_reps : 1000;
            config["nreps"] = reps;
            config["methods"] = opts.methods;
            wlcb_margin_dgp dgp{opts.M, eps, opts.nu};
            PoliciesH policies;
            check(wlcb_policies_create(policies.out()));
            check(wlcb_policies_add_treat_all(policies.get(), "treat-all"));
            check(wlcb_policies_add_treat_none(policies.get(), "treat-none"));
            std::vector<std::int32_t> methods;
            for (const auto& name : split_list(opts.methods, ',')) {
                methods.push_back(parse_method(name));
            }
            const wlcb_lcb_config cfg = make_config(opts.common);
            wlcb_coverage_report rep;
            check(wlcb_coverage_experiment_margin(
                &dgp, opts.n, opts.bins, policies.get(), methods.data(),
                static_cast<std::int32_t>(methods.size()), &cfg, reps, opts.common.seed, &rep));
            result["coverage"] = coverage_json_and_csv(rep, methods, csv);
        } else {
            throw std::runtime_error("--mse applies to --dgp dominance only");
        }
    } else {
        throw std::runtime_error("--dgp must be 'dominance' or 'margin', got '" + opts.dgp + "'");
    }

    json doc{{"spec_version", kSpecVersion},
             {"command", "simulate"},
             {"config", config},
             {"result", result}};
    write_report(opts.common.out, opts.common.format, doc, csv.str());
    std::cout << "simulate (" << opts.dgp << "): wrote " << opts.common.out << "\n";
    return 0;
}

// ---------------------------------------------------------------- report

struct ReportOpts {
    CommonOpts common;
    std::string inputs;
};

int cmd_report(const ReportOpts& opts) {
    const std::vector<std::string> paths = split_list(opts.inputs, ',');
    if (paths.empty()) throw std::runtime_error("--inputs requires at least one analyze output");
    std::vector<json> docs;
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open input file: " + path);
        json j;
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw std::runtime_error("schema mismatch: " + path + " is not valid JSON (" +
                                     e.what() + ")");
        }
        if (!j.contains("spec_version") || j["spec_version"] != kSpecVersion ||
            !j.contains("command") || j["command"] != "analyze" || !j.contains("best") ||
            !j.contains("lcbs")) {
            throw std::runtime_error("schema mismatch: " + path + " is not a spec_version-" +
                                     kSpecVersion + " analyze report");
        }
        docs.push_back(std::move(j));
    }

    json rows = json::array();
    const json& ref = docs.front();
    const double w_ref = ref["best"]["w_hat"].get<double>();
    for (std::size_t i = 0; i < docs.size(); ++i) {
        const json& doc = docs[i];
        json row{{"source", paths[i]},
                 {"label", doc["best"]["label"]},
                 {"w_best", doc["best"]["w_hat"]},
                 {"welfare_gap", doc["best"]["w_hat"].get<double>() - w_ref},
                 {"lcbs", doc["lcbs"]}};
        json rel;
        for (const auto& [key, entry] : doc["lcbs"].items()) {
            if (!ref["lcbs"].contains(key)) continue;
            const double lcb_ref = ref["lcbs"][key]["value"].get<double>();
            if (lcb_ref != 0.0) {
                rel[key] = 100.0 * (1.0 - entry["value"].get<double>() / lcb_ref);
            }
        }
        row["relative_lcb_gap_pct"] = rel;
        rows.push_back(std::move(row));
    }

    json doc{{"spec_version", kSpecVersion},
             {"command", "report"},
             {"config", json{{"inputs", paths}, {"format", opts.common.format}}},
             {"rows", rows}};

    std::ostringstream csv;
    csv << "source,label,w_best,welfare_gap,method,lcb,crit,relative_lcb_gap_pct\n";
    for (const auto& row : rows) {
        for (const auto& [key, entry] : row["lcbs"].items()) {
            csv << row["source"].get<std::string>() << "," << row["label"].get<std::string>()
                << "," << row["w_best"].dump() << "," << row["welfare_gap"].dump() << "," << key
                << "," << entry["value"].dump() << "," << entry["crit"].dump() << ",";
            if (row["relative_lcb_gap_pct"].contains(key)) {
                csv << row["relative_lcb_gap_pct"][key].dump();
            }
            csv << "\n";
        }
    }
    write_report(opts.common.out, opts.common.format, doc, csv.str());
    std::cout << "report: merged " << docs.size() << " input(s) into " << opts.common.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lower confidence bands for optimal treatment welfare"};
    app.set_version_flag("--version", std::string("welfare-lcb ") + wlcb_version());
    app.require_subcommand(1);

    AnalyzeOpts an;
    CLI::App* analyze = app.add_subcommand("analyze", "estimate LCBs from a CSV dataset");
    analyze->add_option("--input", an.input, "input CSV")->required();
    analyze->add_option("--treatment", an.treatment, "treatment column name")->required();
    analyze->add_option("--outcome", an.outcome, "outcome column name")->required();
    analyze->add_option("--covariates", an.covariates, "comma-separated covariate columns")
        ->required();
    analyze->add_option("--continuous", an.continuous, "covariates tagged continuous");
    analyze->add_option("--policy-col", an.policy_col, "column the policies act on");
    analyze->add_option("--cell-col", an.cell_col, "first-stage cell column (default policy col)");
    analyze->add_option("--cutoffs", an.cutoffs, "comma-separated cutoff policies");
    analyze->add_option("--cells", an.cells, "semicolon-separated cell-set policies");
    analyze->add_flag("--treat-all", an.treat_all, "include the treat-everyone policy");
    analyze->add_flag("--treat-none", an.treat_none, "include the treat-no-one policy");
    analyze->add_flag("--gain", an.gain, "report welfare gain against treat-none");
    analyze->add_option("--pi", an.pi, "'cell' or 'known:<value>'");
    analyze->add_flag("--no-smoothing", an.no_smoothing, "disable the +1 denominators");
    analyze->add_option("--crossfit", an.crossfit, "K-fold cross-fitting (0 = off)");
    analyze->add_option("--bin-col", an.bin_col, "continuous column to quantile-bin");
    analyze->add_option("--bins", an.bins, "number of bins for --bin-col");
    analyze->add_option("--margin-delta", an.margin_delta, "margin exponent for diagnostics");
    analyze->add_option("--margin-eta", an.margin_eta, "margin scale for diagnostics");
    add_common(analyze, an.common);

    SimulateOpts sim;
    CLI::App* simulate = app.add_subcommand("simulate", "synthetic-design experiments");
    simulate->add_option("--dgp", sim.dgp, "dominance or margin");
    simulate->add_option("--n", sim.n, "sample size");
    simulate->add_option("--p", sim.p, "P(X = 1)");
    simulate->add_option("--pi1", sim.pi1, "propensity at X = 1");
    simulate->add_option("--pi0", sim.pi0, "propensity at X = 0");
    simulate->add_option("--eps", sim.eps, "mean separation (default 1/sqrt(n))");
    simulate->add_option("--variant", sim.variant, "welfare or gain");
    simulate->add_option("--family", sim.family, "two-point or gaussian");
    simulate->add_option("--variances", sim.variances, "cell variances v11,v10,v01,v00")
        ->delimiter(',');
    simulate->add_option("--M", sim.M, "outcome bound (margin design)");
    simulate->add_option("--nu", sim.nu, "margin exponent nu = 1/delta");
    simulate->add_flag("--closed-form-only", sim.closed_form_only, "population table only");
    simulate->add_flag("--mse", sim.mse, "estimator MSE experiment");
    simulate->add_flag("--coverage", sim.coverage, "LCB coverage experiment");
    simulate->add_flag("--rate-sweep", sim.rate_sweep, "LCB-gap rate over an N grid");
    simulate->add_option("--nreps", sim.n_reps, "Monte Carlo replications");
    simulate->add_option("--methods", sim.methods, "comma-separated LCB methods");
    simulate->add_option("--n-grid", sim.n_grid, "N grid for --rate-sweep");
    simulate->add_option("--bins", sim.bins, "bins for the margin coverage design");
    add_common(simulate, sim.common);

    ReportOpts rep;
    CLI::App* report = app.add_subcommand("report", "merge analyze outputs into one table");
    report->add_option("--inputs", rep.inputs, "comma-separated analyze JSON files")->required();
    add_common(report, rep.common);

    try {
        app.parse(argc, argv);
        if (*analyze) return cmd_analyze(an);
        if (*simulate) return cmd_simulate(sim);
        if (*report) return cmd_report(rep);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << "ERROR: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "ERROR: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
