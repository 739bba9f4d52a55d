#include "dgp/experiments.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

#include "math/parallel.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"

namespace wlcb::dgp {

namespace {

// Cellwise plug-in welfare for the two binary-covariate policies of the
// dominance design, per the +1-smoothed cell means.
struct CellwisePair {
    double oracle;      // policy {0}
    double suboptimal;  // treat everyone
};

CellwisePair cellwise_estimates(const Sample& sample) {
    const FirstStage fs = fit_first_stage(sample, 0, /*smoothing=*/true);
    double p_hat = 0.0;
    for (long i = 0; i < sample.n(); ++i) p_hat += sample.covariates(i, 0);
    p_hat /= static_cast<double>(sample.n());
    CellwisePair out;
    out.oracle = fs.m(0, 1.0) * p_hat + fs.m(1, 0.0) * (1.0 - p_hat);
    out.suboptimal = fs.m(1, 1.0) * p_hat + fs.m(1, 0.0) * (1.0 - p_hat);
    return out;
}

}  // namespace

MseReport mse_experiment(const DominanceDgp& dgp, long n, long n_reps, std::uint64_t seed) {
    dgp.validate();
    if (dgp.variant != DominanceVariant::Welfare) {
        throw std::invalid_argument("mse experiment: welfare variant required");
    }
    if (n_reps < 2) throw std::invalid_argument("mse experiment: need at least 2 replications");

    const double w_target = dominance_welfare(dgp, false, true);
    std::vector<double> sq_sub(static_cast<std::size_t>(n_reps));
    std::vector<double> sq_oracle(static_cast<std::size_t>(n_reps));
    parallel_for(n_reps, [&](long r) {
        const Sample s = sample_dominance(dgp, n, splitmix64(seed ^ splitmix64(r)));
        const CellwisePair est = cellwise_estimates(s);
        sq_oracle[static_cast<std::size_t>(r)] =
            (est.oracle - w_target) * (est.oracle - w_target);
        sq_sub[static_cast<std::size_t>(r)] =
            (est.suboptimal - w_target) * (est.suboptimal - w_target);
    });

    const MeanSe sub = mean_and_se(sq_sub);
    const MeanSe oracle = mean_and_se(sq_oracle);
    MseReport report;
    report.n = n;
    report.n_reps = n_reps;
    report.w_target = w_target;
    report.mse_suboptimal = sub.mean;
    report.mse_oracle = oracle.mean;
    report.se_suboptimal = sub.se;
    report.se_oracle = oracle.se;
    return report;
}

namespace {

struct RepOutcome {
    std::vector<double> lcb;  // one entry per requested method
    bool gms_ge_lf = true;
};

CoverageReport run_coverage(const std::function<Sample(std::uint64_t)>& draw_sample,
                            const std::function<ScorePanel(const Sample&)>& make_panel,
                            double w_gstar, const std::vector<LcbMethod>& methods,
                            const LcbConfig& cfg, long n, long n_reps, std::uint64_t seed) {
    if (methods.empty()) throw std::invalid_argument("coverage experiment: no methods requested");
    if (n_reps < 1) throw std::invalid_argument("coverage experiment: n_reps must be positive");
    cfg.validate();

    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(n_reps));
    parallel_for(n_reps, [&](long r) {
        const std::uint64_t rep_seed = splitmix64(seed ^ splitmix64(r));
        const Sample s = draw_sample(rep_seed);
        const ScorePanel panel = make_panel(s);
        LcbConfig rep_cfg = cfg;
        // One substream per replication; shared across methods so the max-stat
        // methods see common draws.
        rep_cfg.seed = splitmix64(rep_seed + 0x517cc1b727220a95ULL);
        RepOutcome& out = outcomes[static_cast<std::size_t>(r)];
        out.lcb.resize(methods.size());
        double lf_value = 0.0, gms_value = 0.0;
        bool has_lf = false, has_gms = false;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const LcbResult res = compute_lcb(panel, methods[m], rep_cfg);
            out.lcb[m] = res.value;
            if (methods[m] == LcbMethod::MaxLF) {
                lf_value = res.value;
                has_lf = true;
            }
            if (methods[m] == LcbMethod::MaxGMS) {
                gms_value = res.value;
                has_gms = true;
            }
        }
        if (has_lf && has_gms) out.gms_ge_lf = gms_value >= lf_value;
    });

    CoverageReport report;
    report.n = n;
    report.n_reps = n_reps;
    report.w_gstar = w_gstar;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        std::vector<double> values(static_cast<std::size_t>(n_reps));
        long covered = 0;
        for (long r = 0; r < n_reps; ++r) {
            const double v = outcomes[static_cast<std::size_t>(r)].lcb[m];
            values[static_cast<std::size_t>(r)] = v;
            if (v <= w_gstar) ++covered;
        }
        const MeanSe ms = mean_and_se(values);
        report.coverage[methods[m]] = static_cast<double>(covered) / static_cast<double>(n_reps);
        report.mean_lcb[methods[m]] = ms.mean;
        report.se_lcb[methods[m]] = ms.se;
    }
    report.gms_ge_lf_every_rep = true;
    for (const auto& out : outcomes) report.gms_ge_lf_every_rep &= out.gms_ge_lf;
    return report;
}

}  // namespace

CoverageReport coverage_experiment(const DominanceDgp& dgp, long n,
                                   const std::vector<Policy>& policies,
                                   const std::vector<LcbMethod>& methods, const LcbConfig& cfg,
                                   long n_reps, std::uint64_t seed) {
    dgp.validate();
    if (dgp.variant != DominanceVariant::Welfare) {
        throw std::invalid_argument("coverage experiment: welfare variant required");
    }
    const double w_gstar = dominance_welfare(dgp, false, true);
    return run_coverage(
        [&](std::uint64_t s) { return sample_dominance(dgp, n, s); },
        [&](const Sample& s) { return build_panel(s, 0, policies, PanelOptions{}); }, w_gstar,
        methods, cfg, n, n_reps, seed);
}

CoverageReport coverage_experiment(const MarginDgp& dgp, long n, int n_bins,
                                   const std::vector<Policy>& policies,
                                   const std::vector<LcbMethod>& methods, const LcbConfig& cfg,
                                   long n_reps, std::uint64_t seed) {
    dgp.validate();
    const double w_gstar = margin_moments(dgp, n, cfg.alpha).w_gstar;
    PanelOptions opts;
    opts.known_pi = 0.5;
    return run_coverage(
        [&](std::uint64_t s) { return sample_margin(dgp, n, s); },
        [&](const Sample& s) { return build_panel(bin_covariate(s, 0, n_bins), 0, policies, opts); },
        w_gstar, methods, cfg, n, n_reps, seed);
}

MarginDiagnostics margin_diagnostics(const Sample& sample, const FirstStage& fs,
                                     const Policy& gstar, const Policy& g, double delta_low,
                                     double eta, double alpha) {
    if (!(delta_low > 0.0)) throw std::invalid_argument("delta_low must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
    MarginDiagnostics diag;

    const Eigen::VectorXd in_star = gstar.indicators(sample);
    const Eigen::VectorXd in_g = g.indicators(sample);
    diag.sym_diff_share =
        (in_star - in_g).cwiseAbs().sum() / static_cast<double>(sample.n());

    const ScorePanel panel = dr_scores(sample, fs, {gstar, g});
    diag.welfare_gap_hat = panel.w_hat[0] - panel.w_hat[1];

    const double c1 = eta * delta_low *
                      std::pow(1.0 / (1.0 + delta_low), 1.0 + 1.0 / delta_low);
    diag.margin_lhs =
        c1 * std::pow(diag.sym_diff_share, 1.0 + 1.0 / delta_low) - diag.welfare_gap_hat;
    diag.violated = diag.margin_lhs > 0.0;

    // Per-cell CATE t-statistics from unsmoothed within-cell means/variances;
    // the intersection-union test rejects "some tau(j) = 0" only if every
    // cell rejects.
    const double z = normal_quantile(1.0 - alpha / 2.0);
    struct CellAcc {
        double sum[2] = {0.0, 0.0};
        double sumsq[2] = {0.0, 0.0};
        long count[2] = {0, 0};
    };
    std::map<double, CellAcc> cells;
    for (long i = 0; i < sample.n(); ++i) {
        auto& acc = cells[sample.covariates(i, fs.col)];
        const int d = sample.treat[i];
        acc.sum[d] += sample.outcome[i];
        acc.sumsq[d] += sample.outcome[i] * sample.outcome[i];
        ++acc.count[d];
    }
    diag.iut_reject = true;
    for (const auto& [value, acc] : cells) {
        diag.cell_values.push_back(value);
        bool rejects = false;
        double tau = 0.0, tstat = 0.0;
        if (acc.count[0] >= 2 && acc.count[1] >= 2) {
            const double m1 = acc.sum[1] / static_cast<double>(acc.count[1]);
            const double m0 = acc.sum[0] / static_cast<double>(acc.count[0]);
            const double v1 = (acc.sumsq[1] - acc.count[1] * m1 * m1) /
                              static_cast<double>(acc.count[1] - 1);
            const double v0 = (acc.sumsq[0] - acc.count[0] * m0 * m0) /
                              static_cast<double>(acc.count[0] - 1);
            const double se = std::sqrt(std::max(v1, 0.0) / acc.count[1] +
                                        std::max(v0, 0.0) / acc.count[0]);
            tau = m1 - m0;
            if (se > 0.0) {
                tstat = tau / se;
                rejects = std::abs(tstat) > z;
            }
        }
        diag.cell_tau.push_back(tau);
        diag.cell_t.push_back(tstat);
        diag.iut_reject &= rejects;
    }
    return diag;
}

}  // namespace wlcb::dgp
