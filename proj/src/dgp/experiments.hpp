#ifndef WLCB_DGP_EXPERIMENTS_HPP
#define WLCB_DGP_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <vector>

#include "dgp/dgp.hpp"
#include "inference/lcb.hpp"

namespace wlcb::dgp {

struct MseReport {
    long n = 0;
    long n_reps = 0;
    double w_target = 0.0;       // population optimal welfare
    double mse_suboptimal = 0.0;  // treat-everyone estimator
    double mse_oracle = 0.0;      // first-best-policy estimator
    double se_suboptimal = 0.0;   // MC standard errors of the MSE estimates
    double se_oracle = 0.0;
};

// Prop.-1 replication: cellwise plug-in estimators with +1 smoothing, both
// measured against the optimal welfare. Replications use substreamed RNG and
// may run in parallel; reports are reproducible for a fixed seed.
MseReport mse_experiment(const DominanceDgp& dgp, long n, long n_reps, std::uint64_t seed);

struct CoverageReport {
    long n = 0;
    long n_reps = 0;
    double w_gstar = 0.0;
    std::map<LcbMethod, double> coverage;  // empirical P(LCB <= W_{G*})
    std::map<LcbMethod, double> mean_lcb;
    std::map<LcbMethod, double> se_lcb;    // MC s.e. of the mean LCB
    // Per-replication dominance check, meaningful when both max methods run.
    bool gms_ge_lf_every_rep = true;
};

CoverageReport coverage_experiment(const DominanceDgp& dgp, long n,
                                   const std::vector<Policy>& policies,
                                   const std::vector<LcbMethod>& methods, const LcbConfig& cfg,
                                   long n_reps, std::uint64_t seed);

// Margin variant: the continuous covariate is quantile-binned into n_bins
// cells and the propensity is the known constant 1/2.
CoverageReport coverage_experiment(const MarginDgp& dgp, long n, int n_bins,
                                   const std::vector<Policy>& policies,
                                   const std::vector<LcbMethod>& methods, const LcbConfig& cfg,
                                   long n_reps, std::uint64_t seed);

struct MarginDiagnostics {
    double sym_diff_share = 0.0;   // share of rows treated differently by the two policies
    double welfare_gap_hat = 0.0;  // score-mean estimate of W_{G*} - W_G
    double margin_lhs = 0.0;       // C1(delta) * share^{1 + 1/delta} - gap
    bool violated = false;         // margin_lhs > 0: incompatible with the margin bound
    std::vector<double> cell_values;
    std::vector<double> cell_tau;  // per-cell CATE estimates (unsmoothed)
    std::vector<double> cell_t;    // CATE t-statistics
    bool iut_reject = false;       // every cell rejects tau(j) = 0 at level alpha
};

// In-sample margin heuristics: the symmetric-difference share between the
// candidate optimal policy and an alternative, the margin-bound check, and
// the per-cell intersection-union CATE test.
MarginDiagnostics margin_diagnostics(const Sample& sample, const FirstStage& fs,
                                     const Policy& gstar, const Policy& g, double delta_low,
                                     double eta, double alpha);

}  // namespace wlcb::dgp

#endif
