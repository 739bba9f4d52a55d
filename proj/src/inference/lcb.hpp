#ifndef WLCB_INFERENCE_LCB_HPP
#define WLCB_INFERENCE_LCB_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/scores.hpp"

namespace wlcb {

struct LcbConfig {
    double alpha = 0.05;
    long n_sim = 100000;          // critical-value simulation draws
    std::optional<double> kappa;  // GMS tuning; empty => sqrt(log N)
    std::uint64_t seed = 0;
    double ridge = 1e-8;          // QLR covariance regularization scale
    bool multiplier_bootstrap = false;  // draw from score rows instead of N(0, Sigma)

    double kappa_for(long n) const;
    void validate() const;
};

enum class LcbMethod { Naive, MaxLF, MaxGMS, QlrMix };

const char* method_name(LcbMethod m);

struct LcbResult {
    double value = 0.0;
    LcbMethod method = LcbMethod::Naive;
    double crit = 0.0;               // max-stat scale for Naive/MaxLF/MaxGMS; QLR quantile (squared scale) for QlrMix
    int argmax_policy = -1;          // ties broken by lowest index
    Eigen::VectorXd lambda;          // QlrMix mixture weights (simplex)
    std::vector<int> selected;       // MaxGMS selected moment set
    bool gms_fallback = false;       // no qualifying GMS step; LF value returned
    bool lambda_degenerate = false;  // QLR dual was zero; lambda is a placeholder
    int bisection_iterations = 0;
};

// LCB_G = W_hat - z_{1-alpha} sigma_hat / sqrt(n).
LcbResult naive_lcb(double w_hat, double sigma_hat, long n, double alpha);

// (1-alpha) quantile of max_j xi_j / sigma_j, xi ~ N(0, cov_hat), estimated
// from n_sim Gaussian draws; deterministic given seed. Throws "degenerate
// moment" on a zero diagonal entry.
double lf_crit_max(const Eigen::MatrixXd& cov_hat, double alpha, long n_sim, std::uint64_t seed);

// Same quantile restricted to a subset of moments; empty set returns 0.
double gms_crit(const ScorePanel& panel, const std::vector<int>& selected, const LcbConfig& cfg);

LcbResult max_lf_lcb(const ScorePanel& panel, const LcbConfig& cfg);

// Closed-form GMS test inversion over the threshold step function; falls back
// to the least-favorable LCB (flagged) when no step qualifies.
LcbResult max_gms_lcb(const ScorePanel& panel, const LcbConfig& cfg);

// QLR statistic min_{t<=0} (sqrt(N)(W-theta) - t)' Sigma~^{-1} (...) where
// Sigma~ = cov_hat + ridge * trace/J * I.
double qlr_stat(const ScorePanel& panel, double theta, double ridge = 1e-8);

// (1-alpha) quantile of the QLR statistic under xi ~ N(0, Sigma~); one
// projection per draw.
double qlr_lf_crit(const ScorePanel& panel, const LcbConfig& cfg);

// Mixture LCB: smallest theta whose QLR test does not reject, located by
// bisection; the attaining simplex weights come from the projection duals.
LcbResult qlr_lcb(const ScorePanel& panel, const LcbConfig& cfg);

// Dispatch. Naive applies to the panel's argmax-W_hat column (the plug-in
// choice), which for a singleton class is just that policy.
LcbResult compute_lcb(const ScorePanel& panel, LcbMethod method, const LcbConfig& cfg);

namespace detail {

// F with F F' = cov; PSD-safe (eigendecomposition, negative eigenvalues clipped).
Eigen::MatrixXd mvn_factor(const Eigen::MatrixXd& cov);

// n_sim x J standard normals; row r comes from substream (seed, r), so the
// matrix can be filled in parallel yet bit-matches serial generation.
Eigen::MatrixXd std_normal_matrix(std::uint64_t seed, long n_sim, int J);

// Simulation draws of xi (rows): Gaussian from cov, or the multiplier
// bootstrap over score rows when cfg requests it.
Eigen::MatrixXd crit_draws(const ScorePanel& panel, const Eigen::MatrixXd& cov,
                           const LcbConfig& cfg);

Eigen::MatrixXd ridged_cov(const ScorePanel& panel, double ridge);

}  // namespace detail

}  // namespace wlcb

#endif
