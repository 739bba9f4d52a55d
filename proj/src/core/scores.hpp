#ifndef WLCB_CORE_SCORES_HPP
#define WLCB_CORE_SCORES_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "core/first_stage.hpp"
#include "core/policy.hpp"
#include "core/sample.hpp"

namespace wlcb {

// Efficient-score panel over a finite test class: the N x J score matrix
// psi_G(Z_i), column means W_hat, per-column standard deviations (1/N
// normalization) and the J x J covariance Sigma_hat.
struct ScorePanel {
    Eigen::MatrixXd scores;     // N x J; empty (0 x J) for synthetic panels
    Eigen::VectorXd w_hat;      // J
    Eigen::VectorXd sigma_hat;  // J
    Eigen::MatrixXd cov_hat;    // J x J, symmetric PSD
    long n = 0;                 // sample size backing the panel
    std::vector<std::string> labels;

    int cols() const { return static_cast<int>(w_hat.size()); }

    // Derives w_hat / sigma_hat / cov_hat from a raw score matrix.
    static ScorePanel from_scores(Eigen::MatrixXd scores, std::vector<std::string> labels = {});

    // Moment-only panel (no score rows); methods that need rows (the
    // multiplier bootstrap) reject such panels.
    static ScorePanel from_moments(Eigen::VectorXd w_hat, Eigen::MatrixXd cov_hat, long n,
                                   std::vector<std::string> labels = {});

    // Panel restricted to the given policy columns, in the given order.
    ScorePanel subset(const std::vector<int>& columns) const;
};

// Doubly-robust welfare scores, Hahn/Robins moment function:
//   psi_G(Z) = (m1 + D/pi (Y - m1)) 1{X in G} + (m0 + (1-D)/(1-pi) (Y - m0)) 1{X not in G}.
// Throws "propensity degenerate" when any pi(x) reaches 0 or 1.
ScorePanel dr_scores(const Sample& sample, const FirstStage& fs,
                     const std::vector<Policy>& policies);

// Gain panel: column j becomes psi_j - psi_baseline, with moments recomputed.
// The baseline column is kept (identically zero against itself).
ScorePanel welfare_gain_scores(const ScorePanel& panel, int baseline);

// Regression-adjusted plug-in: sum over cells of m_hat(d_G(x), x) * freq(x).
double estimate_welfare_cellwise(const Sample& sample, const FirstStage& fs,
                                 const Policy& policy);

struct PanelOptions {
    bool smoothing = true;
    std::optional<double> known_pi;
    int crossfit_folds = 0;  // 0 = off; K >= 2 fits fold-excluded first stages
};

// fit_first_stage + dr_scores in one step, with optional K-fold cross-fitting
// (fold of row i is i % K; each row is scored with the first stage fit on the
// other folds).
ScorePanel build_panel(const Sample& sample, int col, const std::vector<Policy>& policies,
                       const PanelOptions& opts = {});

}  // namespace wlcb

#endif
