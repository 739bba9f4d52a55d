#include "core/scores.hpp"

#include <cmath>
#include <stdexcept>

namespace wlcb {

namespace {

void finish_moments(ScorePanel& panel) {
    const long N = panel.scores.rows();
    const int J = static_cast<int>(panel.scores.cols());
    panel.w_hat = panel.scores.colwise().mean();
    Eigen::MatrixXd centered = panel.scores.rowwise() - panel.w_hat.transpose();
    panel.cov_hat = (centered.transpose() * centered) / static_cast<double>(N);
    panel.cov_hat = ((panel.cov_hat + panel.cov_hat.transpose()) / 2.0).eval();
    panel.sigma_hat.resize(J);
    for (int j = 0; j < J; ++j) {
        panel.sigma_hat[j] = std::sqrt(std::max(panel.cov_hat(j, j), 0.0));
        panel.cov_hat(j, j) = panel.sigma_hat[j] * panel.sigma_hat[j];
    }
}

}  // namespace

ScorePanel ScorePanel::from_scores(Eigen::MatrixXd scores, std::vector<std::string> labels) {
    if (scores.rows() < 1 || scores.cols() < 1) {
        throw std::invalid_argument("score panel: empty score matrix");
    }
    ScorePanel panel;
    panel.n = scores.rows();
    panel.scores = std::move(scores);
    panel.labels = std::move(labels);
    if (panel.labels.empty()) {
        for (int j = 0; j < panel.scores.cols(); ++j) {
            panel.labels.push_back("policy" + std::to_string(j));
        }
    }
    finish_moments(panel);
    return panel;
}

ScorePanel ScorePanel::from_moments(Eigen::VectorXd w_hat, Eigen::MatrixXd cov_hat, long n,
                                    std::vector<std::string> labels) {
    const int J = static_cast<int>(w_hat.size());
    if (J < 1 || cov_hat.rows() != J || cov_hat.cols() != J || n < 1) {
        throw std::invalid_argument("score panel: inconsistent moment shapes");
    }
    ScorePanel panel;
    panel.n = n;
    panel.w_hat = std::move(w_hat);
    panel.cov_hat = ((cov_hat + cov_hat.transpose()) / 2.0).eval();
    panel.sigma_hat.resize(J);
    for (int j = 0; j < J; ++j) {
        panel.sigma_hat[j] = std::sqrt(std::max(panel.cov_hat(j, j), 0.0));
    }
    panel.labels = std::move(labels);
    if (panel.labels.empty()) {
        for (int j = 0; j < J; ++j) panel.labels.push_back("policy" + std::to_string(j));
    }
    return panel;
}

ScorePanel ScorePanel::subset(const std::vector<int>& columns) const {
    if (columns.empty()) throw std::invalid_argument("score panel: empty column subset");
    const int J = cols();
    ScorePanel out;
    out.n = n;
    const int M = static_cast<int>(columns.size());
    out.w_hat.resize(M);
    out.sigma_hat.resize(M);
    out.cov_hat.resize(M, M);
    if (scores.size() > 0) out.scores.resize(scores.rows(), M);
    for (int a = 0; a < M; ++a) {
        const int ja = columns[static_cast<std::size_t>(a)];
        if (ja < 0 || ja >= J) throw std::invalid_argument("score panel: column out of range");
        out.w_hat[a] = w_hat[ja];
        out.sigma_hat[a] = sigma_hat[ja];
        out.labels.push_back(labels[static_cast<std::size_t>(ja)]);
        if (scores.size() > 0) out.scores.col(a) = scores.col(ja);
        for (int b = 0; b < M; ++b) {
            out.cov_hat(a, b) = cov_hat(ja, columns[static_cast<std::size_t>(b)]);
        }
    }
    return out;
}

ScorePanel dr_scores(const Sample& sample, const FirstStage& fs,
                     const std::vector<Policy>& policies) {
    sample.validate();
    if (policies.empty()) throw std::invalid_argument("dr_scores: need at least one policy");
    const long N = sample.n();
    const int J = static_cast<int>(policies.size());

    // Per-row treated/untreated score arms; the policy only switches between them.
    Eigen::VectorXd arm1(N), arm0(N);
    for (long i = 0; i < N; ++i) {
        const double x = sample.covariates(i, fs.col);
        const double pi = fs.pi(x);
        if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("propensity degenerate");
        const double d = static_cast<double>(sample.treat[i]);
        const double y = sample.outcome[i];
        const double m1 = fs.m(1, x);
        const double m0 = fs.m(0, x);
        arm1[i] = m1 + d / pi * (y - m1);
        arm0[i] = m0 + (1.0 - d) / (1.0 - pi) * (y - m0);
    }

    Eigen::MatrixXd scores(N, J);
    std::vector<std::string> labels;
    for (int j = 0; j < J; ++j) {
        const Eigen::VectorXd in_g = policies[static_cast<std::size_t>(j)].indicators(sample);
        scores.col(j) = in_g.cwiseProduct(arm1) + (1.0 - in_g.array()).matrix().cwiseProduct(arm0);
        labels.push_back(policies[static_cast<std::size_t>(j)].label());
    }
    return ScorePanel::from_scores(std::move(scores), std::move(labels));
}

ScorePanel welfare_gain_scores(const ScorePanel& panel, int baseline) {
    if (baseline < 0 || baseline >= panel.cols()) {
        throw std::invalid_argument("welfare_gain_scores: baseline index out of range");
    }
    if (panel.scores.size() == 0) {
        throw std::invalid_argument("welfare_gain_scores: panel carries no score rows");
    }
    Eigen::MatrixXd gains = panel.scores.colwise() - panel.scores.col(baseline);
    return ScorePanel::from_scores(std::move(gains), panel.labels);
}

double estimate_welfare_cellwise(const Sample& sample, const FirstStage& fs,
                                 const Policy& policy) {
    sample.require_discrete(fs.col);
    double total = 0.0;
    for (long i = 0; i < sample.n(); ++i) {
        const double x = sample.covariates(i, fs.col);
        const int d = policy.contains(sample.covariates.row(i)) ? 1 : 0;
        total += fs.m(d, x);
    }
    return total / static_cast<double>(sample.n());
}

ScorePanel build_panel(const Sample& sample, int col, const std::vector<Policy>& policies,
                       const PanelOptions& opts) {
    if (opts.crossfit_folds == 0) {
        return dr_scores(sample, fit_first_stage(sample, col, opts.smoothing, opts.known_pi),
                         policies);
    }
    const int K = opts.crossfit_folds;
    if (K < 2) throw std::invalid_argument("cross-fitting needs at least 2 folds");
    const long N = sample.n();
    Eigen::MatrixXd scores(N, static_cast<int>(policies.size()));
    for (int fold = 0; fold < K; ++fold) {
        const FirstStage fs =
            fit_first_stage_excluding_fold(sample, col, opts.smoothing, opts.known_pi, K, fold);
        const ScorePanel part = dr_scores(sample, fs, policies);
        for (long i = fold; i < N; i += K) scores.row(i) = part.scores.row(i);
    }
    std::vector<std::string> labels;
    for (const auto& p : policies) labels.push_back(p.label());
    return ScorePanel::from_scores(std::move(scores), std::move(labels));
}

}  // namespace wlcb
