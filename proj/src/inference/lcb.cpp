#include "inference/lcb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "math/parallel.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"
#include "qp/qp.hpp"

namespace wlcb {

double LcbConfig::kappa_for(long n) const {
    if (kappa) {
        if (*kappa < 0.0) throw std::invalid_argument("lcb config: kappa must be nonnegative");
        return *kappa;
    }
    return std::sqrt(std::log(static_cast<double>(std::max(n, 2L))));
}

void LcbConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("lcb config: alpha must lie in (0, 1)");
    }
    if (n_sim < 1000) throw std::invalid_argument("lcb config: n_sim must be at least 1000");
    if (ridge < 0.0) throw std::invalid_argument("lcb config: ridge must be nonnegative");
    if (kappa && *kappa < 0.0) {
        throw std::invalid_argument("lcb config: kappa must be nonnegative");
    }
}

const char* method_name(LcbMethod m) {
    switch (m) {
        case LcbMethod::Naive: return "naive";
        case LcbMethod::MaxLF: return "max-lf";
        case LcbMethod::MaxGMS: return "max-gms";
        case LcbMethod::QlrMix: return "qlr-mix";
    }
    return "?";
}

namespace detail {

Eigen::MatrixXd mvn_factor(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success) throw std::runtime_error("mvn factor: eigensolve failed");
    // Descending eigenvalue order: the leading component consumes the first
    // standard-normal column, so duplicated or perfectly correlated moments
    // reproduce the lower-dimensional draws exactly.
    const Eigen::VectorXd vals = es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
    return vecs * vals.asDiagonal();
}

Eigen::MatrixXd std_normal_matrix(std::uint64_t seed, long n_sim, int J) {
    Eigen::MatrixXd z(n_sim, J);
    parallel_for(n_sim, [&](long r) {
        Rng rng(seed, static_cast<std::uint64_t>(r));
        for (int j = 0; j < J; ++j) z(r, j) = rng.normal();
    });
    return z;
}

Eigen::MatrixXd crit_draws(const ScorePanel& panel, const Eigen::MatrixXd& cov,
                           const LcbConfig& cfg) {
    const int J = static_cast<int>(cov.rows());
    if (!cfg.multiplier_bootstrap) {
        const Eigen::MatrixXd factor = mvn_factor(cov);
        Eigen::MatrixXd draws = std_normal_matrix(cfg.seed, cfg.n_sim, J);
        return draws * factor.transpose();
    }
    if (panel.scores.size() == 0) {
        throw std::invalid_argument("multiplier bootstrap requires a panel with score rows");
    }
    const long N = panel.scores.rows();
    const Eigen::MatrixXd centered = panel.scores.rowwise() - panel.w_hat.transpose();
    Eigen::MatrixXd draws(cfg.n_sim, J);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    parallel_for(cfg.n_sim, [&](long b) {
        Rng rng(cfg.seed, static_cast<std::uint64_t>(b));
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(J);
        for (long i = 0; i < N; ++i) acc += rng.normal() * centered.row(i);
        draws.row(b) = acc * scale;
    });
    return draws;
}

Eigen::MatrixXd ridged_cov(const ScorePanel& panel, double ridge) {
    const int J = panel.cols();
    const double trace = panel.cov_hat.trace();
    if (!(trace > 0.0)) throw std::invalid_argument("covariance degenerate");
    Eigen::MatrixXd out = panel.cov_hat;
    out.diagonal().array() += ridge * trace / static_cast<double>(J);
    return out;
}

namespace {

void require_positive_diagonal(const Eigen::MatrixXd& cov) {
    for (Eigen::Index j = 0; j < cov.rows(); ++j) {
        if (!(cov(j, j) > 0.0)) throw std::invalid_argument("degenerate moment");
    }
}

// n_sim x J matrix of xi_j / sigma_j draws shared by the LF and GMS
// quantiles; using one matrix per (panel, cfg) makes the subset ordering
// c^(1) <= ... <= c^(J) exact, not merely in probability.
Eigen::MatrixXd standardized_draws(const ScorePanel& panel, const LcbConfig& cfg) {
    require_positive_diagonal(panel.cov_hat);
    Eigen::MatrixXd draws = crit_draws(panel, panel.cov_hat, cfg);
    for (int j = 0; j < panel.cols(); ++j) draws.col(j) /= panel.sigma_hat[j];
    return draws;
}

double subset_max_quantile(const Eigen::MatrixXd& std_draws, const std::vector<int>& subset,
                           double alpha) {
    if (subset.empty()) return 0.0;
    std::vector<double> stats(static_cast<std::size_t>(std_draws.rows()));
    for (long r = 0; r < std_draws.rows(); ++r) {
        double m = -std::numeric_limits<double>::infinity();
        for (const int j : subset) m = std::max(m, std_draws(r, j));
        stats[static_cast<std::size_t>(r)] = m;
    }
    return upper_quantile(stats, alpha);
}

struct BestPolicy {
    double value;
    int index;
};

// max_G (W_G - c sigma_G / sqrt(N)), ties to the lowest index.
BestPolicy best_lcb_at(const ScorePanel& panel, double crit) {
    const double root_n = std::sqrt(static_cast<double>(panel.n));
    BestPolicy best{-std::numeric_limits<double>::infinity(), -1};
    for (int j = 0; j < panel.cols(); ++j) {
        const double v = panel.w_hat[j] - crit * panel.sigma_hat[j] / root_n;
        if (v > best.value) best = {v, j};
    }
    return best;
}

}  // namespace
}  // namespace detail

LcbResult naive_lcb(double w_hat, double sigma_hat, long n, double alpha) {
    if (sigma_hat < 0.0) throw std::invalid_argument("naive lcb: sigma_hat must be nonnegative");
    if (n < 1) throw std::invalid_argument("naive lcb: n must be positive");
    LcbResult res;
    res.method = LcbMethod::Naive;
    res.crit = normal_quantile(1.0 - alpha);
    res.value = w_hat - res.crit * sigma_hat / std::sqrt(static_cast<double>(n));
    res.argmax_policy = 0;
    return res;
}

double lf_crit_max(const Eigen::MatrixXd& cov_hat, double alpha, long n_sim, std::uint64_t seed) {
    detail::require_positive_diagonal(cov_hat);
    const int J = static_cast<int>(cov_hat.rows());
    LcbConfig cfg;
    cfg.alpha = alpha;
    cfg.n_sim = n_sim;
    cfg.seed = seed;
    cfg.validate();
    ScorePanel dummy;  // Gaussian path never touches the panel
    Eigen::MatrixXd draws = detail::crit_draws(dummy, cov_hat, cfg);
    for (int j = 0; j < J; ++j) draws.col(j) /= std::sqrt(cov_hat(j, j));
    std::vector<int> all(static_cast<std::size_t>(J));
    std::iota(all.begin(), all.end(), 0);
    return detail::subset_max_quantile(draws, all, alpha);
}

double gms_crit(const ScorePanel& panel, const std::vector<int>& selected, const LcbConfig& cfg) {
    cfg.validate();
    for (const int j : selected) {
        if (j < 0 || j >= panel.cols()) throw std::invalid_argument("gms: selected index out of range");
    }
    if (selected.empty()) return 0.0;
    const Eigen::MatrixXd draws = detail::standardized_draws(panel, cfg);
    return detail::subset_max_quantile(draws, selected, cfg.alpha);
}

LcbResult max_lf_lcb(const ScorePanel& panel, const LcbConfig& cfg) {
    cfg.validate();
    if (panel.cols() < 1) throw std::invalid_argument("max_lf_lcb: empty panel");
    const Eigen::MatrixXd draws = detail::standardized_draws(panel, cfg);
    std::vector<int> all(static_cast<std::size_t>(panel.cols()));
    std::iota(all.begin(), all.end(), 0);
    LcbResult res;
    res.method = LcbMethod::MaxLF;
    res.crit = detail::subset_max_quantile(draws, all, cfg.alpha);
    const auto best = detail::best_lcb_at(panel, res.crit);
    res.value = best.value;
    res.argmax_policy = best.index;
    res.selected = all;
    return res;
}

LcbResult max_gms_lcb(const ScorePanel& panel, const LcbConfig& cfg) {
    cfg.validate();
    const int J = panel.cols();
    if (J < 1) throw std::invalid_argument("max_gms_lcb: empty panel");
    const double root_n = std::sqrt(static_cast<double>(panel.n));
    const double kappa = cfg.kappa_for(panel.n);
    const Eigen::MatrixXd draws = detail::standardized_draws(panel, cfg);

    // Thresholds t^(1) >= ... >= t^(J), ties broken by policy index.
    std::vector<int> order(static_cast<std::size_t>(J));
    std::iota(order.begin(), order.end(), 0);
    Eigen::VectorXd t(J);
    for (int j = 0; j < J; ++j) t[j] = panel.w_hat[j] + kappa * panel.sigma_hat[j] / root_n;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return t[a] > t[b]; });

    LcbResult res;
    res.method = LcbMethod::MaxGMS;
    double best_theta = std::numeric_limits<double>::infinity();
    std::vector<int> subset;
    for (int step = 0; step < J; ++step) {
        subset.push_back(order[static_cast<std::size_t>(step)]);
        const double crit = detail::subset_max_quantile(draws, subset, cfg.alpha);
        const auto best = detail::best_lcb_at(panel, crit);
        const double upper = t[order[static_cast<std::size_t>(step)]];
        const double lower = step + 1 < J ? t[order[static_cast<std::size_t>(step + 1)]]
                                          : -std::numeric_limits<double>::infinity();
        if (upper >= best.value && best.value > lower && best.value < best_theta) {
            best_theta = best.value;
            res.value = best.value;
            res.crit = crit;
            res.argmax_policy = best.index;
            res.selected = subset;
        }
    }
    if (!std::isfinite(best_theta)) {
        // No qualifying step; conservative fall back to the LF band.
        std::vector<int> all(static_cast<std::size_t>(J));
        std::iota(all.begin(), all.end(), 0);
        const double crit = detail::subset_max_quantile(draws, all, cfg.alpha);
        const auto best = detail::best_lcb_at(panel, crit);
        res.value = best.value;
        res.crit = crit;
        res.argmax_policy = best.index;
        res.selected = all;
        res.gms_fallback = true;
    }
    std::sort(res.selected.begin(), res.selected.end());
    return res;
}

double qlr_stat(const ScorePanel& panel, double theta, double ridge) {
    const Eigen::MatrixXd sigma = detail::ridged_cov(panel, ridge);
    qp::QpProblem problem;
    problem.sigma = sigma;
    problem.x = std::sqrt(static_cast<double>(panel.n)) *
                (panel.w_hat.array() - theta).matrix();
    return qp::project_nonpositive(problem).objective;
}

double qlr_lf_crit(const ScorePanel& panel, const LcbConfig& cfg) {
    cfg.validate();
    const Eigen::MatrixXd sigma = detail::ridged_cov(panel, cfg.ridge);
    const Eigen::MatrixXd draws = detail::crit_draws(panel, sigma, cfg);
    std::vector<double> stats(static_cast<std::size_t>(cfg.n_sim));
    parallel_chunked(cfg.n_sim, [&](long begin, long end) {
        qp::BatchProjector projector(sigma);
        for (long r = begin; r < end; ++r) {
            stats[static_cast<std::size_t>(r)] = projector.objective(draws.row(r).transpose());
        }
    });
    return upper_quantile(stats, cfg.alpha);
}

LcbResult qlr_lcb(const ScorePanel& panel, const LcbConfig& cfg) {
    cfg.validate();
    const Eigen::MatrixXd sigma = detail::ridged_cov(panel, cfg.ridge);
    const double crit = qlr_lf_crit(panel, cfg);
    const double root_n = std::sqrt(static_cast<double>(panel.n));

    qp::BatchProjector projector(sigma);
    const auto stat_at = [&](double theta) {
        const Eigen::VectorXd x = root_n * (panel.w_hat.array() - theta).matrix();
        return projector.objective(x);
    };

    double hi = panel.w_hat.maxCoeff();  // statistic is 0 here
    const double spread = std::max(10.0 * panel.sigma_hat.maxCoeff() / root_n, 0.0);
    double lo = panel.w_hat.minCoeff() - spread;
    double width = std::max(hi - lo, 1e-8 * (1.0 + std::abs(hi)));
    int doublings = 0;
    while (stat_at(lo) <= crit) {
        if (++doublings > 60) {
            throw std::runtime_error("qlr lcb: bisection bracket has no crossing");
        }
        width *= 2.0;
        lo = hi - width;
    }

    const double tol = 1e-9 * (1.0 + std::abs(panel.w_hat.maxCoeff()));
    LcbResult res;
    res.method = LcbMethod::QlrMix;
    res.crit = crit;
    while (hi - lo > tol) {
        const double mid = 0.5 * (hi + lo);
        if (stat_at(mid) <= crit) {
            hi = mid;
        } else {
            lo = mid;
        }
        ++res.bisection_iterations;
    }
    res.value = hi;

    const Eigen::VectorXd x = root_n * (panel.w_hat.array() - res.value).matrix();
    const qp::QpSolution sol = projector.solve(x);
    const double total = sol.dual_u.sum();
    if (total > 0.0) {
        res.lambda = sol.dual_u / total;
    } else {
        res.lambda = Eigen::VectorXd::Zero(panel.cols());
        res.lambda[0] = 1.0;
        res.lambda_degenerate = true;
    }
    int argmax = 0;
    for (int j = 1; j < panel.cols(); ++j) {
        if (res.lambda[j] > res.lambda[argmax]) argmax = j;
    }
    res.argmax_policy = argmax;
    return res;
}

LcbResult compute_lcb(const ScorePanel& panel, LcbMethod method, const LcbConfig& cfg) {
    switch (method) {
        case LcbMethod::Naive: {
            int best = 0;
            for (int j = 1; j < panel.cols(); ++j) {
                if (panel.w_hat[j] > panel.w_hat[best]) best = j;
            }
            LcbResult res = naive_lcb(panel.w_hat[best], panel.sigma_hat[best], panel.n, cfg.alpha);
            res.argmax_policy = best;
            return res;
        }
        case LcbMethod::MaxLF: return max_lf_lcb(panel, cfg);
        case LcbMethod::MaxGMS: return max_gms_lcb(panel, cfg);
        case LcbMethod::QlrMix: return qlr_lcb(panel, cfg);
    }
    throw std::invalid_argument("unknown lcb method");
}

}  // namespace wlcb
