#ifndef WLCB_QP_QP_HPP
#define WLCB_QP_QP_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>

namespace wlcb::qp {

// min over t <= 0 of (x - t)' Sigma^{-1} (x - t), Sigma positive definite.
struct QpProblem {
    Eigen::VectorXd x;
    Eigen::MatrixXd sigma;
    double tol = 1e-10;
    int max_iter = 0;  // 0 => 10*J^2 + 1000
};

struct QpSolution {
    double objective = 0.0;       // nonnegative; zero iff x <= 0 entrywise
    Eigen::VectorXd t_star;       // entrywise <= 0
    Eigen::VectorXd dual_u;       // entrywise >= 0; t_star = x - Sigma * dual_u / 2
    int iterations = 0;
    double kkt_residual = 0.0;    // max stationarity violation, <= tol * (1 + ||x||)
};

// Dual nonnegative active-set iteration (NNLS-style) on u, where the dual of
// the projection is max_{u >= 0} x'u - u' Sigma u / 4. Falls back to cyclic
// coordinate descent for J > 50. Throws std::runtime_error when max_iter is
// exceeded, reporting the final KKT residual.
QpSolution project_nonpositive(const QpProblem& p);

struct RatioMax {
    double value = 0.0;           // max over the simplex of lambda'T / sqrt(lambda' Sigma lambda)_+
    Eigen::VectorXd lambda;       // attaining weights; first unit vector when degenerate
    bool degenerate = false;      // dual optimum was u = 0 (T <= 0 entrywise)
};

// Duality identity: the simplex ratio maximum equals the square root of the
// projection objective; lambda is recovered from the dual as u / (1'u).
RatioMax dual_ratio_max(const Eigen::VectorXd& T, const Eigen::MatrixXd& sigma);

// Repeated projections against a fixed Sigma, reusing Cholesky factors of the
// active-set submatrices across calls. Thread-safe only per instance.
class BatchProjector {
public:
    explicit BatchProjector(Eigen::MatrixXd sigma, double tol = 1e-10);

    // Objective only (the hot path inside critical-value simulation).
    double objective(const Eigen::VectorXd& x);

    // Full solve sharing the same cache.
    QpSolution solve(const Eigen::VectorXd& x);

private:
    Eigen::MatrixXd sigma_;
    double tol_;
    bool cache_enabled_;
    std::unordered_map<std::uint64_t, Eigen::LLT<Eigen::MatrixXd>> cache_;

    friend QpSolution project_nonpositive(const QpProblem& p);
};

}  // namespace wlcb::qp

#endif
