// Test-only oracles, independent of the solver paths they check.
#ifndef WLCB_TESTS_ORACLES_HPP
#define WLCB_TESTS_ORACLES_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "math/rng.hpp"

namespace oracles {

// Exhaustive active-set enumeration for min_{t<=0} (x-t)' S^{-1} (x-t):
// for every sign pattern, solve the equality-constrained problem (t = 0 on
// the pattern, unconstrained off it), keep the best KKT-feasible candidate.
// O(2^J); intended for J <= ~12.
inline double qp_enumeration_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& S) {
    const int J = static_cast<int>(x.size());
    double best = std::numeric_limits<double>::infinity();
    for (unsigned mask = 0; mask < (1u << J); ++mask) {
        // mask bit j set => t_j pinned at 0 (active), else t_j free.
        std::vector<int> active;
        for (int j = 0; j < J; ++j) {
            if (mask & (1u << j)) active.push_back(j);
        }
        // Free coordinates take t_j = x_j - (S u / 2)_j with u supported on
        // the active set and S_AA u_A = 2 x_A.
        Eigen::VectorXd u = Eigen::VectorXd::Zero(J);
        if (!active.empty()) {
            const auto m = static_cast<Eigen::Index>(active.size());
            Eigen::MatrixXd sub(m, m);
            Eigen::VectorXd rhs(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                rhs[a] = 2.0 * x[active[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < m; ++b) {
                    sub(a, b) = S(active[static_cast<std::size_t>(a)],
                                  active[static_cast<std::size_t>(b)]);
                }
            }
            Eigen::VectorXd ua = sub.ldlt().solve(rhs);
            for (Eigen::Index a = 0; a < m; ++a) u[active[static_cast<std::size_t>(a)]] = ua[a];
        }
        const Eigen::VectorXd t = x - S * u / 2.0;
        // KKT feasibility: u >= 0 on the active set, t <= 0 off it.
        bool ok = true;
        for (int j = 0; j < J; ++j) {
            const bool is_active = (mask & (1u << j)) != 0;
            if (is_active && u[j] < -1e-9) ok = false;
            if (!is_active && t[j] > 1e-9) ok = false;
        }
        if (!ok) continue;
        Eigen::VectorXd tc = t;
        for (int j = 0; j < J; ++j) {
            if (mask & (1u << j)) tc[j] = 0.0;
            tc[j] = std::min(tc[j], 0.0);
        }
        const Eigen::VectorXd d = x - tc;
        const double obj = d.dot(S.ldlt().solve(d));
        best = std::min(best, std::max(obj, 0.0));
    }
    return best;
}

// Simplex-grid maximization of f(lambda) = lambda'w - c * sqrt(lambda' S lambda) / sqrt(n)
// with step h over the J=3 simplex. With c = 0 and sqrt-term weight 1 this
// doubles as the grid oracle for lambda'T / sqrt(lambda' S lambda).
inline double simplex_grid_max_lcb(const Eigen::VectorXd& w, const Eigen::MatrixXd& S, double c,
                                   double n, double step) {
    const int J = static_cast<int>(w.size());
    if (J != 3) throw std::invalid_argument("simplex grid oracle: J must be 3");
    const long K = std::lround(1.0 / step);
    const double root_n = std::sqrt(n);
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d lambda;
    for (long i = 0; i <= K; ++i) {
        for (long j = 0; j <= K - i; ++j) {
            lambda[0] = static_cast<double>(i) / static_cast<double>(K);
            lambda[1] = static_cast<double>(j) / static_cast<double>(K);
            lambda[2] = 1.0 - lambda[0] - lambda[1];
            const double quad = lambda.dot(S * lambda);
            const double value =
                lambda.dot(w) - c * std::sqrt(std::max(quad, 0.0)) / root_n;
            best = std::max(best, value);
        }
    }
    return best;
}

// Grid oracle for the ratio max_lambda lambda'T / sqrt(lambda' S lambda), J = 3.
inline double simplex_grid_ratio(const Eigen::VectorXd& T, const Eigen::MatrixXd& S,
                                 double step) {
    const long K = std::lround(1.0 / step);
    double best = -std::numeric_limits<double>::infinity();
    Eigen::Vector3d lambda;
    for (long i = 0; i <= K; ++i) {
        for (long j = 0; j <= K - i; ++j) {
            lambda[0] = static_cast<double>(i) / static_cast<double>(K);
            lambda[1] = static_cast<double>(j) / static_cast<double>(K);
            lambda[2] = 1.0 - lambda[0] - lambda[1];
            const double quad = lambda.dot(S * lambda);
            if (quad <= 0.0) continue;
            best = std::max(best, lambda.dot(T) / std::sqrt(quad));
        }
    }
    return best;
}

// Brute-force minimization of (x-t)' S^{-1} (x-t) over t <= 0 on a refined
// grid: repeated coarse grids shrinking around the incumbent. Independent of
// any KKT reasoning.
inline double qp_refined_grid_objective(const Eigen::VectorXd& x, const Eigen::MatrixXd& S,
                                        int points_per_dim = 13, int rounds = 6) {
    const int J = static_cast<int>(x.size());
    const Eigen::MatrixXd Sinv = S.ldlt().solve(Eigen::MatrixXd::Identity(J, J));
    const auto eval = [&](const Eigen::VectorXd& t) {
        const Eigen::VectorXd d = x - t;
        return d.dot(Sinv * d);
    };
    // Start box: [lo, 0] per coordinate, wide enough to contain the optimum.
    const double radius = 2.0 * (x.cwiseAbs().maxCoeff() + 1.0);
    Eigen::VectorXd center = x.cwiseMin(0.0);
    double half = radius;
    Eigen::VectorXd best_t = center;
    double best = eval(best_t);
    for (int round = 0; round < rounds; ++round) {
        const long total = static_cast<long>(std::pow(points_per_dim, J));
        for (long flat = 0; flat < total; ++flat) {
            long rem = flat;
            Eigen::VectorXd t(J);
            for (int j = 0; j < J; ++j) {
                const int q = static_cast<int>(rem % points_per_dim);
                rem /= points_per_dim;
                const double frac = points_per_dim == 1
                                        ? 0.0
                                        : -1.0 + 2.0 * q / static_cast<double>(points_per_dim - 1);
                t[j] = std::min(center[j] + frac * half, 0.0);
            }
            const double v = eval(t);
            if (v < best) {
                best = v;
                best_t = t;
            }
        }
        center = best_t;
        // Next box spans one grid spacing around the incumbent.
        half = 2.0 * half / static_cast<double>(points_per_dim - 1);
    }
    return best;
}

// Deterministic random PD matrix with bounded conditioning: A A' + shift I.
inline Eigen::MatrixXd random_pd(wlcb::Rng& rng, int J, double shift_scale = 0.3) {
    Eigen::MatrixXd A(J, J);
    for (int i = 0; i < J; ++i) {
        for (int j = 0; j < J; ++j) A(i, j) = rng.normal();
    }
    Eigen::MatrixXd S = A * A.transpose();
    const double shift = shift_scale * S.trace() / J + 1e-3;
    S.diagonal().array() += shift;
    return S;
}

}  // namespace oracles

#endif
