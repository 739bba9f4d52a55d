#include "qp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wlcb::qp {

namespace {

using CacheMap = std::unordered_map<std::uint64_t, Eigen::LLT<Eigen::MatrixXd>>;

void check_problem(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) {
    const auto J = x.size();
    if (J < 1) throw std::invalid_argument("qp: empty problem");
    if (sigma.rows() != J || sigma.cols() != J) {
        throw std::invalid_argument("qp: sigma shape mismatch");
    }
    for (Eigen::Index j = 0; j < J; ++j) {
        if (!(sigma(j, j) > 0.0)) throw std::invalid_argument("qp: sigma diagonal not positive");
    }
}

// Assembles the solution from the dual vector. For active coordinates t = 0
// exactly; inactive coordinates get t = x - (S u)/2 with small positive
// slack (at most the optimality tolerance) clipped to zero.
QpSolution finish(const Eigen::VectorXd& x, const Eigen::MatrixXd& S, const Eigen::VectorXd& u,
                  int iterations) {
    QpSolution sol;
    sol.dual_u = u.cwiseMax(0.0);
    const Eigen::VectorXd su = S * sol.dual_u;
    sol.t_star = x - su / 2.0;
    double active_dot = 0.0;
    double resid = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (sol.dual_u[j] > 0.0) {
            active_dot += sol.dual_u[j] * x[j];
            resid = std::max(resid, std::abs(sol.t_star[j]));
            sol.t_star[j] = 0.0;
        } else if (sol.t_star[j] > 0.0) {
            resid = std::max(resid, sol.t_star[j]);
            sol.t_star[j] = 0.0;
        }
    }
    sol.objective = std::max(active_dot / 2.0, 0.0);
    sol.iterations = iterations;
    sol.kkt_residual = resid;
    return sol;
}

QpSolution solve_active_set(const Eigen::VectorXd& x, const Eigen::MatrixXd& S, double tol,
                            int max_iter, CacheMap* cache) {
    const auto J = x.size();
    const double wtol = tol * (1.0 + x.norm());
    std::vector<Eigen::Index> active;
    std::vector<bool> in_active(static_cast<std::size_t>(J), false);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(J);
    Eigen::VectorXd su = Eigen::VectorXd::Zero(J);
    int iterations = 0;

    const auto solve_subsystem = [&](Eigen::VectorXd& z) {
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd rhs(m);
        for (Eigen::Index a = 0; a < m; ++a) rhs[a] = 2.0 * x[active[static_cast<std::size_t>(a)]];
        const bool use_cache = cache != nullptr && J <= 63;
        std::uint64_t key = 0;
        if (use_cache) {
            for (const auto j : active) key |= (1ULL << j);
        }
        Eigen::LLT<Eigen::MatrixXd>* llt = nullptr;
        Eigen::LLT<Eigen::MatrixXd> local;
        if (use_cache) {
            auto it = cache->find(key);
            if (it == cache->end()) {
                Eigen::MatrixXd sub(m, m);
                for (Eigen::Index a = 0; a < m; ++a) {
                    for (Eigen::Index b = 0; b < m; ++b) {
                        sub(a, b) = S(active[static_cast<std::size_t>(a)],
                                      active[static_cast<std::size_t>(b)]);
                    }
                }
                it = cache->emplace(key, Eigen::LLT<Eigen::MatrixXd>(sub)).first;
            }
            llt = &it->second;
        } else {
            Eigen::MatrixXd sub(m, m);
            for (Eigen::Index a = 0; a < m; ++a) {
                for (Eigen::Index b = 0; b < m; ++b) {
                    sub(a, b) = S(active[static_cast<std::size_t>(a)],
                                  active[static_cast<std::size_t>(b)]);
                }
            }
            local.compute(sub);
            llt = &local;
        }
        if (llt->info() != Eigen::Success) {
            throw std::runtime_error("qp: active-set subsystem not positive definite");
        }
        z = llt->solve(rhs);
    };

    const auto refresh_su = [&]() { su.noalias() = S * u; };

    while (true) {
        // Most violated inactive coordinate of the dual gradient.
        Eigen::Index enter = -1;
        double wmax = wtol;
        for (Eigen::Index j = 0; j < J; ++j) {
            if (in_active[static_cast<std::size_t>(j)]) continue;
            const double w = x[j] - su[j] / 2.0;
            if (w > wmax) {
                wmax = w;
                enter = j;
            }
        }
        if (enter < 0) break;
        // active stays sorted so the subsystem (and its cache key) is canonical
        active.insert(std::lower_bound(active.begin(), active.end(), enter), enter);
        in_active[static_cast<std::size_t>(enter)] = true;

        while (true) {
            if (++iterations > max_iter) {
                const QpSolution partial = finish(x, S, u, iterations);
                throw std::runtime_error("qp: no convergence after " +
                                         std::to_string(iterations) +
                                         " iterations, KKT residual " +
                                         std::to_string(partial.kkt_residual));
            }
            Eigen::VectorXd z;
            solve_subsystem(z);
            bool feasible = true;
            double alpha = 1.0;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (z[static_cast<Eigen::Index>(a)] <= 0.0) {
                    feasible = false;
                    const double uj = u[active[a]];
                    const double denom = uj - z[static_cast<Eigen::Index>(a)];
                    if (denom > 0.0) alpha = std::min(alpha, uj / denom);
                }
            }
            if (feasible) {
                u.setZero();
                for (std::size_t a = 0; a < active.size(); ++a) {
                    u[active[a]] = z[static_cast<Eigen::Index>(a)];
                }
                refresh_su();
                break;
            }
            for (std::size_t a = 0; a < active.size(); ++a) {
                u[active[a]] += alpha * (z[static_cast<Eigen::Index>(a)] - u[active[a]]);
            }
            // Drop coordinates forced to the boundary. The blocking coordinate
            // lands at zero up to roundoff after the step above.
            const double drop_eps = 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff());
            std::vector<Eigen::Index> kept;
            for (std::size_t a = 0; a < active.size(); ++a) {
                if (z[static_cast<Eigen::Index>(a)] <= 0.0 && u[active[a]] <= drop_eps) {
                    u[active[a]] = 0.0;
                    in_active[static_cast<std::size_t>(active[a])] = false;
                } else {
                    kept.push_back(active[a]);
                }
            }
            if (kept.size() == active.size()) {
                // Numerical stall: drop the smallest coordinate to make progress.
                std::size_t drop = 0;
                for (std::size_t a = 1; a < active.size(); ++a) {
                    if (u[active[a]] < u[active[drop]]) drop = a;
                }
                u[active[drop]] = 0.0;
                in_active[static_cast<std::size_t>(active[drop])] = false;
                kept.clear();
                for (std::size_t a = 0; a < active.size(); ++a) {
                    if (a != drop) kept.push_back(active[a]);
                }
            }
            active = std::move(kept);
            refresh_su();
            if (active.empty()) break;
        }
    }
    return finish(x, S, u, iterations);
}

QpSolution solve_coordinate_descent(const Eigen::VectorXd& x, const Eigen::MatrixXd& S,
                                    double tol, int max_iter) {
    const auto J = x.size();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(J);
    Eigen::VectorXd su = Eigen::VectorXd::Zero(J);
    const double ctol = tol * (1.0 + x.norm());
    int iterations = 0;
    while (iterations < max_iter) {
        double delta = 0.0;
        for (Eigen::Index j = 0; j < J; ++j) {
            const double g = x[j] - su[j] / 2.0;
            const double unew = std::max(0.0, u[j] + 2.0 * g / S(j, j));
            const double d = unew - u[j];
            if (d != 0.0) {
                su += S.col(j) * d;
                u[j] = unew;
                delta = std::max(delta, std::abs(d) * std::sqrt(S(j, j)));
            }
        }
        ++iterations;
        if (delta <= ctol) return finish(x, S, u, iterations);
    }
    const QpSolution partial = finish(x, S, u, iterations);
    throw std::runtime_error("qp: no convergence after " + std::to_string(iterations) +
                             " iterations, KKT residual " +
                             std::to_string(partial.kkt_residual));
}

int default_max_iter(Eigen::Index J, int requested) {
    if (requested > 0) return requested;
    return static_cast<int>(10 * J * J + 1000);
}

}  // namespace

QpSolution project_nonpositive(const QpProblem& p) {
    check_problem(p.x, p.sigma);
    const int max_iter = default_max_iter(p.x.size(), p.max_iter);
    if (p.x.size() > 50) return solve_coordinate_descent(p.x, p.sigma, p.tol, max_iter);
    CacheMap cache;
    return solve_active_set(p.x, p.sigma, p.tol, max_iter, &cache);
}

RatioMax dual_ratio_max(const Eigen::VectorXd& T, const Eigen::MatrixXd& sigma) {
    QpProblem problem;
    problem.x = T;
    problem.sigma = sigma;
    const QpSolution sol = project_nonpositive(problem);
    RatioMax out;
    out.value = std::sqrt(sol.objective);
    const double total = sol.dual_u.sum();
    if (total > 0.0) {
        out.lambda = sol.dual_u / total;
    } else {
        out.lambda = Eigen::VectorXd::Zero(T.size());
        out.lambda[0] = 1.0;
        out.degenerate = true;
    }
    return out;
}

BatchProjector::BatchProjector(Eigen::MatrixXd sigma, double tol)
    : sigma_(std::move(sigma)), tol_(tol), cache_enabled_(sigma_.rows() <= 63) {
    check_problem(Eigen::VectorXd::Zero(sigma_.rows()), sigma_);
}

double BatchProjector::objective(const Eigen::VectorXd& x) { return solve(x).objective; }

QpSolution BatchProjector::solve(const Eigen::VectorXd& x) {
    const int max_iter = default_max_iter(x.size(), 0);
    if (x.size() > 50) return solve_coordinate_descent(x, sigma_, tol_, max_iter);
    return solve_active_set(x, sigma_, tol_, max_iter, cache_enabled_ ? &cache_ : nullptr);
}

}  // namespace wlcb::qp
