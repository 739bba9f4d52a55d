#include "dgp/dgp.hpp"

#include <cmath>
#include <stdexcept>

#include "math/rng.hpp"
#include "math/stats.hpp"

namespace wlcb::dgp {

namespace {

void check_range(double v, double lo, double hi, const char* name) {
    if (!(v > lo && v < hi)) {
        throw std::invalid_argument(std::string(name) + " must lie in (" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + ")");
    }
}

double draw_outcome(Rng& rng, OutcomeFamily family, double mu, double sigma) {
    if (family == OutcomeFamily::TwoPoint) return rng.two_point(mu, sigma);
    return mu + sigma * rng.normal();
}

}  // namespace

DominanceDgp DominanceDgp::welfare(double p, double pi1, double pi0, double eps) {
    DominanceDgp d;
    d.p = p;
    d.pi1 = pi1;
    d.pi0 = pi0;
    d.eps = eps;
    d.variant = DominanceVariant::Welfare;
    d.variances = {1.0, 1.0, 10.0, 10.0};
    d.validate();
    return d;
}

DominanceDgp DominanceDgp::gain(double p, double pi1, double pi0, double eps) {
    DominanceDgp d;
    d.p = p;
    d.pi1 = pi1;
    d.pi0 = pi0;
    d.eps = eps;
    d.variant = DominanceVariant::Gain;
    d.variances = {1.0, 10.0, 1.0, 10.0};
    d.validate();
    return d;
}

double DominanceDgp::mean(int d, int x) const {
    // Both variants share the means: the off-diagonal cells sit at 1/2, the
    // (1,1) and (0,0) cells at 1/2 - eps.
    return d == x ? 0.5 - eps : 0.5;
}

double DominanceDgp::var(int d, int x) const {
    if (d == 1) return x == 1 ? variances[0] : variances[1];
    return x == 1 ? variances[2] : variances[3];
}

void DominanceDgp::validate() const {
    check_range(p, 0.25, 0.75, "p");
    check_range(pi1, 0.25, 0.75, "pi1");
    check_range(pi0, 0.25, 0.75, "pi0");
    if (!(eps >= 0.0 && eps < 0.5)) {
        throw std::invalid_argument("eps must lie in [0, 1/2)");
    }
    for (const double v : variances) {
        if (!(v >= 0.0)) throw std::invalid_argument("cell variances must be nonnegative");
    }
}

Sample sample_dominance(const DominanceDgp& dgp, long n, std::uint64_t seed) {
    dgp.validate();
    if (n < 1) throw std::invalid_argument("n must be positive");
    Sample s;
    s.treat.resize(n);
    s.outcome.resize(n);
    s.covariates.resize(n, 1);
    s.kinds = {ColumnKind::Discrete};
    Rng rng(seed);
    for (long i = 0; i < n; ++i) {
        const int x = rng.bernoulli(dgp.p) ? 1 : 0;
        const int d = rng.bernoulli(dgp.pi_of(x)) ? 1 : 0;
        s.covariates(i, 0) = static_cast<double>(x);
        s.treat[i] = d;
        s.outcome[i] = draw_outcome(rng, dgp.family, dgp.mean(d, x), std::sqrt(dgp.var(d, x)));
    }
    return s;
}

double dominance_welfare(const DominanceDgp& dgp, bool treat_x1, bool treat_x0) {
    const double m1 = dgp.mean(treat_x1 ? 1 : 0, 1);
    const double m0 = dgp.mean(treat_x0 ? 1 : 0, 0);
    return dgp.p * m1 + (1.0 - dgp.p) * m0;
}

double dominance_sigma2(const DominanceDgp& dgp, bool treat_x1, bool treat_x0) {
    // Var(m(d_G(X), X)) + E[ sigma^2(1,X)/pi 1{treated} + sigma^2(0,X)/(1-pi) 1{untreated} ].
    const double w = dominance_welfare(dgp, treat_x1, treat_x0);
    const double m1 = dgp.mean(treat_x1 ? 1 : 0, 1);
    const double m0 = dgp.mean(treat_x0 ? 1 : 0, 0);
    const double var_mean = dgp.p * m1 * m1 + (1.0 - dgp.p) * m0 * m0 - w * w;
    const auto cell_noise = [&](int x, bool treated) {
        const double pi = dgp.pi_of(x);
        return treated ? dgp.var(1, x) / pi : dgp.var(0, x) / (1.0 - pi);
    };
    return var_mean + dgp.p * cell_noise(1, treat_x1) + (1.0 - dgp.p) * cell_noise(0, treat_x0);
}

namespace {

// Gain-score moments for a single-cell policy {x}: the gain score is
// tau(x) + noise on {X = x} and zero elsewhere.
double gain_welfare(const DominanceDgp& dgp, int x) {
    const double px = x == 1 ? dgp.p : 1.0 - dgp.p;
    const double tau = dgp.mean(1, x) - dgp.mean(0, x);
    return px * tau;
}

double gain_sigma2(const DominanceDgp& dgp, int x) {
    const double px = x == 1 ? dgp.p : 1.0 - dgp.p;
    const double tau = dgp.mean(1, x) - dgp.mean(0, x);
    const double pi = dgp.pi_of(x);
    const double second = px * (tau * tau + dgp.var(1, x) / pi + dgp.var(0, x) / (1.0 - pi));
    return second - px * tau * px * tau;
}

}  // namespace

PopulationMoments closed_form_moments(const DominanceDgp& dgp, long n, double alpha) {
    dgp.validate();
    if (n < 1) throw std::invalid_argument("n must be positive");
    PopulationMoments pm;
    if (dgp.variant == DominanceVariant::Welfare) {
        pm.w_gstar = dominance_welfare(dgp, false, true);   // G* = {0}
        pm.w_g = dominance_welfare(dgp, true, true);        // treat everyone
        pm.sigma2_gstar = dominance_sigma2(dgp, false, true);
        pm.sigma2_g = dominance_sigma2(dgp, true, true);
    } else {
        pm.w_gstar = gain_welfare(dgp, 0);
        pm.w_g = gain_welfare(dgp, 1);
        pm.sigma2_gstar = gain_sigma2(dgp, 0);
        pm.sigma2_g = gain_sigma2(dgp, 1);
    }
    const double z = normal_quantile(1.0 - alpha);
    pm.delta_gap = z / std::sqrt(static_cast<double>(n)) *
                       (std::sqrt(pm.sigma2_gstar) - std::sqrt(pm.sigma2_g)) -
                   (pm.w_gstar - pm.w_g);
    return pm;
}

double MarginDgp::m0(double x) const {
    const double a = x - eps;
    const double mag = std::pow(std::abs(a), nu);
    return -(a >= 0.0 ? mag : -mag) * M / 5.0;
}

void MarginDgp::validate() const {
    if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
    check_range(eps, 0.0, 0.5, "eps");
    if (!(nu > 0.0)) throw std::invalid_argument("nu must be positive");
}

Sample sample_margin(const MarginDgp& dgp, long n, std::uint64_t seed) {
    dgp.validate();
    if (n < 1) throw std::invalid_argument("n must be positive");
    Sample s;
    s.treat.resize(n);
    s.outcome.resize(n);
    s.covariates.resize(n, 1);
    s.kinds = {ColumnKind::Continuous};
    Rng rng(seed);
    const double s1 = dgp.M / std::sqrt(10.0);
    const double s0 = dgp.M / std::sqrt(5.0);
    for (long i = 0; i < n; ++i) {
        const double x = rng.uniform();
        const int d = rng.bernoulli(0.5) ? 1 : 0;
        s.covariates(i, 0) = x;
        s.treat[i] = d;
        const double mu = d == 1 ? 0.0 : dgp.m0(x);
        s.outcome[i] = rng.two_point(mu, d == 1 ? s1 : s0);
    }
    return s;
}

PopulationMoments margin_moments(const MarginDgp& dgp, long n, double alpha) {
    dgp.validate();
    if (n < 1) throw std::invalid_argument("n must be positive");
    const double M2 = dgp.M * dgp.M;
    const double nu = dgp.nu;
    const double eps = dgp.eps;

    PopulationMoments pm;
    // W_{G*} = int_0^eps (eps - x)^nu M/5 dx; treat-everyone welfare is 0.
    pm.w_gstar = dgp.M * std::pow(eps, nu + 1.0) / (5.0 * (nu + 1.0));
    pm.w_g = 0.0;
    pm.sigma2_g = M2 / 5.0;
    // Three-term decomposition of sigma^2_{G*} - sigma^2_G:
    //   T1 = eps M^2/5 from the noise-term swap on [0, eps),
    //   T2 = E[m0^2 1{X < eps}] = eps^{2nu+1}/(2nu+1) M^2/25,
    //   T3 = -(W_{G*}^2 - W_G^2) = -W_{G*}^2.
    const double t1 = eps * M2 / 5.0;
    const double t2 = std::pow(eps, 2.0 * nu + 1.0) / (2.0 * nu + 1.0) * M2 / 25.0;
    const double t3 = -pm.w_gstar * pm.w_gstar;
    pm.sigma2_gstar = pm.sigma2_g + t1 + t2 + t3;

    const double z = normal_quantile(1.0 - alpha);
    pm.delta_gap = z / std::sqrt(static_cast<double>(n)) *
                       (std::sqrt(pm.sigma2_gstar) - std::sqrt(pm.sigma2_g)) -
                   (pm.w_gstar - pm.w_g);
    return pm;
}

}  // namespace wlcb::dgp
