#ifndef WLCB_DGP_DGP_HPP
#define WLCB_DGP_DGP_HPP

#include <array>
#include <cstdint>

#include "core/sample.hpp"

namespace wlcb::dgp {

enum class OutcomeFamily { TwoPoint, Gaussian };
enum class DominanceVariant { Welfare, Gain };

// Binary-covariate design with a nearly-tied optimal policy: X ~ Bern(p),
// D | X ~ Bern(pi(X)), Y | (D, X) drawn from the outcome family with cell
// means (1/2 or 1/2 - eps) and the variant's cell variances. The optimal
// policy is {X = 0}; the comparison policy is treat-everyone (welfare
// variant) or {X = 1} (gain variant).
struct DominanceDgp {
    double p = 0.5;
    double pi1 = 0.5;
    double pi0 = 0.5;
    double eps = 0.01;
    OutcomeFamily family = OutcomeFamily::TwoPoint;
    DominanceVariant variant = DominanceVariant::Welfare;
    // sigma^2(d, x) for cells (1,1), (1,0), (0,1), (0,0); overridable.
    std::array<double, 4> variances{1.0, 1.0, 10.0, 10.0};

    static DominanceDgp welfare(double p, double pi1, double pi0, double eps);
    static DominanceDgp gain(double p, double pi1, double pi0, double eps);

    double mean(int d, int x) const;
    double var(int d, int x) const;
    double pi_of(int x) const { return x == 1 ? pi1 : pi0; }

    // Throws std::invalid_argument naming the violated bound. eps = 0 is
    // allowed (the symmetric boundary case used in MSE checks).
    void validate() const;
};

Sample sample_dominance(const DominanceDgp& dgp, long n, std::uint64_t seed);

struct PopulationMoments {
    double w_gstar = 0.0;
    double w_g = 0.0;
    double sigma2_gstar = 0.0;
    double sigma2_g = 0.0;
    // z_{1-alpha}/sqrt(N) (sigma_gstar - sigma_g) - (w_gstar - w_g)
    double delta_gap = 0.0;
};

// Efficiency-bound welfares/variances in closed form. Welfare variant pairs
// the optimal policy {0} with treat-everyone; gain variant pairs the gain of
// {0} with the gain of {1}.
PopulationMoments closed_form_moments(const DominanceDgp& dgp, long n, double alpha);

// Population welfare/variance of an arbitrary cell policy under the
// dominance design (treat_x1 / treat_x0 say whether each cell is treated).
double dominance_welfare(const DominanceDgp& dgp, bool treat_x1, bool treat_x0);
double dominance_sigma2(const DominanceDgp& dgp, bool treat_x1, bool treat_x0);

// Margin-condition design: X ~ U[0,1], pi = 1/2, m(1,x) = 0 with variance
// M^2/10, m(0,x) = -(x - eps)^nu M/5 (signed power) with variance M^2/5.
// The optimal policy is [eps, 1]; the comparison policy treats everyone.
struct MarginDgp {
    double M = 5.0;
    double eps = 0.1;
    double nu = 1.0;  // margin exponent; delta = 1/nu

    double m0(double x) const;  // sgn-preserving power
    double tau(double x) const { return -m0(x); }

    void validate() const;
};

Sample sample_margin(const MarginDgp& dgp, long n, std::uint64_t seed);

// Exact welfare and variance gaps by direct integration of the design.
PopulationMoments margin_moments(const MarginDgp& dgp, long n, double alpha);

}  // namespace wlcb::dgp

#endif
