#ifndef WLCB_MATH_STATS_HPP
#define WLCB_MATH_STATS_HPP

#include <vector>

namespace wlcb {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse standard normal CDF (Acklam's rational approximation refined with
// one Halley step); accurate to ~1e-15 for p in (0, 1). Throws
// std::invalid_argument outside (0, 1).
double normal_quantile(double p);

// Empirical (1 - alpha)-quantile as the order statistic at
// ceil((1 - alpha) * n), 1-based. The vector is reordered in place.
double upper_quantile(std::vector<double>& draws, double alpha);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
};

MeanSe mean_and_se(const std::vector<double>& values);

}  // namespace wlcb

#endif
