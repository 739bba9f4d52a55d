#ifndef WLCB_CORE_SAMPLE_HPP
#define WLCB_CORE_SAMPLE_HPP

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

namespace wlcb {

enum class ColumnKind { Discrete, Continuous };

// Observed records Z_i = (D_i, Y_i, X_i), i = 1..N. Immutable after
// construction; operations that transform a sample return a new one.
struct Sample {
    Eigen::VectorXi treat;       // binary treatment indicator
    Eigen::VectorXd outcome;     // realized outcome, in outcome units
    Eigen::MatrixXd covariates;  // N x k
    std::vector<ColumnKind> kinds;

    long n() const { return treat.size(); }
    int k() const { return static_cast<int>(covariates.cols()); }

    // Throws std::invalid_argument on shape mismatch, non-binary treatment,
    // or non-finite values.
    void validate() const;

    void require_discrete(int col) const;
    void require_column(int col) const;
};

// Per-(d, cell) observation counts N_dx for a discrete column, keyed by the
// cell value. counts[cell][d] is the number of rows with D = d in that cell.
using CellCounts = std::map<double, std::array<long, 2>>;

CellCounts cell_counts(const Sample& sample, int col);

// Replaces a continuous column by empirical-quantile bin ids 0..n_bins-1 and
// re-tags it discrete. Bin sizes differ by at most one unless ties at the
// quantile boundaries force larger bins. Throws when the column has fewer
// distinct values than requested bins, naming the achievable bin count.
Sample bin_covariate(const Sample& sample, int col, int n_bins);

}  // namespace wlcb

#endif
