#include "core/sample.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace wlcb {

void Sample::validate() const {
    const long N = n();
    if (N < 1) throw std::invalid_argument("sample: need at least one row");
    if (outcome.size() != N || covariates.rows() != N) {
        throw std::invalid_argument("sample: treat/outcome/covariates lengths differ");
    }
    if (static_cast<int>(kinds.size()) != k()) {
        throw std::invalid_argument("sample: one column kind per covariate column required");
    }
    for (long i = 0; i < N; ++i) {
        if (treat[i] != 0 && treat[i] != 1) {
            throw std::invalid_argument("sample: treatment entries must be 0 or 1");
        }
        if (!std::isfinite(outcome[i])) {
            throw std::invalid_argument("sample: non-finite outcome");
        }
    }
    if (!covariates.allFinite()) {
        throw std::invalid_argument("sample: non-finite covariate");
    }
}

void Sample::require_column(int col) const {
    if (col < 0 || col >= k()) throw std::invalid_argument("sample: column index out of range");
}

void Sample::require_discrete(int col) const {
    require_column(col);
    if (kinds[static_cast<std::size_t>(col)] != ColumnKind::Discrete) {
        throw std::invalid_argument("discrete column required");
    }
}

CellCounts cell_counts(const Sample& sample, int col) {
    sample.require_discrete(col);
    CellCounts counts;
    for (long i = 0; i < sample.n(); ++i) {
        auto& cell = counts[sample.covariates(i, col)];
        ++cell[static_cast<std::size_t>(sample.treat[i])];
    }
    return counts;
}

Sample bin_covariate(const Sample& sample, int col, int n_bins) {
    sample.require_column(col);
    if (sample.kinds[static_cast<std::size_t>(col)] != ColumnKind::Continuous) {
        throw std::invalid_argument("bin_covariate: continuous column required");
    }
    if (n_bins < 2) throw std::invalid_argument("bin_covariate: n_bins must be at least 2");

    const long N = sample.n();
    std::vector<double> sorted(static_cast<std::size_t>(N));
    for (long i = 0; i < N; ++i) sorted[static_cast<std::size_t>(i)] = sample.covariates(i, col);
    std::sort(sorted.begin(), sorted.end());

    const long distinct =
        static_cast<long>(std::set<double>(sorted.begin(), sorted.end()).size());
    if (distinct < n_bins) {
        throw std::invalid_argument("bin_covariate: column has " + std::to_string(distinct) +
                                    " distinct value(s); at most " + std::to_string(distinct) +
                                    " bins achievable (requested " + std::to_string(n_bins) + ")");
    }

    // Bin edges at the j/n_bins empirical quantiles (order statistic at
    // ceil(j*N/n_bins)); duplicate edges from ties are dropped.
    std::vector<double> edges;
    for (int j = 1; j < n_bins; ++j) {
        long idx = (static_cast<long>(j) * N + n_bins - 1) / n_bins;  // ceil(j*N/B)
        idx = std::clamp(idx, 1L, N);
        const double e = sorted[static_cast<std::size_t>(idx - 1)];
        if (edges.empty() || e > edges.back()) edges.push_back(e);
    }

    Sample out = sample;
    for (long i = 0; i < N; ++i) {
        const double x = sample.covariates(i, col);
        const auto bin = std::lower_bound(edges.begin(), edges.end(), x) - edges.begin();
        out.covariates(i, col) = static_cast<double>(bin);
    }
    out.kinds[static_cast<std::size_t>(col)] = ColumnKind::Discrete;
    return out;
}

}  // namespace wlcb
