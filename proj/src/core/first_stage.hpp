#ifndef WLCB_CORE_FIRST_STAGE_HPP
#define WLCB_CORE_FIRST_STAGE_HPP

#include <map>
#include <optional>

#include "core/sample.hpp"

namespace wlcb {

// Cell-mean regression functions and propensity scores over one discrete
// covariate column. With smoothing on, m(d,x) = sum(Y in cell)/(N_dx + 1);
// pi(x) = N_1x/(N_1x + N_0x) unless a known constant is supplied. Propensity
// estimates are clipped into [0.01, 0.99]; `clipped` records whether any
// clipping (or a degenerate-cell pi = 1/2 fallback) occurred.
struct FirstStage {
    struct Cell {
        double m1 = 0.0;
        double m0 = 0.0;
        double pi = 0.5;
        long n1 = 0;
        long n0 = 0;
    };

    int col = 0;
    bool smoothing = true;
    std::optional<double> known_pi;
    std::map<double, Cell> cells;
    bool clipped = false;

    // Cells never seen during fitting follow the degenerate-cell rule:
    // pi = 1/2 (or the known constant) and, when smoothing is on, m = 0.
    double m(int d, double cell_value) const;
    double pi(double cell_value) const;
};

FirstStage fit_first_stage(const Sample& sample, int col, bool smoothing,
                           std::optional<double> known_pi = std::nullopt);

// Fold-excluded variant: fits on all rows whose (0-based) index i satisfies
// i % folds != fold. Used by cross-fitting.
FirstStage fit_first_stage_excluding_fold(const Sample& sample, int col, bool smoothing,
                                          std::optional<double> known_pi, int folds, int fold);

}  // namespace wlcb

#endif
