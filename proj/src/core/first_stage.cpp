#include "core/first_stage.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace wlcb {

namespace {

constexpr double kPiFloor = 0.01;
constexpr double kPiCeil = 0.99;

FirstStage fit_rows(const Sample& sample, int col, bool smoothing,
                    std::optional<double> known_pi,
                    const std::function<bool(long)>& include) {
    sample.require_discrete(col);
    if (known_pi && !(*known_pi > 0.0 && *known_pi < 1.0)) {
        throw std::invalid_argument("first stage: known propensity must lie in (0, 1)");
    }

    struct Acc {
        double sum1 = 0.0, sum0 = 0.0;
        long n1 = 0, n0 = 0;
    };
    std::map<double, Acc> acc;
    for (long i = 0; i < sample.n(); ++i) {
        if (!include(i)) continue;
        auto& a = acc[sample.covariates(i, col)];
        if (sample.treat[i] == 1) {
            a.sum1 += sample.outcome[i];
            ++a.n1;
        } else {
            a.sum0 += sample.outcome[i];
            ++a.n0;
        }
    }

    FirstStage fs;
    fs.col = col;
    fs.smoothing = smoothing;
    fs.known_pi = known_pi;
    const double s = smoothing ? 1.0 : 0.0;
    for (const auto& [value, a] : acc) {
        if (!smoothing && (a.n1 == 0 || a.n0 == 0)) {
            throw std::invalid_argument("empty cell");
        }
        FirstStage::Cell cell;
        cell.n1 = a.n1;
        cell.n0 = a.n0;
        cell.m1 = a.sum1 / (static_cast<double>(a.n1) + s);
        cell.m0 = a.sum0 / (static_cast<double>(a.n0) + s);
        if (known_pi) {
            cell.pi = *known_pi;
        } else if (a.n1 + a.n0 == 0) {
            cell.pi = 0.5;
            fs.clipped = true;
        } else {
            cell.pi = static_cast<double>(a.n1) / static_cast<double>(a.n1 + a.n0);
        }
        const double clipped_pi = std::clamp(cell.pi, kPiFloor, kPiCeil);
        if (clipped_pi != cell.pi) {
            cell.pi = clipped_pi;
            fs.clipped = true;
        }
        fs.cells.emplace(value, cell);
    }
    return fs;
}

}  // namespace

double FirstStage::m(int d, double cell_value) const {
    const auto it = cells.find(cell_value);
    if (it == cells.end()) {
        if (!smoothing) throw std::invalid_argument("empty cell");
        return 0.0;
    }
    return d == 1 ? it->second.m1 : it->second.m0;
}

double FirstStage::pi(double cell_value) const {
    const auto it = cells.find(cell_value);
    if (it == cells.end()) return known_pi ? *known_pi : 0.5;
    return it->second.pi;
}

FirstStage fit_first_stage(const Sample& sample, int col, bool smoothing,
                           std::optional<double> known_pi) {
    return fit_rows(sample, col, smoothing, known_pi, [](long) { return true; });
}

FirstStage fit_first_stage_excluding_fold(const Sample& sample, int col, bool smoothing,
                                          std::optional<double> known_pi, int folds, int fold) {
    if (folds < 2) throw std::invalid_argument("cross-fitting needs at least 2 folds");
    return fit_rows(sample, col, smoothing, known_pi,
                    [folds, fold](long i) { return i % folds != fold; });
}

}  // namespace wlcb
