#include "core/policy.hpp"

#include <stdexcept>

namespace wlcb {

Policy Policy::treat_all(std::string label) {
    Policy p;
    p.kind_ = Kind::TreatAll;
    p.label_ = std::move(label);
    return p;
}

Policy Policy::treat_none(std::string label) {
    Policy p;
    p.kind_ = Kind::TreatNone;
    p.label_ = std::move(label);
    return p;
}

Policy Policy::cutoff_le(int col, double cutoff, std::string label) {
    Policy p;
    p.kind_ = Kind::CutoffLE;
    p.col_ = col;
    p.cutoff_ = cutoff;
    p.label_ = label.empty() ? "x" + std::to_string(col) + "<=" + std::to_string(cutoff)
                             : std::move(label);
    return p;
}

Policy Policy::cell_set(int col, std::vector<double> cells, std::string label) {
    Policy p;
    p.kind_ = Kind::CellSet;
    p.col_ = col;
    std::sort(cells.begin(), cells.end());
    p.cells_ = std::move(cells);
    p.label_ = label.empty() ? "cells(x" + std::to_string(col) + ")" : std::move(label);
    return p;
}

Policy Policy::predicate(PredicateFn fn, std::string label) {
    Policy p;
    p.kind_ = Kind::Predicate;
    p.pred_ = std::move(fn);
    p.label_ = std::move(label);
    return p;
}

bool Policy::contains(const Eigen::RowVectorXd& row) const {
    switch (kind_) {
        case Kind::TreatAll:
            return true;
        case Kind::TreatNone:
            return false;
        case Kind::CutoffLE:
            if (col_ < 0 || col_ >= row.size()) {
                throw std::invalid_argument("policy: column index out of range");
            }
            return row[col_] <= cutoff_;
        case Kind::CellSet:
            if (col_ < 0 || col_ >= row.size()) {
                throw std::invalid_argument("policy: column index out of range");
            }
            return std::binary_search(cells_.begin(), cells_.end(), row[col_]);
        case Kind::Predicate:
            return pred_(row);
    }
    return false;
}

Eigen::VectorXd Policy::indicators(const Sample& sample) const {
    Eigen::VectorXd out(sample.n());
    for (long i = 0; i < sample.n(); ++i) {
        out[i] = contains(sample.covariates.row(i)) ? 1.0 : 0.0;
    }
    return out;
}

}  // namespace wlcb
