#ifndef WLCB_CORE_POLICY_HPP
#define WLCB_CORE_POLICY_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "core/sample.hpp"

namespace wlcb {

// A deterministic treatment rule G: covariate row -> {treat, don't treat}.
class Policy {
public:
    enum class Kind { TreatAll, TreatNone, CutoffLE, CellSet, Predicate };
    using PredicateFn = std::function<bool(const Eigen::RowVectorXd&)>;

    static Policy treat_all(std::string label = "treat-all");
    static Policy treat_none(std::string label = "treat-none");
    // 1{ x[col] <= cutoff }
    static Policy cutoff_le(int col, double cutoff, std::string label = "");
    // 1{ x[col] in cells }, exact value match
    static Policy cell_set(int col, std::vector<double> cells, std::string label = "");
    static Policy predicate(PredicateFn fn, std::string label = "predicate");

    bool contains(const Eigen::RowVectorXd& row) const;

    // Treatment indicators over all rows of a sample.
    Eigen::VectorXd indicators(const Sample& sample) const;

    Kind kind() const { return kind_; }
    const std::string& label() const { return label_; }
    int column() const { return col_; }

private:
    Kind kind_ = Kind::TreatNone;
    int col_ = -1;
    double cutoff_ = 0.0;
    std::vector<double> cells_;  // sorted
    PredicateFn pred_;
    std::string label_;
};

}  // namespace wlcb

#endif
