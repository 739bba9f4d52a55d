// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criterion 8 needs the external JTPA export and is skipped
// when the file is absent (WELFARE_LCB_JTPA_CSV or tests/data/jtpa.csv).
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "core/scores.hpp"
#include "dgp/dgp.hpp"
#include "dgp/experiments.hpp"
#include "inference/lcb.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"
#include "oracles.hpp"
#include "qp/qp.hpp"

using namespace wlcb;

namespace {

constexpr double kZ95 = 1.6448536269514722;

struct Outcome {
    bool pass = true;
    bool skipped = false;
    std::string detail;
};

double rand_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

// ---- criterion 1: closed forms and separated efficiency bounds ----
Outcome criterion1() {
    Outcome out;
    const auto d = dgp::DominanceDgp::welfare(0.5, 0.5, 0.5, 0.1);
    const auto pm = dgp::closed_form_moments(d, 10000, 0.05);
    const bool exact = pm.w_gstar == 0.5 && pm.w_g == 0.45 && pm.sigma2_g == 2.0025 &&
                       pm.sigma2_gstar == 11.0;
    bool bounds = true;
    Rng rng(101);
    for (int rep = 0; rep < 1000; ++rep) {
        const auto dd = dgp::DominanceDgp::welfare(
            rand_in(rng, 0.2501, 0.7499), rand_in(rng, 0.2501, 0.7499),
            rand_in(rng, 0.2501, 0.7499), rand_in(rng, 1e-9, 0.4999));
        const auto mm = dgp::closed_form_moments(dd, 1000, 0.05);
        bounds &= mm.sigma2_gstar - mm.sigma2_g > 8.0 * dd.p;
        bounds &= std::sqrt(mm.sigma2_gstar) - std::sqrt(mm.sigma2_g) > dd.p;
    }
    out.pass = exact && bounds;
    std::ostringstream ss;
    ss << "W*=" << pm.w_gstar << " W_X=" << pm.w_g << " s2_X=" << pm.sigma2_g
       << " s2*=" << pm.sigma2_gstar << "; 1000 random draws obey the 8p and p bounds: "
       << (bounds ? "yes" : "no");
    out.detail = ss.str();
    return out;
}

// ---- criterion 2: MSE dominance ----
Outcome criterion2() {
    Outcome out;
    const long n = 10000;
    const auto d = dgp::DominanceDgp::welfare(0.5, 0.5, 0.5, 1.0 / std::sqrt(n));
    const auto rep = dgp::mse_experiment(d, n, 2000, 20240101);
    const double joint_se =
        std::sqrt(rep.se_suboptimal * rep.se_suboptimal + rep.se_oracle * rep.se_oracle);
    const double gap = rep.mse_oracle - rep.mse_suboptimal;
    const double n_mse_oracle = rep.mse_oracle * static_cast<double>(n);
    const bool ordered = rep.mse_suboptimal < rep.mse_oracle && gap > 3.0 * joint_se;
    const bool scaled = std::abs(n_mse_oracle - 11.0) < 0.1 * 11.0;
    out.pass = ordered && scaled;
    std::ostringstream ss;
    ss << "MSE_X=" << rep.mse_suboptimal << " MSE_*=" << rep.mse_oracle << " gap/se="
       << gap / joint_se << "; N*MSE_*=" << n_mse_oracle << " (target 11 +/- 10%)";
    out.detail = ss.str();
    return out;
}

// ---- criterion 3: LCB gap sign at eps = z/sqrt(N) ----
Outcome criterion3() {
    Outcome out;
    std::ostringstream ss;
    for (const long n : {5000L, 10000L, 100000L}) {
        const double eps = kZ95 / std::sqrt(static_cast<double>(n));
        const auto d = dgp::DominanceDgp::welfare(0.5, 0.5, 0.5, eps);
        const auto pm = dgp::closed_form_moments(d, n, 0.05);
        const double bound = kZ95 * d.p / std::sqrt(static_cast<double>(n));
        out.pass &= pm.delta_gap > bound;
        ss << "N=" << n << ": gap=" << pm.delta_gap << " > " << bound << "; ";
    }
    out.detail = ss.str();
    return out;
}

// ---- criterion 4: margin-rate sweep ----
Outcome criterion4() {
    Outcome out;
    std::ostringstream ss;
    for (const double nu : {1.0, 2.0}) {
        const double delta = 1.0 / nu;
        std::vector<double> ns = {1e3, 1e4, 1e5, 1e6};
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        bool positive = true;
        for (const double n : ns) {
            dgp::MarginDgp d;
            d.M = 5.0;
            d.nu = nu;
            d.eps = std::pow(4.0 * kZ95 / 5.0 / std::sqrt(n), 1.0 / nu);
            const auto pm = dgp::margin_moments(d, static_cast<long>(n), 0.05);
            positive &= pm.delta_gap > 0.0;
            const double lx = std::log(n), ly = std::log(pm.delta_gap);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double slope = (4.0 * sxy - sx * sy) / (4.0 * sxx - sx * sx);
        const double target = -(1.0 + delta) / 2.0;
        out.pass &= positive && std::abs(slope - target) < 0.1;
        ss << "nu=" << nu << ": slope=" << slope << " (target " << target << "); ";
    }
    out.detail = ss.str();
    return out;
}

// ---- criterion 5: duality identity and enumeration oracle ----
Outcome criterion5() {
    Outcome out;
    Rng rng(555);
    double worst_dual = 0.0, worst_enum = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const int J = 1 + static_cast<int>(rng.next_u64() % 6);
        const Eigen::MatrixXd S = oracles::random_pd(rng, J);
        Eigen::VectorXd T(J);
        for (int j = 0; j < J; ++j) T[j] = 2.5 * rng.normal();
        qp::QpProblem problem;
        problem.x = T;
        problem.sigma = S;
        const double obj = qp::project_nonpositive(problem).objective;
        const auto ratio = qp::dual_ratio_max(T, S);
        worst_dual = std::max(worst_dual, std::abs(ratio.value * ratio.value - obj) /
                                              (1e-8 * (1.0 + T.squaredNorm())));
        const double oracle = oracles::qp_enumeration_objective(T, S);
        worst_enum = std::max(worst_enum, std::abs(obj - oracle));
    }
    out.pass = worst_dual <= 1.0 && worst_enum <= 1e-9;
    std::ostringstream ss;
    ss << "max |value^2-obj| / tol = " << worst_dual
       << "; max |obj - enumeration| = " << worst_enum;
    out.detail = ss.str();
    return out;
}

// ---- criterion 6: method collapse and ordering ----
Outcome criterion6() {
    Outcome out;
    Rng rng(606);
    bool ordered = true;
    for (int rep = 0; rep < 200; ++rep) {
        const int J = 1 + static_cast<int>(rng.next_u64() % 8);
        const Eigen::MatrixXd cov = oracles::random_pd(rng, J);
        Eigen::VectorXd w(J);
        for (int j = 0; j < J; ++j) w[j] = rng.normal();
        const ScorePanel panel =
            ScorePanel::from_moments(w, cov, 500 + static_cast<long>(rng.next_u64() % 5000));
        LcbConfig cfg;
        cfg.n_sim = 100000;
        cfg.seed = 7000 + static_cast<std::uint64_t>(rep);
        const LcbResult lf = max_lf_lcb(panel, cfg);
        const LcbResult gms = max_gms_lcb(panel, cfg);
        ordered &= gms.value >= lf.value && gms.crit <= lf.crit;
    }
    // singleton collapse at n_sim = 1e5
    Eigen::VectorXd w(1);
    w << 0.3;
    Eigen::MatrixXd cov(1, 1);
    cov << 2.25;
    const long n = 1600;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    LcbConfig cfg;
    cfg.n_sim = 100000;
    cfg.seed = 42;
    const double tol = 0.02 * 1.5 / std::sqrt(static_cast<double>(n));
    const double naive = compute_lcb(panel, LcbMethod::Naive, cfg).value;
    double worst = 0.0;
    for (const LcbMethod m : {LcbMethod::MaxLF, LcbMethod::MaxGMS, LcbMethod::QlrMix}) {
        worst = std::max(worst, std::abs(compute_lcb(panel, m, cfg).value - naive));
    }
    out.pass = ordered && worst <= tol;
    std::ostringstream ss;
    ss << "GMS >= LF on 200/200 panels: " << (ordered ? "yes" : "no")
       << "; singleton max deviation " << worst << " <= " << tol;
    out.detail = ss.str();
    return out;
}

// ---- criterion 7: coverage ----
Outcome criterion7() {
    Outcome out;
    const long n = 5000;
    const auto d = dgp::DominanceDgp::welfare(0.5, 0.5, 0.5, 1.0 / std::sqrt(n));
    const std::vector<Policy> policies = {Policy::treat_all(), Policy::treat_none(),
                                          Policy::cell_set(0, {0.0}, "{0}"),
                                          Policy::cell_set(0, {1.0}, "{1}")};
    LcbConfig cfg;
    cfg.alpha = 0.05;
    cfg.n_sim = 100000;
    cfg.seed = 777;
    const auto rep = dgp::coverage_experiment(
        d, n, policies, {LcbMethod::MaxLF, LcbMethod::MaxGMS, LcbMethod::QlrMix}, cfg, 1000, 99);
    std::ostringstream ss;
    for (const LcbMethod m : {LcbMethod::MaxLF, LcbMethod::MaxGMS, LcbMethod::QlrMix}) {
        const double c = rep.coverage.at(m);
        out.pass &= c >= 0.94;
        ss << method_name(m) << "=" << c << " ";
    }
    out.pass &= rep.gms_ge_lf_every_rep;
    ss << "(all >= 0.94, per-rep GMS>=LF: " << (rep.gms_ge_lf_every_rep ? "yes" : "no") << ")";
    out.detail = ss.str();
    return out;
}

// ---- criterion 8 (optional): JTPA table replication ----
std::string jtpa_path() {
    if (const char* env = std::getenv("WELFARE_LCB_JTPA_CSV")) return env;
    for (const char* candidate : {"tests/data/jtpa.csv", "../tests/data/jtpa.csv",
                                  "../../tests/data/jtpa.csv"}) {
        std::ifstream probe(candidate);
        if (probe) return candidate;
    }
    return "";
}

Outcome criterion8() {
    Outcome out;
    const std::string path = jtpa_path();
    if (path.empty()) {
        out.skipped = true;
        out.detail = "JTPA export not present (set WELFARE_LCB_JTPA_CSV); criteria 1-7 and 9 "
                     "constitute acceptance";
        return out;
    }
    // expected columns: y (30-month earnings), d (treatment), educ (years)
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ',')) header.push_back(item);
    }
    int yc = -1, dc = -1, ec = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "y") yc = static_cast<int>(i);
        if (header[i] == "d") dc = static_cast<int>(i);
        if (header[i] == "educ") ec = static_cast<int>(i);
    }
    if (yc < 0 || dc < 0 || ec < 0) {
        out.pass = false;
        out.detail = "JTPA file lacks y/d/educ columns";
        return out;
    }
    std::vector<int> treat;
    std::vector<double> y, educ;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string item;
        std::vector<std::string> fields;
        while (std::getline(ss, item, ',')) fields.push_back(item);
        treat.push_back(std::stoi(fields[static_cast<std::size_t>(dc)]));
        y.push_back(std::stod(fields[static_cast<std::size_t>(yc)]));
        educ.push_back(std::stod(fields[static_cast<std::size_t>(ec)]));
    }
    Sample s;
    const auto n = static_cast<long>(treat.size());
    s.treat.resize(n);
    s.outcome.resize(n);
    s.covariates.resize(n, 1);
    s.kinds = {ColumnKind::Discrete};
    for (long i = 0; i < n; ++i) {
        s.treat[i] = treat[static_cast<std::size_t>(i)];
        s.outcome[i] = y[static_cast<std::size_t>(i)];
        s.covariates(i, 0) = educ[static_cast<std::size_t>(i)];
    }

    const auto run_class = [&](const std::vector<double>& cutoffs) {
        std::vector<Policy> pols;
        for (const double c : cutoffs) pols.push_back(Policy::cutoff_le(0, c));
        pols.push_back(Policy::treat_none("baseline"));
        const FirstStage fs = fit_first_stage(s, 0, true);
        const ScorePanel level = dr_scores(s, fs, pols);
        const ScorePanel gain = welfare_gain_scores(level, static_cast<int>(cutoffs.size()));
        std::vector<int> keep(cutoffs.size());
        std::iota(keep.begin(), keep.end(), 0);
        return gain.subset(keep);
    };

    LcbConfig cfg;
    cfg.alpha = 0.05;
    cfg.n_sim = 100000;
    cfg.seed = 1;

    const ScorePanel small = run_class({11, 15, 18});
    const LcbResult lf_small = max_lf_lcb(small, cfg);
    const LcbResult gms_small = max_gms_lcb(small, cfg);
    const double best = small.w_hat.maxCoeff();

    std::vector<double> all_cutoffs;
    for (int c = 7; c <= 18; ++c) all_cutoffs.push_back(c);
    const ScorePanel wide = run_class(all_cutoffs);
    const LcbResult lf_wide = max_lf_lcb(wide, cfg);
    const LcbResult gms_wide = max_gms_lcb(wide, cfg);

    out.pass = std::abs(lf_small.value - 783.28) <= 2.0 &&
               std::abs(gms_small.value - 783.28) <= 2.0 &&
               std::abs(lf_wide.value - 649.53) <= 2.0 &&
               std::abs(gms_wide.value - 724.26) <= 2.0 && std::abs(best - 1440.25) <= 0.01;
    std::ostringstream ss;
    ss << "small class LF=" << lf_small.value << " GMS=" << gms_small.value
       << "; wide class LF=" << lf_wide.value << " GMS=" << gms_wide.value << "; best=" << best;
    out.detail = ss.str();
    return out;
}

// ---- criterion 9: QLR against the simplex-grid oracle ----
Outcome criterion9() {
    Outcome out;
    Rng rng(909);
    double worst_ratio = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::MatrixXd cov = oracles::random_pd(rng, 3);
        Eigen::VectorXd w(3);
        for (int j = 0; j < 3; ++j) w[j] = rng.normal();
        const long n = 400 + static_cast<long>(rng.next_u64() % 4000);
        const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
        LcbConfig cfg;
        cfg.n_sim = 100000;
        cfg.seed = 9000 + static_cast<std::uint64_t>(rep);
        const LcbResult res = qlr_lcb(panel, cfg);
        const Eigen::MatrixXd ridged = detail::ridged_cov(panel, cfg.ridge);
        const double c = std::sqrt(res.crit);
        const double grid = oracles::simplex_grid_max_lcb(panel.w_hat, ridged, c,
                                                          static_cast<double>(n), 1e-3);
        const double tol = 1e-4 * panel.sigma_hat.maxCoeff() / std::sqrt(static_cast<double>(n));
        worst_ratio = std::max(worst_ratio, std::abs(res.value - grid) / tol);
    }
    out.pass = worst_ratio <= 1.0;
    std::ostringstream ss;
    ss << "max |qlr_lcb - grid| / tol = " << worst_ratio << " over 100 panels";
    out.detail = ss.str();
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"1 (closed-form welfare/variance bounds)", criterion1},
        {"2 (MSE dominance of the suboptimal estimator)", criterion2},
        {"3 (positive LCB gap at the root-N scale)", criterion3},
        {"4 (margin-rate of the LCB gap)", criterion4},
        {"5 (projection duality and enumeration oracle)", criterion5},
        {"6 (method collapse and GMS/LF ordering)", criterion6},
        {"7 (Monte Carlo coverage of the three bands)", criterion7},
        {"8 (JTPA cutoff-class replication, optional)", criterion8},
        {"9 (QLR band against the simplex-grid oracle)", criterion9},
    };
    int failures = 0;
    for (const auto& [name, fn] : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = fn();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* verdict = out.skipped ? "SKIP" : (out.pass ? "PASS" : "FAIL");
        if (!out.skipped && !out.pass) ++failures;
        std::cout << verdict << " criterion " << name << " [" << secs << "s]: " << out.detail
                  << "\n";
    }
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "acceptance: all criteria passed\n";
    return 0;
}
