#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "inference/lcb.hpp"
#include "math/rng.hpp"
#include "math/stats.hpp"
#include "oracles.hpp"

using namespace wlcb;

namespace {

constexpr double kZ95 = 1.6448536269514722;

ScorePanel random_panel(Rng& rng, int J, long n = 2500) {
    const Eigen::MatrixXd cov = oracles::random_pd(rng, J);
    Eigen::VectorXd w(J);
    for (int j = 0; j < J; ++j) w[j] = rng.normal();
    return ScorePanel::from_moments(w, cov, n);
}

LcbConfig quick_cfg(std::uint64_t seed, long n_sim = 20000) {
    LcbConfig cfg;
    cfg.seed = seed;
    cfg.n_sim = n_sim;
    return cfg;
}

}  // namespace

TEST_CASE("normal quantile: reference values") {
    CHECK(normal_quantile(0.95) == doctest::Approx(1.6448536269514722).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    CHECK(normal_cdf(normal_quantile(0.31)) == doctest::Approx(0.31).epsilon(1e-12));
}

TEST_CASE("naive lcb: zero noise returns the point estimate") {
    for (const double alpha : {0.5, 0.05, 0.001}) {
        CHECK(naive_lcb(1.0, 0.0, 50, alpha).value == doctest::Approx(1.0));
    }
}

TEST_CASE("naive lcb: normal-quantile oracle") {
    const LcbResult res = naive_lcb(0.0, 1.0, 100, 0.05);
    CHECK(std::abs(res.value - (-0.16449)) < 1e-4);
    CHECK(res.crit == doctest::Approx(kZ95).epsilon(1e-12));
}

TEST_CASE("naive lcb: published ATE row") {
    // point estimate 1289.66 with standard error 347.82 at the 95% level
    const long n = 9223;
    const double se = 347.82;
    const LcbResult res = naive_lcb(1289.66, se * std::sqrt(static_cast<double>(n)), n, 0.05);
    CHECK(std::abs(res.value - 717.52) < 0.05);
}

TEST_CASE("lf_crit_max: single moment converges to the normal quantile") {
    Eigen::MatrixXd cov(1, 1);
    cov << 4.0;
    const double crit = lf_crit_max(cov, 0.05, 100000, 7);
    CHECK(std::abs(crit - kZ95) < 0.01);
}

TEST_CASE("lf_crit_max: perfectly correlated moments collapse to one") {
    Eigen::MatrixXd cov1(1, 1);
    cov1 << 1.0;
    Eigen::MatrixXd cov2(2, 2);
    cov2 << 1.0, 1.0, 1.0, 1.0;
    const double c1 = lf_crit_max(cov1, 0.05, 100000, 3);
    const double c2 = lf_crit_max(cov2, 0.05, 100000, 3);
    CHECK(c2 == doctest::Approx(c1).epsilon(1e-9));
}

TEST_CASE("lf_crit_max: two independent moments match the analytic max distribution") {
    // quantile of max of two iid N(0,1): Phi^{-1}(sqrt(0.95))
    const double analytic = normal_quantile(std::sqrt(0.95));
    CHECK(analytic == doctest::Approx(1.9545).epsilon(1e-4));
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
    const double crit = lf_crit_max(cov, 0.05, 100000, 12);
    CHECK(std::abs(crit - analytic) < 0.01);
}

TEST_CASE("lf_crit_max: zero-variance moment rejected") {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
    cov(1, 1) = 0.0;
    CHECK_THROWS_WITH_AS(lf_crit_max(cov, 0.05, 5000, 1), "degenerate moment",
                         std::invalid_argument);
}

TEST_CASE("gms_crit: full selection equals the least-favorable quantile") {
    Rng rng(2);
    const ScorePanel panel = random_panel(rng, 4);
    const LcbConfig cfg = quick_cfg(31);
    const double gms = gms_crit(panel, {0, 1, 2, 3}, cfg);
    const double lf = lf_crit_max(panel.cov_hat, cfg.alpha, cfg.n_sim, cfg.seed);
    CHECK(gms == doctest::Approx(lf).epsilon(1e-12));
}

TEST_CASE("gms_crit: empty selection is zero, singleton is the normal quantile") {
    Rng rng(4);
    const ScorePanel panel = random_panel(rng, 3);
    LcbConfig cfg = quick_cfg(5, 100000);
    CHECK(gms_crit(panel, {}, cfg) == 0.0);
    CHECK(std::abs(gms_crit(panel, {1}, cfg) - kZ95) < 0.01);
}

TEST_CASE("max_lf_lcb: singleton equals the naive band up to simulation error") {
    Eigen::VectorXd w(1);
    w << 2.5;
    Eigen::MatrixXd cov(1, 1);
    cov << 9.0;
    const long n = 400;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    const LcbResult lf = max_lf_lcb(panel, quick_cfg(8, 100000));
    const LcbResult naive = naive_lcb(2.5, 3.0, n, 0.05);
    CHECK(std::abs(lf.value - naive.value) <= 0.01 * 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(lf.argmax_policy == 0);
}

TEST_CASE("max_lf_lcb: duplicated policy column changes nothing") {
    Eigen::VectorXd w1(1), w2(2);
    w1 << 1.0;
    w2 << 1.0, 1.0;
    Eigen::MatrixXd cov1(1, 1), cov2(2, 2);
    cov1 << 2.0;
    cov2 << 2.0, 2.0, 2.0, 2.0;
    const LcbResult a = max_lf_lcb(ScorePanel::from_moments(w1, cov1, 900), quick_cfg(6));
    const LcbResult b = max_lf_lcb(ScorePanel::from_moments(w2, cov2, 900), quick_cfg(6));
    CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
    CHECK(b.argmax_policy == 0);  // ties to the lowest index
}

TEST_CASE("max_gms_lcb: weak moment is deselected, strong singleton remains") {
    const long n = 400;
    Eigen::VectorXd w(2);
    w << 1.0, 0.0;
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    LcbConfig cfg = quick_cfg(17, 100000);

    const LcbResult res = max_gms_lcb(panel, cfg);
    REQUIRE(res.selected == std::vector<int>{0});
    CHECK_FALSE(res.gms_fallback);

    // Hand enumeration of the two steps of the inversion.
    const double root_n = std::sqrt(static_cast<double>(n));
    const double kappa = cfg.kappa_for(n);
    const double t1 = w[0] + kappa / root_n;
    const double t2 = w[1] + kappa / root_n;
    const double c1 = gms_crit(panel, {0}, cfg);
    const double theta1 = std::max(w[0] - c1 / root_n, w[1] - c1 / root_n);
    REQUIRE(t1 >= theta1);
    REQUIRE(theta1 > t2);  // step 1 qualifies
    const double c2 = gms_crit(panel, {0, 1}, cfg);
    CHECK(w[0] - c2 / root_n > t2);  // step 2 does not (theta2 > t2 fails t2 >= theta2)
    CHECK(res.value == doctest::Approx(theta1).epsilon(1e-12));
    CHECK(res.crit == doctest::Approx(c1).epsilon(1e-12));

    // and it matches the singleton GMS band of the strong policy up to the
    // independent quantile simulation error of the second call
    const LcbResult singleton = max_gms_lcb(panel.subset({0}), cfg);
    CHECK(std::abs(res.value - singleton.value) <= 0.01 / root_n);
}

TEST_CASE("max_gms_lcb: no qualifying step falls back to the LF band with a flag") {
    // With alpha > 1/2 the singleton critical value is negative, so the
    // candidate band sits above its own selection threshold once kappa is
    // pinned below |c|; the inversion then has no qualifying step.
    Eigen::VectorXd w(1);
    w << 1.0;
    Eigen::MatrixXd cov(1, 1);
    cov << 1.0;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, 400);
    LcbConfig cfg = quick_cfg(23, 50000);
    cfg.alpha = 0.95;
    cfg.kappa = 0.5;
    const LcbResult gms = max_gms_lcb(panel, cfg);
    CHECK(gms.gms_fallback);
    const LcbResult lf = max_lf_lcb(panel, cfg);
    CHECK(gms.value == doctest::Approx(lf.value).epsilon(1e-12));
    CHECK(gms.crit == doctest::Approx(lf.crit).epsilon(1e-12));
}

TEST_CASE("max_gms_lcb: J=1 equals the naive band up to simulation error") {
    Eigen::VectorXd w(1);
    w << -0.4;
    Eigen::MatrixXd cov(1, 1);
    cov << 0.25;
    const long n = 2500;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    const LcbResult gms = max_gms_lcb(panel, quick_cfg(9, 100000));
    const LcbResult naive = naive_lcb(-0.4, 0.5, n, 0.05);
    CHECK(std::abs(gms.value - naive.value) <= 0.01 * 0.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("dominance ordering: GMS is never below LF, its critical value never above") {
    Rng rng(2718);
    for (int rep = 0; rep < 40; ++rep) {
        const int J = 1 + static_cast<int>(rng.next_u64() % 8);
        const ScorePanel panel = random_panel(rng, J);
        const LcbConfig cfg = quick_cfg(1000 + rep, 5000);
        const LcbResult lf = max_lf_lcb(panel, cfg);
        const LcbResult gms = max_gms_lcb(panel, cfg);
        CHECK(gms.value >= lf.value);
        CHECK(gms.crit <= lf.crit);
    }
}

TEST_CASE("qlr_stat: all moments slack gives zero") {
    Rng rng(12);
    const ScorePanel panel = random_panel(rng, 3);
    const double theta = panel.w_hat.maxCoeff();
    CHECK(qlr_stat(panel, theta) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
    CHECK(qlr_stat(panel, theta + 0.5) == 0.0);
}

TEST_CASE("qlr_stat: scalar projection formula") {
    Eigen::VectorXd w(1);
    w << 0.8;
    Eigen::MatrixXd cov(1, 1);
    cov << 2.5;
    const long n = 625;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    for (const double theta : {0.0, 0.5, 0.79, 0.81, 2.0}) {
        const double expected =
            n * std::pow(std::max(0.8 - theta, 0.0), 2) / 2.5;
        CHECK(qlr_stat(panel, theta, /*ridge=*/0.0) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("qlr_stat: refined-grid oracle on random J=4 instances") {
    Rng rng(123);
    for (int rep = 0; rep < 3; ++rep) {
        const ScorePanel panel = random_panel(rng, 4, 1600);
        const double theta = panel.w_hat.mean() - 0.2;
        const double stat = qlr_stat(panel, theta, 0.0);
        const Eigen::VectorXd x =
            std::sqrt(1600.0) * (panel.w_hat.array() - theta).matrix();
        const double oracle = oracles::qp_refined_grid_objective(x, panel.cov_hat);
        CHECK(std::abs(stat - oracle) <= 1e-6 * (1.0 + std::abs(oracle)));
    }
}

TEST_CASE("qlr_stat: monotone in theta") {
    Rng rng(55);
    for (int rep = 0; rep < 10; ++rep) {
        const ScorePanel panel = random_panel(rng, 4);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = -6; k <= 6; ++k) {
            const double stat = qlr_stat(panel, 0.3 * k);
            CHECK(stat <= prev + 1e-9);
            prev = stat;
        }
    }
}

TEST_CASE("qlr_lf_crit: half-normal-squared quantile at J=1") {
    Eigen::VectorXd w(1);
    w << 0.0;
    Eigen::MatrixXd cov(1, 1);
    cov << 3.0;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, 800);
    const double crit = qlr_lf_crit(panel, quick_cfg(21, 100000));
    CHECK(std::abs(crit - kZ95 * kZ95) < 0.02 * kZ95 * kZ95);
}

TEST_CASE("qlr_lf_crit: identity covariance matches direct simulation") {
    Eigen::VectorXd w(2);
    w << 0.0, 0.0;
    const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
    const ScorePanel panel = ScorePanel::from_moments(w, cov, 500);
    const double crit = qlr_lf_crit(panel, quick_cfg(33, 100000));
    // direct 10^6-draw oracle for the 95% quantile of sum_j max(Z_j, 0)^2
    Rng rng(99991);
    std::vector<double> stats(1000000);
    for (auto& s : stats) {
        const double a = std::max(rng.normal(), 0.0);
        const double b = std::max(rng.normal(), 0.0);
        s = a * a + b * b;
    }
    const double oracle = upper_quantile(stats, 0.05);
    CHECK(std::abs(crit - oracle) < 0.02 * oracle);
}

TEST_CASE("qlr_lf_crit: alpha near one drives the critical value to zero") {
    Eigen::VectorXd w(1);
    w << 0.0;
    Eigen::MatrixXd cov(1, 1);
    cov << 1.0;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, 100);
    LcbConfig cfg = quick_cfg(40, 10000);
    cfg.alpha = 0.999;
    CHECK(qlr_lf_crit(panel, cfg) == doctest::Approx(0.0).scale(1).epsilon(1e-12));
}

TEST_CASE("qlr_lcb: singleton equals the naive band up to simulation error") {
    Eigen::VectorXd w(1);
    w << 1.2;
    Eigen::MatrixXd cov(1, 1);
    cov << 4.0;
    const long n = 900;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    const LcbResult qlr = qlr_lcb(panel, quick_cfg(3, 100000));
    const LcbResult naive = naive_lcb(1.2, 2.0, n, 0.05);
    CHECK(std::abs(qlr.value - naive.value) <= 0.02 * 2.0 / std::sqrt(static_cast<double>(n)));
    CHECK(qlr.lambda[0] == doctest::Approx(1.0));
}

TEST_CASE("qlr_lcb: duplicated moments collapse to the singleton answer") {
    Eigen::VectorXd w1(1), w2(2);
    w1 << 0.7;
    w2 << 0.7, 0.7;
    Eigen::MatrixXd cov1(1, 1), cov2(2, 2);
    cov1 << 1.5;
    cov2 << 1.5, 1.5, 1.5, 1.5;
    const long n = 1600;
    const LcbResult a = qlr_lcb(ScorePanel::from_moments(w1, cov1, n), quick_cfg(44, 50000));
    const LcbResult b = qlr_lcb(ScorePanel::from_moments(w2, cov2, n), quick_cfg(44, 50000));
    const double sigma = std::sqrt(1.5);
    CHECK(std::abs(a.value - b.value) <= 1e-3 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("qlr_lcb: simplex-grid oracle on random J=3 panels") {
    Rng rng(314);
    for (int rep = 0; rep < 3; ++rep) {
        const long n = 2500;
        const ScorePanel panel = random_panel(rng, 3, n);
        LcbConfig cfg = quick_cfg(500 + rep, 20000);
        const LcbResult res = qlr_lcb(panel, cfg);
        const Eigen::MatrixXd ridged = detail::ridged_cov(panel, cfg.ridge);
        const double c = std::sqrt(qlr_lf_crit(panel, cfg));
        const double grid = oracles::simplex_grid_max_lcb(panel.w_hat, ridged, c,
                                                          static_cast<double>(n), 1e-3);
        const double tol = 1e-4 * panel.sigma_hat.maxCoeff() / std::sqrt(static_cast<double>(n));
        CHECK(std::abs(res.value - grid) <= tol);
        CHECK(res.lambda.minCoeff() >= 0.0);
        CHECK(res.lambda.sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("singleton collapse: all four methods agree for J=1") {
    Eigen::VectorXd w(1);
    w << -2.2;
    Eigen::MatrixXd cov(1, 1);
    cov << 6.25;
    const long n = 3600;
    const ScorePanel panel = ScorePanel::from_moments(w, cov, n);
    const LcbConfig cfg = quick_cfg(61, 100000);
    const double sigma = 2.5;
    const double tol = 0.02 * sigma / std::sqrt(static_cast<double>(n));
    const double naive = compute_lcb(panel, LcbMethod::Naive, cfg).value;
    for (const LcbMethod m : {LcbMethod::MaxLF, LcbMethod::MaxGMS, LcbMethod::QlrMix}) {
        CHECK(std::abs(compute_lcb(panel, m, cfg).value - naive) <= tol);
    }
}

TEST_CASE("translation and scale equivariance across methods") {
    Rng rng(1618);
    Eigen::MatrixXd scores(600, 3);
    for (long i = 0; i < scores.rows(); ++i) {
        for (int j = 0; j < 3; ++j) scores(i, j) = rng.normal() * (j + 1) + 0.1 * j;
    }
    const ScorePanel base = ScorePanel::from_scores(scores);
    const double shift = 3.75;
    const double scale = 2.5;
    const ScorePanel shifted = ScorePanel::from_scores(scores.array() + shift);
    const ScorePanel scaled = ScorePanel::from_scores(scores * scale);
    const LcbConfig cfg = quick_cfg(50, 20000);
    for (const LcbMethod m :
         {LcbMethod::Naive, LcbMethod::MaxLF, LcbMethod::MaxGMS, LcbMethod::QlrMix}) {
        const double v = compute_lcb(base, m, cfg).value;
        const double vs = compute_lcb(shifted, m, cfg).value;
        const double vm = compute_lcb(scaled, m, cfg).value;
        CHECK(vs - v == doctest::Approx(shift).epsilon(1e-7));
        CHECK(vm == doctest::Approx(scale * v).epsilon(1e-7));
    }
}

TEST_CASE("multiplier bootstrap path: close to the Gaussian path on Gaussian scores") {
    Rng rng(808);
    Eigen::MatrixXd scores(4000, 2);
    for (long i = 0; i < scores.rows(); ++i) {
        const double common = rng.normal();
        scores(i, 0) = common + 0.5 * rng.normal();
        scores(i, 1) = 0.7 * common + rng.normal();
    }
    const ScorePanel panel = ScorePanel::from_scores(scores);
    LcbConfig gauss = quick_cfg(5, 4000);
    LcbConfig boot = gauss;
    boot.multiplier_bootstrap = true;
    const double c_gauss = max_lf_lcb(panel, gauss).crit;
    const double c_boot = max_lf_lcb(panel, boot).crit;
    CHECK(std::abs(c_boot - c_gauss) < 0.1 * c_gauss);

    // moment-only panels cannot back the bootstrap
    const ScorePanel synthetic = ScorePanel::from_moments(panel.w_hat, panel.cov_hat, panel.n);
    CHECK_THROWS_AS(max_lf_lcb(synthetic, boot), std::invalid_argument);
}

TEST_CASE("critical values are deterministic in the seed") {
    Rng rng(5150);
    const ScorePanel panel = random_panel(rng, 5);
    const LcbConfig cfg = quick_cfg(777, 5000);
    const LcbResult a = max_gms_lcb(panel, cfg);
    const LcbResult b = max_gms_lcb(panel, cfg);
    CHECK(a.value == b.value);
    CHECK(a.crit == b.crit);
    const LcbResult q1 = qlr_lcb(panel, cfg);
    const LcbResult q2 = qlr_lcb(panel, cfg);
    CHECK(q1.value == q2.value);
    LcbConfig other = cfg;
    other.seed = 778;
    CHECK(max_gms_lcb(panel, other).crit != a.crit);
}

TEST_CASE("parallel execution is bit-identical to serial") {
    Rng rng(2501);
    const ScorePanel panel = random_panel(rng, 5);
    const LcbConfig cfg = quick_cfg(91, 20000);
    setenv("WELFARE_LCB_THREADS", "1", 1);
    const double crit_serial = qlr_lf_crit(panel, cfg);
    const LcbResult gms_serial = max_gms_lcb(panel, cfg);
    setenv("WELFARE_LCB_THREADS", "7", 1);
    const double crit_parallel = qlr_lf_crit(panel, cfg);
    const LcbResult gms_parallel = max_gms_lcb(panel, cfg);
    unsetenv("WELFARE_LCB_THREADS");
    CHECK(crit_serial == crit_parallel);
    CHECK(gms_serial.value == gms_parallel.value);
    CHECK(gms_serial.crit == gms_parallel.crit);
}

TEST_CASE("config validation names the broken bound") {
    LcbConfig cfg;
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.alpha = 0.05;
    cfg.n_sim = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
