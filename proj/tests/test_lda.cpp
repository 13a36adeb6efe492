#include <doctest.h>

#include <cmath>
#include <vector>

#include "vmi/errors.hpp"
#include "vmi/lda.hpp"
#include "vmi/rng.hpp"

using namespace vmi;

TEST_CASE("fit_rlda matches the closed form on a symmetric layout") {
    // class 0 at mean (-1, 0), class 1 at (+1, 0); within-class points offset
    // by (+-sqrt(2), 0) and (0, +-sqrt(2)) plus the mean itself, so the pooled
    // within-class covariance (ddof = n - 2) is exactly identity
    const double r = std::sqrt(2.0);
    Eigen::MatrixXd x(10, 2);
    std::vector<int> y;
    int row = 0;
    for (int cls = 0; cls < 2; ++cls) {
        const double mx = cls == 0 ? -1.0 : 1.0;
        const double off[5][2] = {{0, 0}, {r, 0}, {-r, 0}, {0, r}, {0, -r}};
        for (auto& o : off) {
            x(row, 0) = mx + o[0];
            x(row, 1) = o[1];
            y.push_back(cls);
            ++row;
        }
    }

    const rlda_model m = fit_rlda(x, y, {shrinkage_mode::fixed, 0.0});
    CHECK(m.mean0(0) == doctest::Approx(-1.0));
    CHECK(m.mean1(0) == doctest::Approx(1.0));
    CHECK(m.pooled_cov(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.pooled_cov(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.pooled_cov(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    // w = S^{-1}(mu1-mu0) = (2, 0), b = 0 by symmetry
    CHECK(m.w(0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(m.w(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(m.b == doctest::Approx(0.0).epsilon(1e-12));

    // scores: midpoint 0, class means +-2
    CHECK(rlda_score(m, Eigen::Vector2d(0.0, 0.0)) == doctest::Approx(0.0));
    CHECK(rlda_score(m, Eigen::Vector2d(1.0, 0.0)) == doctest::Approx(2.0));
    CHECK(rlda_score(m, Eigen::Vector2d(-1.0, 0.0)) == doctest::Approx(-2.0));

    // full shrinkage keeps the direction here (cov already spherical)
    const rlda_model ms = fit_rlda(x, y, {shrinkage_mode::fixed, 1.0});
    CHECK(ms.gamma == 1.0);
    CHECK(ms.w(0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("shrinkage regularizes an ill-conditioned pooled covariance") {
    // 2 points per class in 3-d: pooled covariance is rank-deficient, so the
    // unshrunk solve must fail and any gamma > 0 must succeed
    Eigen::MatrixXd x(4, 3);
    x << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0;
    const std::vector<int> y{0, 0, 1, 1};

    try {
        fit_rlda(x, y, {shrinkage_mode::fixed, 0.0});
        FAIL("expected degenerate_covariance");
    } catch (const error& e) {
        CHECK(e.code() == error_code::degenerate_covariance);
    }
    const rlda_model m = fit_rlda(x, y, {shrinkage_mode::fixed, 0.5});
    CHECK(std::isfinite(m.w.norm()));
    CHECK(m.gamma == 0.5);

    // on this data every centered outer product is identical, so the analytic
    // intensity is honestly 0 and the singular solve still fails
    CHECK_THROWS_AS(fit_rlda(x, y, {shrinkage_mode::analytic, 0.0}), error);

    // with real scatter the analytic gamma lands in (0, 1] and the fit works
    rng g(4);
    Eigen::MatrixXd xs(12, 3);
    std::vector<int> ys;
    for (int i = 0; i < 12; ++i) {
        for (int j = 0; j < 3; ++j) xs(i, j) = g.normal();
        ys.push_back(i % 2);
    }
    const rlda_model ma = fit_rlda(xs, ys, {shrinkage_mode::analytic, 0.0});
    CHECK(ma.gamma > 0.0);
    CHECK(ma.gamma <= 1.0);
    CHECK(std::isfinite(ma.w.norm()));
}

TEST_CASE("fit_rlda separates well-separated gaussian clouds") {
    rng g(17);
    const int n_per = 200, d = 6;
    Eigen::MatrixXd x(2 * n_per, d);
    std::vector<int> y;
    for (int i = 0; i < 2 * n_per; ++i) {
        const int cls = i < n_per ? 0 : 1;
        for (int j = 0; j < d; ++j) x(i, j) = g.normal() + (cls == 1 && j == 0 ? 4.0 : 0.0);
        y.push_back(cls);
    }
    const rlda_model m = fit_rlda(x, y, {shrinkage_mode::analytic, 0.0});
    int correct = 0;
    for (int i = 0; i < 2 * n_per; ++i) {
        const double s = rlda_score(m, x.row(i).transpose());
        correct += ((s > 0.0) == (y[static_cast<std::size_t>(i)] == 1)) ? 1 : 0;
    }
    CHECK(correct >= 2 * n_per * 95 / 100);
}

TEST_CASE("fit_rlda validates inputs") {
    Eigen::MatrixXd x(4, 2);
    x.setZero();
    x(0, 0) = 1.0; // avoid an all-degenerate matrix distracting from the check

    SUBCASE("single class") {
        try {
            fit_rlda(x, {1, 1, 1, 1}, {shrinkage_mode::fixed, 0.5});
            FAIL("expected single_class");
        } catch (const error& e) {
            CHECK(e.code() == error_code::single_class);
        }
    }
    SUBCASE("label count mismatch") {
        CHECK_THROWS_AS(fit_rlda(x, {0, 1, 0}, {shrinkage_mode::fixed, 0.5}), error);
    }
    SUBCASE("labels outside 0/1") {
        CHECK_THROWS_AS(fit_rlda(x, {0, 1, 2, 0}, {shrinkage_mode::fixed, 0.5}), error);
    }
    SUBCASE("too few rows per class") {
        Eigen::MatrixXd x2(2, 2);
        x2.setZero();
        try {
            fit_rlda(x2, {0, 1}, {shrinkage_mode::fixed, 0.5});
            FAIL("expected insufficient_trials");
        } catch (const error& e) {
            CHECK(e.code() == error_code::insufficient_trials);
        }
    }
    SUBCASE("score dimension mismatch") {
        Eigen::MatrixXd x3(6, 2);
        x3 << 0, 0, 1, 0, 0, 1, 3, 0, 4, 0, 3, 1;
        const rlda_model m = fit_rlda(x3, {0, 0, 0, 1, 1, 1}, {shrinkage_mode::fixed, 0.5});
        CHECK_THROWS_AS(rlda_score(m, Eigen::Vector3d(0, 0, 0)), error);
    }
}
