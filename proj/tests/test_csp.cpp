#include <doctest.h>

#include <cmath>
#include <vector>

#include "vmi/csp.hpp"
#include "vmi/errors.hpp"
#include "vmi/rng.hpp"

using namespace vmi;

namespace {

// random symmetric positive-definite matrix A A^T + eps I
Eigen::MatrixXd random_spd(rng& g, int d) {
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = g.normal();
    return a * a.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d);
}

} // namespace

TEST_CASE("fit_csp solves a diagonal problem in closed form") {
    // St = diag(4, 1, 0.25, 1), Sr = I: lambdas are 4/5, 1/2, 1/5, 1/2
    Eigen::MatrixXd st = Eigen::MatrixXd::Identity(4, 4);
    st(0, 0) = 4.0;
    st(2, 2) = 0.25;
    const Eigen::MatrixXd sr = Eigen::MatrixXd::Identity(4, 4);

    const csp_model m = fit_csp(st, sr, 1);
    REQUIRE(m.eigenvalues.size() == 2);
    CHECK(m.eigenvalues[0] == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(m.eigenvalues[1] == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(m.n_pairs == 1);
    REQUIRE(m.filters.rows() == 2);
    REQUIRE(m.filters.cols() == 4);

    // the extreme filters pick out coordinates 0 and 2 (up to scale)
    CHECK(std::abs(m.filters(0, 0)) > 100 * std::abs(m.filters(0, 1)));
    CHECK(std::abs(m.filters(1, 2)) > 100 * std::abs(m.filters(1, 1)));
    // sign convention: largest-|.| component positive
    CHECK(m.filters(0, 0) > 0.0);
    CHECK(m.filters(1, 2) > 0.0);
}

TEST_CASE("fit_csp whitens the composite covariance on random problems") {
    rng g(2024);
    for (int rep = 0; rep < 100; ++rep) {
        const int d = 2 + static_cast<int>(g.uniform_index(15)); // 2..16
        const int pairs = 1 + static_cast<int>(g.uniform_index(
                                  static_cast<std::uint64_t>(d / 2)));
        const Eigen::MatrixXd st = random_spd(g, d);
        const Eigen::MatrixXd sr = random_spd(g, d);
        const csp_model m = fit_csp(st, sr, pairs);

        REQUIRE(m.filters.rows() == 2 * pairs);
        // W (St+Sr) W^T = I on the kept rows
        const Eigen::MatrixXd gram = m.filters * (st + sr) * m.filters.transpose();
        const double residual =
            (gram - Eigen::MatrixXd::Identity(2 * pairs, 2 * pairs)).cwiseAbs().maxCoeff();
        CHECK(residual < 1e-8);

        // W St W^T is diagonal with the kept eigenvalues
        const Eigen::MatrixXd dt = m.filters * st * m.filters.transpose();
        for (int i = 0; i < 2 * pairs; ++i) {
            CHECK(dt(i, i) == doctest::Approx(m.eigenvalues[static_cast<std::size_t>(i)])
                                  .epsilon(1e-8));
            for (int j = 0; j < 2 * pairs; ++j)
                if (i != j) CHECK(std::abs(dt(i, j)) < 1e-8);
        }

        // eigenvalues kept from both extremes, descending, inside (0,1)
        for (std::size_t i = 1; i < m.eigenvalues.size(); ++i)
            CHECK(m.eigenvalues[i - 1] >= m.eigenvalues[i] - 1e-12);
        for (double l : m.eigenvalues) {
            CHECK(l > 0.0);
            CHECK(l < 1.0);
        }

        // patterns invert the filters: W * A = I
        const Eigen::MatrixXd wa = m.filters * m.patterns;
        const double inv_res =
            (wa - Eigen::MatrixXd::Identity(2 * pairs, 2 * pairs)).cwiseAbs().maxCoeff();
        CHECK(inv_res < 1e-8);
    }
}

TEST_CASE("fit_csp recovers a planted spatial pattern") {
    // two sources mixed into 8 channels; the target class carries extra
    // variance along pattern a only
    rng g(55);
    const int d = 8, n_trials = 30, n_samp = 500;
    Eigen::VectorXd a(d), b(d);
    for (int i = 0; i < d; ++i) {
        a(i) = g.normal();
        b(i) = g.normal();
    }
    a.normalize();
    b = (b - a * a.dot(b)).normalized(); // orthogonal distractor

    const auto make_cov = [&](double target_gain) {
        Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
        for (int t = 0; t < n_trials; ++t) {
            Eigen::MatrixXd x(d, n_samp);
            for (int s = 0; s < n_samp; ++s) {
                Eigen::VectorXd col(d);
                for (int i = 0; i < d; ++i) col(i) = 0.5 * g.normal();
                col += target_gain * g.normal() * a + 1.0 * g.normal() * b;
                x.col(s) = col;
            }
            const Eigen::MatrixXd c = x * x.transpose();
            acc += c / c.trace();
        }
        return Eigen::MatrixXd(acc / n_trials);
    };

    const Eigen::MatrixXd st = make_cov(3.0);
    const Eigen::MatrixXd sr = make_cov(0.3);
    const csp_model m = fit_csp(st, sr, 1);

    // the top pattern matches the planted mixing vector
    const Eigen::VectorXd p0 = m.patterns.col(0).normalized();
    CHECK(std::abs(p0.dot(a)) > 0.95);
    CHECK(m.eigenvalues[0] > 0.7);
}

TEST_CASE("fit_csp validates shapes and pair count") {
    const Eigen::MatrixXd i4 = Eigen::MatrixXd::Identity(4, 4);
    try {
        fit_csp(i4, i4, 3); // 6 filters > 4 channels
        FAIL("expected too_many_pairs");
    } catch (const error& e) {
        CHECK(e.code() == error_code::too_many_pairs);
    }
    CHECK_THROWS_AS(fit_csp(i4, i4, 0), error);
    CHECK_THROWS_AS(fit_csp(i4, Eigen::MatrixXd::Identity(3, 3), 1), error);
}

TEST_CASE("class_covariance averages trace-normalized trial covariances") {
    // deterministic two-channel trials with known covariance direction
    Eigen::MatrixXf t0(2, 4), t1(2, 4);
    t0 << 1, -1, 1, -1, 0, 0, 0, 0; // all variance on channel 0
    t1 << 0, 0, 0, 0, 2, -2, 2, -2; // all variance on channel 1
    epoch_set es({t0, t1, t0}, {class_label::eating_food, class_label::eating_food,
                                class_label::opening_door},
                 {0.0, 0.004}, 1000.0);

    const Eigen::MatrixXd c = class_covariance(es, class_label::eating_food);
    REQUIRE(c.rows() == 2);
    // the two eating_food trials normalize to diag(1,0) and diag(0,1): the
    // amplitude-4 trial carries no extra weight after trace normalization
    CHECK(c(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(c.trace() == doctest::Approx(1.0).epsilon(1e-12));

    try {
        class_covariance(es, class_label::opening_door); // single trial
        FAIL("expected insufficient_trials");
    } catch (const error& e) {
        CHECK(e.code() == error_code::insufficient_trials);
    }

    // a flat trial has zero trace and cannot be normalized
    Eigen::MatrixXf flat = Eigen::MatrixXf::Zero(2, 4);
    epoch_set bad({flat, t0}, {class_label::eating_food, class_label::eating_food},
                  {0.0, 0.004}, 1000.0);
    try {
        class_covariance(bad, class_label::eating_food);
        FAIL("expected zero_variance_trial");
    } catch (const error& e) {
        CHECK(e.code() == error_code::zero_variance_trial);
    }
}

TEST_CASE("shrinkage blends toward the scaled identity") {
    Eigen::MatrixXd s(2, 2);
    s << 4.0, 1.0, 1.0, 2.0;
    const Eigen::MatrixXd s0 = shrink_covariance(s, 0.0);
    CHECK(s0.isApprox(s));
    const Eigen::MatrixXd s1 = shrink_covariance(s, 1.0);
    CHECK(s1(0, 0) == doctest::Approx(3.0)); // tr/d = 3
    CHECK(s1(0, 1) == doctest::Approx(0.0));
    const Eigen::MatrixXd sh = shrink_covariance(s, 0.25);
    CHECK(sh(0, 0) == doctest::Approx(0.75 * 4.0 + 0.25 * 3.0));
    CHECK(sh(1, 0) == doctest::Approx(0.75));
    CHECK_THROWS_AS(shrink_covariance(s, -0.1), error);
    CHECK_THROWS_AS(shrink_covariance(s, 1.1), error);
}

TEST_CASE("analytic shrinkage stays in [0,1] and reacts to scatter") {
    rng g(8);
    const int d = 6;

    // identical trial covariances: no scatter, gamma -> 0
    std::vector<Eigen::MatrixXd> same(10, random_spd(g, d));
    Eigen::MatrixXd mean = same[0];
    CHECK(analytic_shrinkage_gamma(same, mean) == doctest::Approx(0.0).epsilon(1e-12));

    // wildly scattered covariances push gamma up but never past 1
    std::vector<Eigen::MatrixXd> mixed;
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < 12; ++i) {
        mixed.push_back(random_spd(g, d) * g.uniform(0.01, 5.0));
        acc += mixed.back();
    }
    const Eigen::MatrixXd m2 = acc / 12.0;
    const double gamma = analytic_shrinkage_gamma(mixed, m2);
    CHECK(gamma > 0.0);
    CHECK(gamma <= 1.0);
}
