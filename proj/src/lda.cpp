#include "vmi/lda.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <iostream>

namespace vmi {

rlda_model fit_rlda(const Eigen::MatrixXd& x, const std::vector<int>& y,
                    const shrinkage_spec& shrinkage) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (static_cast<Eigen::Index>(y.size()) != n)
        fail(error_code::dimension_mismatch, "fit_rlda: label count != row count");

    Eigen::Index n0 = 0, n1 = 0;
    for (int v : y) {
        if (v != 0 && v != 1)
            fail(error_code::invalid_argument, "fit_rlda: labels must be 0 or 1");
        (v == 0 ? n0 : n1) += 1;
    }
    if (n0 == 0 || n1 == 0)
        fail(error_code::single_class, "fit_rlda: both classes must be present");
    if (n <= 2)
        fail(error_code::insufficient_trials, "fit_rlda: need more than 2 samples");
    if (n <= d)
        std::cerr << "warning: fit_rlda with n=" << n << " samples <= d=" << d
                  << " features; estimates may be unstable\n";

    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i)
        (y[static_cast<std::size_t>(i)] == 0 ? mu0 : mu1) += x.row(i).transpose();
    mu0 /= static_cast<double>(n0);
    mu1 /= static_cast<double>(n1);

    // centered rows and pooled within-class covariance (ddof 2)
    Eigen::MatrixXd centered(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        centered.row(i) =
            x.row(i) - (y[static_cast<std::size_t>(i)] == 0 ? mu0 : mu1).transpose();
    const Eigen::MatrixXd pooled =
        centered.transpose() * centered / static_cast<double>(n - 2);

    double gamma = 0.0;
    if (shrinkage.mode == shrinkage_mode::fixed) {
        gamma = shrinkage.gamma;
        if (gamma < 0.0 || gamma > 1.0)
            fail(error_code::invalid_argument, "fit_rlda: gamma outside [0,1]");
    } else {
        // Ledoit-Wolf on the scatter of per-sample outer products
        const double mu = pooled.trace() / static_cast<double>(d);
        const double dist2 =
            (pooled - mu * Eigen::MatrixXd::Identity(d, d)).squaredNorm();
        if (dist2 <= 0.0) {
            gamma = 1.0;
        } else {
            const Eigen::MatrixXd sn =
                centered.transpose() * centered / static_cast<double>(n);
            double b2 = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const Eigen::VectorXd r = centered.row(i).transpose();
                b2 += (r * r.transpose() - sn).squaredNorm();
            }
            b2 /= static_cast<double>(n) * static_cast<double>(n);
            gamma = std::min(1.0, b2 / dist2);
        }
    }

    rlda_model m;
    m.gamma = gamma;
    m.mean0 = mu0;
    m.mean1 = mu1;
    const double mu = pooled.trace() / static_cast<double>(d);
    m.pooled_cov =
        (1.0 - gamma) * pooled + gamma * mu * Eigen::MatrixXd::Identity(d, d);

    Eigen::LLT<Eigen::MatrixXd> llt(m.pooled_cov);
    if (llt.info() != Eigen::Success)
        fail(error_code::degenerate_covariance,
             "fit_rlda: covariance not positive definite after shrinkage");
    m.w = llt.solve(mu1 - mu0);
    if (!m.w.allFinite())
        fail(error_code::degenerate_covariance, "fit_rlda: non-finite weights");
    m.b = -m.w.dot(mu1 + mu0) / 2.0;
    return m;
}

double rlda_score(const rlda_model& m, const Eigen::VectorXd& x) {
    if (x.size() != m.w.size())
        fail(error_code::dimension_mismatch, "rlda_score: feature dimension mismatch");
    return m.w.dot(x) + m.b;
}

} // namespace vmi
