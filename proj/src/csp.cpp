#include "vmi/csp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

namespace vmi {

Eigen::MatrixXd class_covariance(const epoch_set& es, class_label label) {
    const int d = es.n_channels();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    int count = 0;
    for (int t = 0; t < es.n_trials(); ++t) {
        if (es.labels()[static_cast<std::size_t>(t)] != label) continue;
        const Eigen::MatrixXd x = es.trial(t).cast<double>();
        Eigen::MatrixXd c = x * x.transpose();
        const double tr = c.trace();
        if (tr <= 0.0)
            fail(error_code::zero_variance_trial,
                 "class_covariance: trial " + std::to_string(t) + " has zero energy");
        sum += c / tr;
        ++count;
    }
    if (count < 2) {
        std::ostringstream os;
        os << "class_covariance: need >= 2 trials of class " << class_id(label) << ", have "
           << count;
        fail(error_code::insufficient_trials, os.str());
    }
    return sum / static_cast<double>(count);
}

Eigen::MatrixXd shrink_covariance(const Eigen::MatrixXd& sigma, double gamma) {
    if (gamma < 0.0 || gamma > 1.0)
        fail(error_code::invalid_argument, "shrink_covariance: gamma outside [0,1]");
    const double d = static_cast<double>(sigma.rows());
    const double mu = sigma.trace() / d;
    return (1.0 - gamma) * sigma +
           gamma * mu * Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
}

double analytic_shrinkage_gamma(const std::vector<Eigen::MatrixXd>& covs,
                                const Eigen::MatrixXd& mean) {
    const double d = static_cast<double>(mean.rows());
    const double mu = mean.trace() / d;
    Eigen::MatrixXd target = mu * Eigen::MatrixXd::Identity(mean.rows(), mean.cols());
    const double dist2 = (mean - target).squaredNorm();
    if (dist2 <= 0.0) return 1.0;
    const double t = static_cast<double>(covs.size());
    double b2 = 0.0;
    for (const auto& c : covs) b2 += (c - mean).squaredNorm();
    b2 /= t * t;
    return std::min(1.0, b2 / dist2);
}

csp_model fit_csp(const Eigen::MatrixXd& sigma_target, const Eigen::MatrixXd& sigma_rest,
                  int n_pairs) {
    const Eigen::Index d = sigma_target.rows();
    if (sigma_rest.rows() != d || sigma_target.cols() != d || sigma_rest.cols() != d)
        fail(error_code::dimension_mismatch, "fit_csp: covariance shapes disagree");
    if (n_pairs < 1 || 2 * n_pairs > d) {
        std::ostringstream os;
        os << "fit_csp: 2*n_pairs = " << 2 * n_pairs << " must lie in [2, " << d << "]";
        fail(error_code::too_many_pairs, os.str());
    }

    const Eigen::MatrixXd composite = sigma_target + sigma_rest;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma_target, composite);
    if (solver.info() != Eigen::Success)
        fail(error_code::singular_covariance,
             "fit_csp: composite covariance not positive definite");

    // solver returns ascending eigenvalues with v^T (St+Sr) v = 1
    const Eigen::VectorXd ev = solver.eigenvalues();
    const Eigen::MatrixXd vec = solver.eigenvectors();

    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<std::size_t>(2 * n_pairs));
    for (int i = 0; i < n_pairs; ++i) keep.push_back(d - 1 - i); // largest lambda first
    for (int i = n_pairs - 1; i >= 0; --i) keep.push_back(i);    // then smallest, descending

    csp_model m;
    m.n_pairs = n_pairs;
    m.filters.resize(2 * n_pairs, d);
    m.patterns.resize(d, 2 * n_pairs);
    m.eigenvalues.reserve(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
        Eigen::VectorXd w = vec.col(keep[r]);
        // sign convention: largest-magnitude component positive
        Eigen::Index imax = 0;
        w.cwiseAbs().maxCoeff(&imax);
        if (w(imax) < 0.0) w = -w;
        m.filters.row(static_cast<Eigen::Index>(r)) = w.transpose();
        m.patterns.col(static_cast<Eigen::Index>(r)) = composite * w;
        m.eigenvalues.push_back(ev(keep[r]));
    }
    return m;
}

Eigen::MatrixXd csp_features(const csp_model& m, const epoch_set& es) {
    if (m.filters.cols() != es.n_channels())
        fail(error_code::dimension_mismatch, "csp_features: channel count mismatch");
    const Eigen::Index k = m.filters.rows();
    Eigen::MatrixXd feats(es.n_trials(), k);
    for (int t = 0; t < es.n_trials(); ++t) {
        const Eigen::MatrixXd proj = m.filters * es.trial(t).cast<double>();
        Eigen::VectorXd var(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const double mean = proj.row(i).mean();
            var(i) = (proj.row(i).array() - mean).square().sum() /
                     static_cast<double>(proj.cols());
        }
        const double total = var.sum();
        if (!(total > 0.0) || (var.array() <= 0.0).any())
            fail(error_code::zero_variance_trial,
                 "csp_features: trial " + std::to_string(t) + " has a zero-variance projection");
        feats.row(t) = (var.array() / total).log().matrix().transpose();
    }
    return feats;
}

} // namespace vmi
