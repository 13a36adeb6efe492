#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vmi/types.hpp"

namespace vmi {

// spatial filter bank from the generalized eigendecomposition of class
// covariances: Sigma_target w = lambda (Sigma_target + Sigma_rest) w
struct csp_model {
    Eigen::MatrixXd filters;  // [2*n_pairs x n_channels], rows are filters
    Eigen::MatrixXd patterns; // [n_channels x 2*n_pairs], pseudo-inverse columns
    std::vector<double> eigenvalues; // kept lambdas, sorted descending, in (0,1)
    class_label target = class_label::eating_food; // paired against rest-of-classes
    int n_pairs = 0;
};

// per-trial covariance XX^T normalized by its trace, averaged over trials of
// the label; needs >= 2 such trials
Eigen::MatrixXd class_covariance(const epoch_set& es, class_label label);

// (1-gamma)*Sigma + gamma*(tr Sigma/d)*I
Eigen::MatrixXd shrink_covariance(const Eigen::MatrixXd& sigma, double gamma);

// analytic Ledoit-Wolf shrinkage intensity from the scatter of per-trial
// covariances around their mean: min(1, b^2/d^2)
double analytic_shrinkage_gamma(const std::vector<Eigen::MatrixXd>& covs,
                                const Eigen::MatrixXd& mean);

// solve the generalized eigenproblem, sort descending, keep n_pairs filters
// from each extreme; filters satisfy w_i^T (St+Sr) w_j = delta_ij and the
// largest-magnitude component of each filter is positive
csp_model fit_csp(const Eigen::MatrixXd& sigma_target, const Eigen::MatrixXd& sigma_rest,
                  int n_pairs);

// log-variance features: f_i = log(var(w_i^T X) / sum_j var(w_j^T X))
Eigen::MatrixXd csp_features(const csp_model& m, const epoch_set& es);

} // namespace vmi
