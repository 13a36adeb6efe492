#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vmi/types.hpp"

namespace vmi {

// shrinkage LDA: w = S'^{-1}(mu1 - mu0), b = -w^T(mu1+mu0)/2 with
// S' = (1-gamma)S + gamma (tr S/d) I over the pooled within-class covariance
struct rlda_model {
    Eigen::VectorXd w;
    double b = 0.0;
    double gamma = 0.0;
    Eigen::VectorXd mean0, mean1;
    Eigen::MatrixXd pooled_cov; // post-shrinkage
};

rlda_model fit_rlda(const Eigen::MatrixXd& x, const std::vector<int>& y,
                    const shrinkage_spec& shrinkage);

double rlda_score(const rlda_model& m, const Eigen::VectorXd& x);

} // namespace vmi
