#pragma once

#include <Eigen/Dense>
#include <string>

namespace egtw::metrics {

// Sample feature matrix (rows = samples) with a provider tag.
struct FeatureCloud {
    Eigen::MatrixXd features;
    std::string provider;

    void validate() const; // >= 2 samples, finite entries
};

// Frechet distance between Gaussian fits:
//   ||mu_a - mu_b||^2 + tr(Sa + Sb - 2 (Sa Sb)^{1/2})
// with a symmetric-PSD square root and small diagonal regularization.
// Covariances are the unbiased sample estimates.
double frechet_distance(const FeatureCloud& a, const FeatureCloud& b);

// Population-statistics form (used when moments are known analytically).
double frechet_from_stats(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                          const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b);

} // namespace egtw::metrics
