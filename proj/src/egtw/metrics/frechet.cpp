#include "egtw/metrics/frechet.hpp"

#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::metrics {

namespace {

constexpr double kEps = 1e-10;

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd vals = es.eigenvalues();
    for (int i = 0; i < vals.size(); ++i) vals(i) = std::sqrt(std::max(0.0, vals(i)));
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace

void FeatureCloud::validate() const {
    if (features.rows() < 2) throw ValidationError("feature cloud: need at least 2 samples for covariance");
    if (!features.allFinite()) throw ValidationError("feature cloud: non-finite features");
}

double frechet_from_stats(const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a,
                          const Eigen::VectorXd& mean_b, const Eigen::MatrixXd& cov_b) {
    if (mean_a.size() != mean_b.size()) throw ValidationError("frechet: dimension mismatch");
    const auto d = mean_a.size();
    Eigen::MatrixXd sa = cov_a + kEps * Eigen::MatrixXd::Identity(d, d);
    Eigen::MatrixXd sb = cov_b + kEps * Eigen::MatrixXd::Identity(d, d);

    // tr((Sa Sb)^{1/2}) computed through the symmetric form sqrt(Sa)^T Sb sqrt(Sa)
    const Eigen::MatrixXd root_a = symmetric_sqrt(sa);
    const Eigen::MatrixXd inner = symmetric_sqrt(root_a * sb * root_a);

    const double mean_term = (mean_a - mean_b).squaredNorm();
    const double trace_term = sa.trace() + sb.trace() - 2.0 * inner.trace();
    // numeric guard: the exact value is nonnegative
    return std::max(0.0, mean_term + trace_term);
}

double frechet_distance(const FeatureCloud& a, const FeatureCloud& b) {
    a.validate();
    b.validate();
    if (a.features.cols() != b.features.cols()) throw ValidationError("frechet: dimension mismatch");

    auto stats = [](const Eigen::MatrixXd& x) {
        const Eigen::VectorXd mean = x.colwise().mean();
        const Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
        const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
        return std::make_pair(mean, cov);
    };
    const auto [ma, ca] = stats(a.features);
    const auto [mb, cb] = stats(b.features);
    return frechet_from_stats(ma, ca, mb, cb);
}

} // namespace egtw::metrics
