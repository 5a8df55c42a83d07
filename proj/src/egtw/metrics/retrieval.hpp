#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace egtw::metrics {

struct RetrievalMetrics {
    double r_precision = 0.0; // fraction of motions whose paired text ranks in the top k
    double mm_dist = 0.0;     // mean Euclidean distance between paired features
    int pools = 0;
};

// Rows of text_features and motion_features are paired by index. Samples are
// shuffled (seeded) and split into pools of pool_size; a trailing partial pool
// is dropped. Throws when no full pool fits or the pool cannot host the rank
// cutoff. MM-Dist is averaged over all pairs regardless of pooling.
RetrievalMetrics retrieval_metrics(const Eigen::MatrixXd& text_features,
                                   const Eigen::MatrixXd& motion_features, int pool_size = 32,
                                   int rank_cutoff = 3, std::uint64_t shuffle_seed = 0);

} // namespace egtw::metrics
