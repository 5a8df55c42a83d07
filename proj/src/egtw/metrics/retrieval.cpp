#include "egtw/metrics/retrieval.hpp"

#include <vector>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::metrics {

RetrievalMetrics retrieval_metrics(const Eigen::MatrixXd& text_features,
                                   const Eigen::MatrixXd& motion_features, int pool_size, int rank_cutoff,
                                   std::uint64_t shuffle_seed) {
    if (text_features.rows() != motion_features.rows() || text_features.cols() != motion_features.cols())
        throw ValidationError("retrieval: feature matrices must be paired and same-dimensional");
    const int n = static_cast<int>(text_features.rows());
    if (rank_cutoff < 1) throw ValidationError("retrieval: rank cutoff must be >= 1");
    if (pool_size < rank_cutoff)
        throw ValidationError("retrieval: pool smaller than the rank cutoff");
    if (n < pool_size) throw ValidationError("retrieval: not enough samples for one pool");

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(Rng(shuffle_seed).split("retrieval-pools").seed());
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);

    RetrievalMetrics out;
    int hits = 0, queries = 0;
    const int pools = n / pool_size;
    for (int p = 0; p < pools; ++p) {
        const int base = p * pool_size;
        for (int qi = 0; qi < pool_size; ++qi) {
            const int motion_idx = order[static_cast<std::size_t>(base + qi)];
            const double paired =
                (motion_features.row(motion_idx) - text_features.row(motion_idx)).norm();
            int strictly_closer = 0;
            for (int ki = 0; ki < pool_size; ++ki) {
                if (ki == qi) continue;
                const int text_idx = order[static_cast<std::size_t>(base + ki)];
                const double d = (motion_features.row(motion_idx) - text_features.row(text_idx)).norm();
                if (d < paired) ++strictly_closer;
            }
            if (strictly_closer < rank_cutoff) ++hits;
            ++queries;
        }
    }
    out.pools = pools;
    out.r_precision = static_cast<double>(hits) / queries;

    double dist = 0;
    for (int i = 0; i < n; ++i) dist += (motion_features.row(i) - text_features.row(i)).norm();
    out.mm_dist = dist / n;
    return out;
}

} // namespace egtw::metrics
