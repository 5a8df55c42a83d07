#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egtw/metrics/providers.hpp"

namespace egtw::metrics {

struct EvaluateConfig {
    bool trans = true;
    bool rot = true;
    bool hand = true;
    bool fid = true;    // motion-side Frechet distance over motion-stats features
    bool rprec = false; // retrieval metrics need a pool's worth of samples
    PoseProviderConfig pose;
    int hand_min_pixels = 4;
    int retrieval_pool = 32;
    std::uint64_t seed = 1;

    static EvaluateConfig from_metric_list(const std::string& comma_separated);
};

struct SampleMetricsRow {
    int index = 0;
    std::optional<double> trans_err;
    std::optional<double> rot_err;
    std::optional<double> hand_score;
};

struct EvaluationReport {
    std::vector<SampleMetricsRow> rows;
    std::optional<double> mean_trans_err;
    std::optional<double> mean_rot_err;
    std::optional<double> mean_hand_score;
    std::optional<double> m_fid;
    std::optional<double> r_precision;
    std::optional<double> mm_dist;

    // one row per sample plus a final aggregate row; absent cells read "n/a"
    void save_csv(const std::string& path) const;
};

// Evaluates motions against reference samples. When `generated_motion` is
// empty the samples' own motions are scored (the ground-truth self-check);
// otherwise entry i replaces the motion of sample i. The camera track comes
// from the configured pose provider; the head track always comes from the
// evaluated motion.
EvaluationReport evaluate_samples(const std::vector<synth::Sample>& reference,
                                  const std::vector<kin::MotionSequence>& generated_motion,
                                  const synth::SampleConfig& sample_config, const EvaluateConfig& config);

} // namespace egtw::metrics
