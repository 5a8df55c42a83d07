#include "egtw/metrics/evaluate.hpp"

#include <sstream>

#include "egtw/core/error.hpp"
#include "egtw/core/table.hpp"
#include "egtw/metrics/frechet.hpp"
#include "egtw/metrics/hand.hpp"
#include "egtw/metrics/retrieval.hpp"

namespace egtw::metrics {

EvaluateConfig EvaluateConfig::from_metric_list(const std::string& list) {
    EvaluateConfig c;
    c.trans = c.rot = c.hand = c.fid = c.rprec = false;
    std::istringstream is(list);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item == "trans") c.trans = true;
        else if (item == "rot") c.rot = true;
        else if (item == "hand") c.hand = true;
        else if (item == "fid") c.fid = true;
        else if (item == "rprec") c.rprec = true;
        else if (!item.empty()) throw ConfigError("unknown metric: " + item);
    }
    return c;
}

namespace {

std::string cell(const std::optional<double>& v) {
    return v ? format_double(*v) : "n/a";
}

} // namespace

void EvaluationReport::save_csv(const std::string& path) const {
    CsvTable t;
    t.header = {"sample", "trans_err", "rot_err", "hand_score", "m_fid", "r_prec", "mm_dist"};
    for (const auto& r : rows) {
        t.rows.push_back({std::to_string(r.index), cell(r.trans_err), cell(r.rot_err), cell(r.hand_score),
                          "n/a", "n/a", "n/a"});
    }
    t.rows.push_back({"aggregate", cell(mean_trans_err), cell(mean_rot_err), cell(mean_hand_score),
                      cell(m_fid), cell(r_precision), cell(mm_dist)});
    t.save(path);
}

EvaluationReport evaluate_samples(const std::vector<synth::Sample>& reference,
                                  const std::vector<kin::MotionSequence>& generated_motion,
                                  const synth::SampleConfig& sample_config, const EvaluateConfig& config) {
    if (reference.empty()) throw ValidationError("evaluate: no samples");
    if (!generated_motion.empty() && generated_motion.size() != reference.size())
        throw ValidationError("evaluate: generated motion count mismatch");

    EvaluationReport report;
    double sum_trans = 0, sum_rot = 0, sum_hand = 0;

    for (int i = 0; i < static_cast<int>(reference.size()); ++i) {
        const synth::Sample& sample = reference[static_cast<std::size_t>(i)];
        const kin::MotionSequence& motion =
            generated_motion.empty() ? sample.motion : generated_motion[static_cast<std::size_t>(i)];

        SampleMetricsRow row;
        row.index = i;

        if (config.trans || config.rot) {
            const Se3Trajectory cam = provide_camera_track(sample, i, config.pose);
            // head track resampled to the video timestamps (exact 2x stride)
            const Se3Trajectory head =
                head_camera_trajectory(motion, sample_config.mount.rotation, sample_config.mount.offset, 2);
            if (head.size() != cam.size())
                throw ValidationError("evaluate: camera/head track lengths disagree");
            const AlignmentResult aligned = align_trajectories(cam, head);
            if (config.trans) {
                row.trans_err = trans_err(aligned.aligned, head);
                sum_trans += *row.trans_err;
            }
            if (config.rot) {
                row.rot_err = rot_err(aligned.aligned, head);
                sum_rot += *row.rot_err;
            }
        }
        if (config.hand) {
            const auto presence = hand_presence_synthetic(sample.video, config.hand_min_pixels);
            const auto visibility = hand_visibility(motion, sample_config.intrinsics, sample_config.mount);
            row.hand_score = hand_score(pair_hand_observations(presence, visibility, 2));
            sum_hand += *row.hand_score;
        }
        report.rows.push_back(row);
    }

    const double n = static_cast<double>(reference.size());
    if (config.trans) report.mean_trans_err = sum_trans / n;
    if (config.rot) report.mean_rot_err = sum_rot / n;
    if (config.hand) report.mean_hand_score = sum_hand / n;

    if (config.fid && reference.size() >= 2) {
        FeatureCloud real, gen;
        real.provider = gen.provider = kMotionStatsProvider;
        const int dim = static_cast<int>(motion_stats_features(reference[0].motion).size());
        real.features.resize(static_cast<int>(reference.size()), dim);
        gen.features.resize(static_cast<int>(reference.size()), dim);
        for (int i = 0; i < static_cast<int>(reference.size()); ++i) {
            real.features.row(i) = motion_stats_features(reference[static_cast<std::size_t>(i)].motion);
            const kin::MotionSequence& motion =
                generated_motion.empty() ? reference[static_cast<std::size_t>(i)].motion
                                         : generated_motion[static_cast<std::size_t>(i)];
            gen.features.row(i) = motion_stats_features(motion);
        }
        report.m_fid = frechet_distance(gen, real);
    }

    if (config.rprec && static_cast<int>(reference.size()) >= config.retrieval_pool) {
        const int n_samples = static_cast<int>(reference.size());
        Eigen::MatrixXd text_f, motion_f;
        for (int i = 0; i < n_samples; ++i) {
            const Eigen::VectorXd tf = text_template_features(reference[static_cast<std::size_t>(i)].text,
                                                              config.seed + static_cast<std::uint64_t>(i));
            const kin::MotionSequence& motion =
                generated_motion.empty() ? reference[static_cast<std::size_t>(i)].motion
                                         : generated_motion[static_cast<std::size_t>(i)];
            const Eigen::VectorXd mf =
                motion_template_features(motion, config.seed + 7777 + static_cast<std::uint64_t>(i));
            if (i == 0) {
                text_f.resize(n_samples, tf.size());
                motion_f.resize(n_samples, mf.size());
            }
            text_f.row(i) = tf;
            motion_f.row(i) = mf;
        }
        const RetrievalMetrics rm =
            retrieval_metrics(text_f, motion_f, config.retrieval_pool, 3, config.seed);
        report.r_precision = rm.r_precision;
        report.mm_dist = rm.mm_dist;
    }

    return report;
}

} // namespace egtw::metrics
