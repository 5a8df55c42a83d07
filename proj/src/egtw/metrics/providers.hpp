#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "egtw/kin/skeleton.hpp"
#include "egtw/metrics/trajectory.hpp"
#include "egtw/synth/sample.hpp"

namespace egtw::metrics {

// ---- feature providers (pluggable embedders for the retrieval / Frechet math) ----

// Toy retrieval space: template one-hot (plus seeded noise) on the text side,
// a heuristic template-score vector on the motion side. Matched pairs land
// close together without any trained evaluator.
Eigen::VectorXd text_template_features(const std::string& text, std::uint64_t noise_seed,
                                       double noise_sigma = 0.02);
Eigen::VectorXd motion_template_features(const kin::MotionSequence& motion, std::uint64_t noise_seed,
                                         double noise_sigma = 0.02);

// Fixed-dimension summary statistics of a motion, the toy featurizer behind
// the motion-side Frechet distance. Provider id: "motion-stats-v1".
Eigen::VectorXd motion_stats_features(const kin::MotionSequence& motion);
constexpr const char* kMotionStatsProvider = "motion-stats-v1";

// ---- camera pose providers ----

enum class PoseProviderKind {
    GroundTruth, // the sample's own gt_camera
    Perturbed,   // gt_camera with seeded Gaussian position noise and random small rotations
    File,        // external import: JSON array of trajectories, one per sample
};

PoseProviderKind pose_provider_from_string(const std::string& s);

struct PoseProviderConfig {
    PoseProviderKind kind = PoseProviderKind::GroundTruth;
    double sigma_position = 0.01;   // meters
    double sigma_rotation_deg = 1.0;
    std::uint64_t seed = 1;
    std::string file_path;
};

Se3Trajectory provide_camera_track(const synth::Sample& sample, int sample_index,
                                   const PoseProviderConfig& config);

} // namespace egtw::metrics
