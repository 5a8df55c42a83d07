#include "egtw/metrics/providers.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/kin/representation.hpp"
#include "egtw/kin/rotation.hpp"
#include "egtw/synth/text_grammar.hpp"

namespace egtw::metrics {

namespace {

constexpr int kFeatureDim = synth::kTemplateKindCount;

struct MotionSignals {
    double forward = 0;      // planar displacement along the initial facing
    double yaw = 0;          // net head yaw, radians
    double pitch = 0;        // net head pitch, radians (positive = down)
    double dip = 0;          // root height drop
    double raise_left = 0;   // wrist lift relative to its start, meters
    double raise_right = 0;
};

MotionSignals motion_signals(const kin::MotionSequence& m) {
    const kin::HeadTrack track = kin::head_track(m);
    const auto first = kin::forward_kinematics(m.skeleton, m.frames.front());
    const auto last = kin::forward_kinematics(m.skeleton, m.frames.back());

    MotionSignals s;
    const Eigen::Matrix3d r0 = track.rotation.front();
    const Eigen::Vector3d delta = r0.transpose() * (track.position.back() - track.position.front());
    s.forward = delta.z();
    s.yaw = kin::wrap_angle(kin::yaw_of(track.rotation.back()) - kin::yaw_of(track.rotation.front()));

    const Eigen::Vector3d f_end = r0.transpose() * track.rotation.back().col(2);
    s.pitch = std::atan2(-f_end.y(), std::hypot(f_end.x(), f_end.z()));

    double min_root = m.frames.front().root_position.y();
    for (const auto& p : m.frames) min_root = std::min(min_root, p.root_position.y());
    s.dip = m.frames.front().root_position.y() - min_root;

    if (m.skeleton.left_wrist >= 0) {
        const double start = first.position[static_cast<std::size_t>(m.skeleton.left_wrist)].y();
        double peak = start;
        for (const auto& frame : m.frames) {
            const auto fk = kin::forward_kinematics(m.skeleton, frame);
            peak = std::max(peak, fk.position[static_cast<std::size_t>(m.skeleton.left_wrist)].y());
        }
        s.raise_left = peak - start;
    }
    if (m.skeleton.right_wrist >= 0) {
        const double start = first.position[static_cast<std::size_t>(m.skeleton.right_wrist)].y();
        double peak = start;
        for (const auto& frame : m.frames) {
            const auto fk = kin::forward_kinematics(m.skeleton, frame);
            peak = std::max(peak, fk.position[static_cast<std::size_t>(m.skeleton.right_wrist)].y());
        }
        s.raise_right = peak - start;
    }
    (void)last;
    return s;
}

double clamp01(double v) {
    return std::clamp(v, 0.0, 1.0);
}

} // namespace

Eigen::VectorXd text_template_features(const std::string& text, std::uint64_t noise_seed,
                                       double noise_sigma) {
    const auto kind = synth::template_from_text(text);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(kFeatureDim);
    f(static_cast<int>(kind)) = 1.0;
    Rng rng(Rng(noise_seed).split("text-feature").seed());
    for (int i = 0; i < kFeatureDim; ++i) f(i) += noise_sigma * rng.normal();
    return f;
}

Eigen::VectorXd motion_template_features(const kin::MotionSequence& motion, std::uint64_t noise_seed,
                                         double noise_sigma) {
    const MotionSignals s = motion_signals(motion);
    constexpr double kDeg = std::numbers::pi / 180.0;

    Eigen::VectorXd f = Eigen::VectorXd::Zero(kFeatureDim);
    const double walk = clamp01(s.forward / 0.8);
    const double turn_left = clamp01(-s.yaw / (55 * kDeg));
    const double turn_right = clamp01(s.yaw / (55 * kDeg));
    const double look_up = clamp01(-s.pitch / (20 * kDeg));
    const double look_down = clamp01(s.pitch / (22 * kDeg));
    const double crouch = clamp01(s.dip / 0.15);
    const double raise_l = clamp01(s.raise_left / 0.25);
    const double raise_r = clamp01(s.raise_right / 0.25);

    f(static_cast<int>(synth::TemplateKind::WalkForward)) = walk * (1.0 - raise_r);
    f(static_cast<int>(synth::TemplateKind::TurnLeft)) = turn_left;
    f(static_cast<int>(synth::TemplateKind::TurnRight)) = turn_right;
    f(static_cast<int>(synth::TemplateKind::LookUp)) = look_up;
    f(static_cast<int>(synth::TemplateKind::LookDown)) = look_down;
    f(static_cast<int>(synth::TemplateKind::Crouch)) = crouch;
    f(static_cast<int>(synth::TemplateKind::RaiseLeftHand)) = raise_l;
    f(static_cast<int>(synth::TemplateKind::RaiseRightHand)) = raise_r * (1.0 - walk);
    f(static_cast<int>(synth::TemplateKind::WalkRaiseRight)) = std::min(clamp01(s.forward / 0.5), raise_r);
    f(static_cast<int>(synth::TemplateKind::StandStill)) = clamp01(1.0 - f.maxCoeff() * 1.5);

    Rng rng(Rng(noise_seed).split("motion-feature").seed());
    for (int i = 0; i < kFeatureDim; ++i) f(i) += noise_sigma * rng.normal();
    return f;
}

Eigen::VectorXd motion_stats_features(const kin::MotionSequence& motion) {
    const MotionSignals s = motion_signals(motion);
    const kin::HeadTrack track = kin::head_track(motion);

    double path = 0;
    for (std::size_t i = 1; i < track.position.size(); ++i)
        path += (track.position[i] - track.position[i - 1]).norm();

    double mean_height = 0;
    for (const auto& p : motion.frames) mean_height += p.root_position.y() / motion.frame_count();

    double mean_speed = 0;
    for (int f = 1; f < motion.frame_count(); ++f) {
        const auto a = kin::forward_kinematics(motion.skeleton, motion.frames[static_cast<std::size_t>(f - 1)]);
        const auto b = kin::forward_kinematics(motion.skeleton, motion.frames[static_cast<std::size_t>(f)]);
        double d = 0;
        for (int j = 0; j < motion.skeleton.joint_count; ++j)
            d += (b.position[static_cast<std::size_t>(j)] - a.position[static_cast<std::size_t>(j)]).norm();
        mean_speed += d / motion.skeleton.joint_count / (motion.frame_count() - 1);
    }

    Eigen::VectorXd f(10);
    f << s.forward, s.yaw, s.pitch, s.dip, s.raise_left, s.raise_right, path, mean_height, mean_speed,
        static_cast<double>(motion.frame_count()) / motion.fps;
    return f;
}

PoseProviderKind pose_provider_from_string(const std::string& s) {
    if (s == "gt") return PoseProviderKind::GroundTruth;
    if (s == "perturbed") return PoseProviderKind::Perturbed;
    if (s == "file") return PoseProviderKind::File;
    throw ConfigError("unknown pose provider: " + s);
}

Se3Trajectory provide_camera_track(const synth::Sample& sample, int sample_index,
                                   const PoseProviderConfig& config) {
    switch (config.kind) {
        case PoseProviderKind::GroundTruth:
            return sample.gt_camera;
        case PoseProviderKind::Perturbed: {
            Se3Trajectory t = sample.gt_camera;
            Rng rng(Rng(config.seed).split("pose-perturb").seed() + static_cast<std::uint64_t>(sample_index));
            for (auto& p : t.poses) {
                p.position += Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()) * config.sigma_position;
                Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
                axis.normalize();
                const double angle = rng.normal() * config.sigma_rotation_deg * std::numbers::pi / 180.0;
                p.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix() * p.rotation;
            }
            return t;
        }
        case PoseProviderKind::File: {
            std::ifstream is(config.file_path);
            if (!is) throw FormatError("cannot open pose file: " + config.file_path);
            nlohmann::json j;
            is >> j;
            if (!j.is_array() || sample_index >= static_cast<int>(j.size()))
                throw FormatError("pose file does not contain a trajectory for sample " +
                                  std::to_string(sample_index));
            return trajectory_from_json(j[static_cast<std::size_t>(sample_index)]);
        }
    }
    throw ConfigError("unknown pose provider kind");
}

} // namespace egtw::metrics
