#include "egtw/synth/motion_gen.hpp"

#include <cmath>
#include <numbers>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/kin/rotation.hpp"

namespace egtw::synth {

namespace {

using kin::rot_x;
using kin::rot_y;
using kin::rot_z;

constexpr double kDeg = std::numbers::pi / 180.0;

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

// Normalized travel fraction with smoothstep ramps and a constant-speed
// middle. Peak slope 1/(1-r), lower than plain smoothstep's 1.5, which keeps
// fast walks under the per-frame displacement bound.
double travel(double u) {
    constexpr double r = 0.2;
    u = std::clamp(u, 0.0, 1.0);
    auto ramp_integral = [](double t) { return t * t * t - 0.5 * t * t * t * t; };
    double s;
    if (u < r) s = r * ramp_integral(u / r);
    else if (u < 1.0 - r) s = 0.5 * r + (u - r);
    else s = 0.5 * r + (1.0 - 2.0 * r) + r * (0.5 - ramp_integral((1.0 - u) / r));
    return s / (1.0 - r);
}

// interpolate from identity toward `target` by fraction e
Eigen::Matrix3d partial(const Eigen::Matrix3d& target, double e) {
    const Eigen::AngleAxisd aa(target);
    return Eigen::AngleAxisd(aa.angle() * e, aa.axis()).toRotationMatrix();
}

struct BodyState {
    double yaw = 0;
    double forward = 0;   // distance along the current facing
    double height_drop = 0;
    double gait_phase = 0; // radians
    double gait_amp = 0;   // 0..1 envelope
    double look_pitch = 0; // radians, positive = down
    double raise_left = 0; // 0..1
    double raise_right = 0;
    double crouch = 0;     // 0..1
};

} // namespace

MotionTemplate randomized_template(TemplateKind kind, std::uint64_t seed) {
    Rng rng(seed ^ fnv1a64("template-params"));
    MotionTemplate t;
    t.kind = kind;
    t.walk_distance = rng.uniform(1.0, 2.0);
    t.turn_angle_deg = rng.uniform(45.0, 120.0);
    // action timing varies while the prompt stays silent about it, so the
    // video is the only cue for when the action happens
    t.action_duration_frac = rng.uniform(0.55, 0.7);
    t.action_start_frac = rng.uniform(0.0, 1.0 - t.action_duration_frac);
    if (kind == TemplateKind::WalkForward || kind == TemplateKind::WalkRaiseRight)
        t.walk_distance = rng.uniform(0.9, 1.4); // keeps the peak speed under the smoothness bound
    return t;
}

kin::MotionSequence generate_motion(const MotionTemplate& tmpl, const kin::Skeleton& skeleton,
                                    int frame_count, double fps, std::uint64_t seed) {
    skeleton.validate();
    if (frame_count < 2) throw ValidationError("generate_motion: need at least 2 frames");
    if (fps <= 0) throw ValidationError("generate_motion: fps must be positive");

    Rng rng(seed ^ fnv1a64("motion-style"));
    const double gait_freq = rng.uniform(0.55, 0.65);           // Hz
    const double gait_phase0 = rng.uniform(0, 2 * std::numbers::pi);
    const double sway = rng.uniform(0.8, 1.2);

    const double duration = static_cast<double>(frame_count - 1) / fps;
    const double root_height = 0.95;

    kin::MotionSequence m;
    m.skeleton = skeleton;
    m.fps = fps;

    for (int f = 0; f < frame_count; ++f) {
        const double t = static_cast<double>(f) / fps;
        const double raw_u = duration > 0 ? t / duration : 0.0;
        // action window remap: idle before start, active for duration, idle after
        const double u = std::clamp((raw_u - tmpl.action_start_frac) /
                                        std::max(1e-9, tmpl.action_duration_frac),
                                    0.0, 1.0);
        const double e = smoothstep(u);

        BodyState st;
        switch (tmpl.kind) {
            case TemplateKind::StandStill:
                break;
            case TemplateKind::WalkForward:
                st.forward = tmpl.walk_distance * travel(u);
                st.gait_amp = std::min(1.0, std::min(u, 1.0 - u) * 6.0);
                break;
            case TemplateKind::TurnLeft:
                // facing swings from +Z toward -X, so yaw = atan2(f.x, f.z) decreases
                st.yaw = -tmpl.turn_angle_deg * kDeg * e;
                break;
            case TemplateKind::TurnRight:
                st.yaw = tmpl.turn_angle_deg * kDeg * e;
                break;
            case TemplateKind::LookUp:
                st.look_pitch = -30 * kDeg * e;
                break;
            case TemplateKind::LookDown:
                st.look_pitch = 35 * kDeg * e;
                break;
            case TemplateKind::Crouch:
                st.crouch = e;
                break;
            case TemplateKind::RaiseLeftHand:
                st.raise_left = e;
                break;
            case TemplateKind::RaiseRightHand:
                st.raise_right = e;
                break;
            case TemplateKind::WalkRaiseRight:
                st.forward = 0.6 * tmpl.walk_distance * travel(u);
                st.gait_amp = std::min(1.0, std::min(u, 1.0 - u) * 6.0) * 0.7;
                st.raise_right = e;
                break;
        }
        st.gait_phase = gait_phase0 + 2 * std::numbers::pi * gait_freq * t;
        st.height_drop = 0.22 * st.crouch;

        kin::Pose p;
        p.root_rotation = rot_y(st.yaw);
        p.root_position = p.root_rotation * Eigen::Vector3d(0, 0, st.forward);
        p.root_position.y() = root_height - st.height_drop +
                              0.004 * st.gait_amp * std::sin(2 * st.gait_phase);
        p.joint_rotations.assign(static_cast<std::size_t>(skeleton.joint_count), Eigen::Matrix3d::Identity());

        const double swing = st.gait_amp * 3.5 * kDeg * std::sin(st.gait_phase);
        // legs: hips 10 (right) / 14 (left), knees 11/15 (knees flex only while crouching)
        p.joint_rotations[10] = rot_x(swing - 38 * kDeg * st.crouch);
        p.joint_rotations[14] = rot_x(-swing - 38 * kDeg * st.crouch);
        p.joint_rotations[11] = rot_x(52 * kDeg * st.crouch);
        p.joint_rotations[15] = rot_x(52 * kDeg * st.crouch);
        // slight torso lean while crouching or walking
        p.joint_rotations[1] = rot_x(6 * kDeg * st.crouch + 1.5 * kDeg * st.gait_amp * sway *
                                                                std::sin(st.gait_phase));
        // neck pitch for look templates
        p.joint_rotations[2] = rot_x(st.look_pitch);

        // arms: shoulders 4 (right) / 7 (left), elbows 5/8; the rest pose has
        // the arms hanging down; the raised pose puts the wrist in front of
        // the face so it enters the head camera's view
        const Eigen::Matrix3d r_rest = rot_z(-75 * kDeg);
        const Eigen::Matrix3d l_rest = rot_z(75 * kDeg);
        const Eigen::Matrix3d r_raised = rot_y(-95 * kDeg) * rot_z(24 * kDeg);
        const Eigen::Matrix3d l_raised = rot_y(95 * kDeg) * rot_z(-24 * kDeg);
        const double arm_swing = st.gait_amp * 4 * kDeg * std::sin(st.gait_phase);

        auto blend = [](const Eigen::Matrix3d& a, const Eigen::Matrix3d& b, double e_) {
            return Eigen::Matrix3d(a * partial(a.transpose() * b, e_));
        };
        p.joint_rotations[4] = blend(r_rest, r_raised, st.raise_right) * rot_x(-arm_swing);
        p.joint_rotations[7] = blend(l_rest, l_raised, st.raise_left) * rot_x(arm_swing);
        p.joint_rotations[5] = partial(rot_y(-20 * kDeg), st.raise_right);
        p.joint_rotations[8] = partial(rot_y(20 * kDeg), st.raise_left);

        m.frames.push_back(std::move(p));
    }
    m.validate();
    return m;
}

} // namespace egtw::synth
