#include "egtw/synth/sample.hpp"

#include "egtw/core/error.hpp"
#include "egtw/kin/rotation.hpp"

namespace egtw::synth {

void SampleConfig::validate() const {
    intrinsics.validate();
    if (video_frames < 2) throw ValidationError("sample config: need at least 2 video frames");
    if (motion_fps != 2.0 * video_fps)
        throw ValidationError("sample config: motion fps must be twice the video fps");
}

void Sample::validate(const CameraMount& mount) const {
    motion.validate();
    gt_camera.validate();
    const int n_v = static_cast<int>(video.size()) - 1;
    const int n_m = motion.frame_count() - 1;
    if (n_m != 2 * n_v) throw ValidationError("sample: motion frames must be twice the video frames");
    if (gt_camera.size() != static_cast<int>(video.size()))
        throw ValidationError("sample: one camera pose per video frame required");
    for (int i = 0; i < gt_camera.size(); ++i) {
        const CameraPose head = camera_pose_at(motion, 2 * i, mount);
        if ((gt_camera.poses[static_cast<std::size_t>(i)].rotation - head.rotation).cwiseAbs().maxCoeff() > 1e-9 ||
            (gt_camera.poses[static_cast<std::size_t>(i)].position - head.position).norm() > 1e-9)
            throw ValidationError("sample: gt_camera does not equal head pose * mount");
    }
}

CameraPose camera_pose_at(const kin::MotionSequence& motion, int motion_frame, const CameraMount& mount) {
    const auto fk = kin::forward_kinematics(motion.skeleton, motion.frames.at(static_cast<std::size_t>(motion_frame)));
    const Eigen::Matrix3d& hr = fk.rotation[static_cast<std::size_t>(motion.skeleton.head_index)];
    const Eigen::Vector3d& hp = fk.position[static_cast<std::size_t>(motion.skeleton.head_index)];
    CameraPose pose;
    pose.rotation = hr * mount.rotation;
    pose.position = hp + hr * mount.offset;
    return pose;
}

Sample generate_sample(const SceneSpec& scene, const MotionTemplate& tmpl,
                       const kin::Skeleton& skeleton, const SampleConfig& config,
                       std::uint64_t seed) {
    config.validate();
    scene.validate();

    Sample s;
    s.text = template_text(tmpl.kind, seed);
    s.motion = generate_motion(tmpl, skeleton, config.motion_frames(), config.motion_fps, seed);

    for (int i = 0; i < config.video_frames; ++i) {
        const int mf = 2 * i;
        const CameraPose cam = camera_pose_at(s.motion, mf, config.mount);

        metrics::Se3Trajectory::PoseStamped gt;
        gt.rotation = cam.rotation;
        gt.position = cam.position;
        gt.timestamp = static_cast<double>(i) / config.video_fps;
        s.gt_camera.poses.push_back(gt);

        Image frame = render_frame(scene, config.intrinsics, cam);
        if (config.render_hands) {
            const auto fk = kin::forward_kinematics(skeleton, s.motion.frames[static_cast<std::size_t>(mf)]);
            if (skeleton.left_wrist >= 0)
                overlay_hand_marker(frame, config.intrinsics, cam,
                                    fk.position[static_cast<std::size_t>(skeleton.left_wrist)], kLeftHandColor);
            if (skeleton.right_wrist >= 0)
                overlay_hand_marker(frame, config.intrinsics, cam,
                                    fk.position[static_cast<std::size_t>(skeleton.right_wrist)], kRightHandColor);
        }
        s.video.push_back(std::move(frame));
    }
    s.validate(config.mount);
    return s;
}

} // namespace egtw::synth
