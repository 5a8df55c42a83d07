#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egtw/kin/skeleton.hpp"
#include "egtw/metrics/trajectory.hpp"
#include "egtw/synth/camera.hpp"
#include "egtw/synth/motion_gen.hpp"
#include "egtw/synth/renderer.hpp"
#include "egtw/synth/scene.hpp"

namespace egtw::synth {

// One synchronized text-video-motion triplet with its ground-truth camera
// track. Motion runs at twice the video rate: video frame i corresponds to
// motion frame 2i, and the camera pose there equals head pose * mount.
struct Sample {
    std::string text;
    std::vector<Image> video;          // N_v + 1 frames
    kin::MotionSequence motion;        // N_m + 1 frames, N_m = 2 N_v
    metrics::Se3Trajectory gt_camera;  // one pose per video frame

    void validate(const CameraMount& mount) const;
};

struct SampleConfig {
    CameraIntrinsics intrinsics;   // H = W = 64 by default
    CameraMount mount;             // identity by default
    double video_fps = 2.0;
    double motion_fps = 4.0;
    int video_frames = 11;         // N_v + 1
    bool render_hands = true;

    int motion_frames() const { return 2 * (video_frames - 1) + 1; }
    void validate() const;
};

CameraPose camera_pose_at(const kin::MotionSequence& motion, int motion_frame, const CameraMount& mount);

Sample generate_sample(const SceneSpec& scene, const MotionTemplate& tmpl,
                       const kin::Skeleton& skeleton, const SampleConfig& config,
                       std::uint64_t seed);

} // namespace egtw::synth
