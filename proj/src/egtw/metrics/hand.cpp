#include "egtw/metrics/hand.hpp"

#include "egtw/core/error.hpp"
#include "egtw/synth/sample.hpp"

namespace egtw::metrics {

std::vector<std::array<bool, 2>> hand_visibility(const kin::MotionSequence& motion,
                                                 const synth::CameraIntrinsics& intrinsics,
                                                 const synth::CameraMount& mount) {
    intrinsics.validate();
    const kin::Skeleton& sk = motion.skeleton;
    if (sk.left_wrist < 0 || sk.right_wrist < 0)
        throw ValidationError("hand_visibility: skeleton has no identified wrist joints");

    std::vector<std::array<bool, 2>> out;
    for (int f = 0; f < motion.frame_count(); ++f) {
        const auto fk = kin::forward_kinematics(sk, motion.frames[static_cast<std::size_t>(f)]);
        const synth::CameraPose cam = synth::camera_pose_at(motion, f, mount);
        auto visible = [&](int wrist) {
            const auto px = intrinsics.project(cam.world_to_camera(fk.position[static_cast<std::size_t>(wrist)]));
            return px.has_value() && intrinsics.in_bounds(*px);
        };
        out.push_back({visible(sk.left_wrist), visible(sk.right_wrist)});
    }
    return out;
}

std::vector<std::array<bool, 2>> hand_presence_synthetic(const std::vector<synth::Image>& video,
                                                         int min_pixels) {
    std::vector<std::array<bool, 2>> out;
    for (const auto& frame : video) {
        out.push_back({synth::count_color_pixels(frame, synth::kLeftHandColor) >= min_pixels,
                       synth::count_color_pixels(frame, synth::kRightHandColor) >= min_pixels});
    }
    return out;
}

double hand_score(const HandObservationSequence& observations) {
    if (observations.empty()) throw ValidationError("hand_score: empty observation sequence");
    double sum = 0;
    for (int hand = 0; hand < 2; ++hand) {
        int tp = 0, fp = 0, fn = 0;
        for (const auto& frame : observations) {
            const HandObservation& o = frame[static_cast<std::size_t>(hand)];
            if (o.present_in_video && o.visible_from_head) ++tp;
            else if (o.present_in_video && !o.visible_from_head) ++fp;
            else if (!o.present_in_video && o.visible_from_head) ++fn;
        }
        const int denom = 2 * tp + fp + fn;
        sum += denom == 0 ? 1.0 : 2.0 * tp / denom; // vacuous agreement scores 1
    }
    return sum / 2.0;
}

HandObservationSequence pair_hand_observations(const std::vector<std::array<bool, 2>>& presence,
                                               const std::vector<std::array<bool, 2>>& visibility,
                                               int motion_stride) {
    if (motion_stride < 1) throw ValidationError("pair_hand_observations: bad stride");
    HandObservationSequence out;
    for (std::size_t i = 0; i < presence.size(); ++i) {
        const std::size_t mf = i * static_cast<std::size_t>(motion_stride);
        if (mf >= visibility.size()) throw ValidationError("pair_hand_observations: motion track too short");
        std::array<HandObservation, 2> rec;
        for (int hand = 0; hand < 2; ++hand) {
            rec[static_cast<std::size_t>(hand)].present_in_video = presence[i][static_cast<std::size_t>(hand)];
            rec[static_cast<std::size_t>(hand)].visible_from_head = visibility[mf][static_cast<std::size_t>(hand)];
        }
        out.push_back(rec);
    }
    return out;
}

} // namespace egtw::metrics
