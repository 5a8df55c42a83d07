#pragma once

#include <vector>

#include "egtw/kin/skeleton.hpp"
#include "egtw/synth/camera.hpp"
#include "egtw/synth/renderer.hpp"

namespace egtw::metrics {

enum class Hand { Left = 0, Right = 1 };

// One record per (frame, hand): seen in the video vs geometrically visible
// from the head-mounted camera.
struct HandObservation {
    bool present_in_video = false;
    bool visible_from_head = false;
};

using HandObservationSequence = std::vector<std::array<HandObservation, 2>>;

// Wrist-joint projection through the head camera: visible iff the depth is
// positive and the pixel lands inside the image.
std::vector<std::array<bool, 2>> hand_visibility(const kin::MotionSequence& motion,
                                                 const synth::CameraIntrinsics& intrinsics,
                                                 const synth::CameraMount& mount);

// Color-mask presence detector for synthetic videos with colored hand markers:
// present iff at least `min_pixels` pixels match the marker color exactly.
std::vector<std::array<bool, 2>> hand_presence_synthetic(const std::vector<synth::Image>& video,
                                                         int min_pixels = 4);

// Mean per-hand F-score. TP = present && visible, FP = present && !visible,
// FN = !present && visible; a hand with no positives at all scores a vacuous
// F of 1 (perfect agreement about absence).
double hand_score(const HandObservationSequence& observations);

// Pair video frame i with motion frame stride*i (the rates are an exact 2x).
HandObservationSequence pair_hand_observations(const std::vector<std::array<bool, 2>>& presence,
                                               const std::vector<std::array<bool, 2>>& visibility,
                                               int motion_stride);

} // namespace egtw::metrics
