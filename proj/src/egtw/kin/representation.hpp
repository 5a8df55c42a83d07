#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "egtw/kin/skeleton.hpp"

namespace egtw::kin {

// Named column ranges of a per-frame feature vector, plus the loss-balancing
// group each field belongs to.
struct FeatureField {
    std::string name;
    int offset = 0;
    int width = 0;
    std::string group; // head_3d, head_6d, joint_3d, joint_6d, root, contacts
};

struct FeatureLayout {
    std::vector<FeatureField> fields;
    int width = 0;

    const FeatureField& field(const std::string& name) const;
    std::vector<std::string> groups() const; // unique group names in field order
};

enum class RepresentationKind {
    HeadCentric,
    RootCentric,
};

RepresentationKind representation_from_string(const std::string& s);
std::string to_string(RepresentationKind kind);

// Per-frame tuple, head-anchored:
//   h_r (6)  absolute head rotation          hdot_r (6) frame-to-frame head rotation
//   h_p (3)  absolute head position          hdot_p (3) frame-to-frame head displacement
//   j_p (3(J-1)) non-head joint positions in the current head frame
//   j_v (3(J-1)) non-head joint velocity, expressed in the current head frame
//   j_r (6(J-1)) local rotations of all non-head joints (root slot carries the
//                root orientation)
// Width: 18 + 12(J-1). Frame 0 is normalized: zero translation, identity
// rotation, all first-order features zero.
FeatureLayout head_centric_layout(int joint_count);

// Per-frame tuple, root-anchored with the ground plane XZ and Y up:
//   rdot_a (1) root yaw angular velocity     rdot_xz (2) planar velocity in the yaw frame
//   r_y (1)   root height
//   j_p / j_v (3(J-1)) non-root joints in the yaw-aligned root frame
//   j_r (6(J-1)) local rotations of non-root joints
//   c_f (4)   binary heel/toe contacts
// Width: 4 + 12(J-1) + 4. The codec assumes an upright (yaw-only) root, which
// the synthetic generator guarantees.
FeatureLayout root_centric_layout(int joint_count);

FeatureLayout layout_for(RepresentationKind kind, int joint_count);

struct FeatureSequence {
    RepresentationKind kind = RepresentationKind::HeadCentric;
    int joint_count = 0;
    double fps = 0.0;
    Eigen::MatrixXd features; // frames x layout width

    int frame_count() const { return static_cast<int>(features.rows()); }
    FeatureLayout layout() const { return layout_for(kind, joint_count); }

    Eigen::VectorXd field_row(int frame, const std::string& name) const;
};

// Head-centric codec. Encoding rigidly normalizes the whole sequence by the
// inverse of the frame-0 head pose.
FeatureSequence encode_head_centric(const MotionSequence& m);
MotionSequence decode_head_centric(const FeatureSequence& rep, const Skeleton& skeleton);

// World-space non-head joint positions implied by (h_r, h_p, j_p) alone;
// the FK route over j_r must agree on valid encodings.
std::vector<std::vector<Eigen::Vector3d>> joint_positions_from_head_fields(const FeatureSequence& rep,
                                                                           const Skeleton& skeleton);

// Root-centric codec (the comparison representation).
FeatureSequence encode_root_centric(const MotionSequence& m);
MotionSequence decode_root_centric(const FeatureSequence& rep, const Skeleton& skeleton);

FeatureSequence encode_representation(RepresentationKind kind, const MotionSequence& m);
MotionSequence decode_representation(const FeatureSequence& rep, const Skeleton& skeleton);

// The rigid normalization each representation applies to frame 0, exposed so
// ground truth can be expressed in the same frame as the codec output.
MotionSequence normalize_like_head_centric(const MotionSequence& m);
MotionSequence normalize_like_root_centric(const MotionSequence& m);

// Head pose track (global rotation + position of the head joint) per frame.
struct HeadTrack {
    std::vector<Eigen::Matrix3d> rotation;
    std::vector<Eigen::Vector3d> position;
};
HeadTrack head_track(const MotionSequence& m);

struct ProbeResult {
    double translation_error_m = 0.0; // mean over frames
    double rotation_error_deg = 0.0;  // mean geodesic angle
};

// Error of the cheapest head-pose extraction each representation admits:
// a direct field read for the head-centric features, cumulative velocity
// integration followed by forward kinematics for the root-centric ones.
// `ground_truth` is normalized internally with the representation's own
// frame-0 convention before comparison.
ProbeResult head_pose_probe(const FeatureSequence& rep, const Skeleton& skeleton,
                            const MotionSequence& ground_truth);

} // namespace egtw::kin
