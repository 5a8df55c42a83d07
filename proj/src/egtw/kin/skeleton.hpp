#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace egtw {
class ChunkMap;
}

namespace egtw::kin {

// Rigid skeleton tree. Joint 0 is the root; offsets are bone vectors in the
// parent frame, meters. The named joint indices (head, wrists, contact joints)
// are consumed by the representation codecs, the renderer and the metrics.
struct Skeleton {
    int joint_count = 0;
    std::vector<int> parent;               // parent[0] == -1
    std::vector<Eigen::Vector3d> offset;   // offset[0] unused (root position comes from the pose)
    int head_index = -1;
    int left_wrist = -1;
    int right_wrist = -1;
    std::vector<int> contact_joints;       // heel/toe joints for foot contacts (4 entries)

    void validate() const; // throws ValidationError

    nlohmann::json to_json() const;
    static Skeleton from_json(const nlohmann::json& j);
};

struct Pose {
    Eigen::Matrix3d root_rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d root_position = Eigen::Vector3d::Zero();
    std::vector<Eigen::Matrix3d> joint_rotations; // local, size J; entry 0 must stay identity

    void validate(int joint_count) const;
};

struct MotionSequence {
    Skeleton skeleton;
    std::vector<Pose> frames; // length N_m + 1, at least 2
    double fps = 0.0;

    int frame_count() const { return static_cast<int>(frames.size()); }
    void validate() const;

    nlohmann::json to_json() const;
    static MotionSequence from_json(const nlohmann::json& j);
};

// Global transforms for every joint of one pose.
struct JointTransforms {
    std::vector<Eigen::Matrix3d> rotation;
    std::vector<Eigen::Vector3d> position;
};

// global(j) = global(parent(j)) * (offset_j, local_rotation_j); the root global
// transform is (root_rotation, root_position).
JointTransforms forward_kinematics(const Skeleton& skeleton, const Pose& pose);

void skeleton_to_chunks(const Skeleton& s, egtw::ChunkMap& map, const std::string& prefix);
Skeleton skeleton_from_chunks(const egtw::ChunkMap& map, const std::string& prefix);

void motion_to_chunks(const MotionSequence& m, egtw::ChunkMap& map, const std::string& prefix);
// Skeleton is read from the same prefix unless `shared_skeleton` is provided.
MotionSequence motion_from_chunks(const egtw::ChunkMap& map, const std::string& prefix,
                                  const Skeleton* shared_skeleton = nullptr);

void save_motion_file(const MotionSequence& m, const std::string& path);
MotionSequence load_motion_file(const std::string& path);

// Deterministic random-but-valid motion for round-trip and property tests.
MotionSequence random_motion(const Skeleton& skeleton, int frame_count, double fps, std::uint64_t seed);

// A small humanoid used across tests and the synthetic data generator.
Skeleton toy_humanoid();

} // namespace egtw::kin
