#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "egtw/kin/skeleton.hpp"

namespace egtw {
class ChunkMap;
}

namespace egtw::metrics {

// Timestamped sequence of rigid poses, used for both camera and head tracks.
struct Se3Trajectory {
    struct PoseStamped {
        Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
        Eigen::Vector3d position = Eigen::Vector3d::Zero();
        double timestamp = 0.0;
    };
    std::vector<PoseStamped> poses;

    int size() const { return static_cast<int>(poses.size()); }
    void validate() const; // orthonormal rotations, strictly increasing timestamps
};

void trajectory_to_chunks(const Se3Trajectory& t, egtw::ChunkMap& map, const std::string& prefix);
Se3Trajectory trajectory_from_chunks(const egtw::ChunkMap& map, const std::string& prefix);

nlohmann::json trajectory_to_json(const Se3Trajectory& t);
Se3Trajectory trajectory_from_json(const nlohmann::json& j);

struct AlignmentResult {
    Se3Trajectory aligned;
    double scale = 1.0;
    bool degenerate = false; // all camera positions identical; scale left at 1
};

// First-frame alignment followed by the closed-form least-squares scale about
// the shared first position:
//   s* = sum <c_i - c_0, h_i - h_0> / sum ||c_i - c_0||^2
AlignmentResult align_trajectories(const Se3Trajectory& cam, const Se3Trajectory& head);

// Mean Euclidean distance between corresponding positions, meters.
double trans_err(const Se3Trajectory& aligned_cam, const Se3Trajectory& head);

// Mean geodesic angle between corresponding orientations, degrees.
double rot_err(const Se3Trajectory& aligned_cam, const Se3Trajectory& head);

// Head-joint track composed with the camera mount, sampled at the motion
// frames `frame_stride` apart (video frames align with even motion frames).
Se3Trajectory head_camera_trajectory(const kin::MotionSequence& motion,
                                     const Eigen::Matrix3d& mount_rotation,
                                     const Eigen::Vector3d& mount_offset,
                                     int frame_stride);

} // namespace egtw::metrics
