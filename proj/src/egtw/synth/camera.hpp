#pragma once

#include <Eigen/Dense>
#include <optional>

#include <json.hpp>

namespace egtw::synth {

// Pinhole model. Camera frame: +Z forward; pixel u grows with +X, v with +Y.
// Under the identity head mount, +X is the wearer's right and +Y is up.
struct CameraIntrinsics {
    double fx = 64.0;
    double fy = 64.0;
    double cx = 32.0;
    double cy = 32.0;
    int width = 64;
    int height = 64;

    void validate() const;

    // Pixel coordinates of a camera-frame point; empty when the point is not
    // strictly in front of the camera (z <= 0).
    std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& p_cam) const;
    bool in_bounds(const Eigen::Vector2d& px) const;

    nlohmann::json to_json() const;
    static CameraIntrinsics from_json(const nlohmann::json& j);
};

// World pose of a camera: rotation columns are the camera axes in world space.
struct CameraPose {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d position = Eigen::Vector3d::Zero();

    Eigen::Vector3d world_to_camera(const Eigen::Vector3d& p_world) const {
        return rotation.transpose() * (p_world - position);
    }
};

// Rigid transform from the head joint frame to the camera frame.
struct CameraMount {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

} // namespace egtw::synth
