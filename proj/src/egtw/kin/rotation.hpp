#pragma once

#include <Eigen/Dense>
#include <array>

namespace egtw::kin {

// Continuous 6D rotation parameterization: the first two columns of the
// rotation matrix, stored as (col0.x, col0.y, col0.z, col1.x, col1.y, col1.z).
// Identity encodes as (1,0,0,0,1,0).
struct Rotation6D {
    std::array<double, 6> v{1, 0, 0, 0, 1, 0};

    Eigen::Vector3d col0() const { return {v[0], v[1], v[2]}; }
    Eigen::Vector3d col1() const { return {v[3], v[4], v[5]}; }
};

// Gram-Schmidt recovery. Throws DegenerateRotationError when the columns are
// near-zero or near-parallel (norm of either orthogonalized column <= 1e-8).
Eigen::Matrix3d rot6d_to_matrix(const Rotation6D& r);

// Throws ValidationError if m is not orthonormal with det +1 within 1e-6.
Rotation6D matrix_to_rot6d(const Eigen::Matrix3d& m);

bool is_rotation_matrix(const Eigen::Matrix3d& m, double tol = 1e-6);

// Geodesic angle between two rotations, degrees. Trace is clamped to [-1, 3].
double rotation_angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

Eigen::Matrix3d rot_x(double radians);
Eigen::Matrix3d rot_y(double radians);
Eigen::Matrix3d rot_z(double radians);

// Yaw of the rotated +Z (forward) axis projected onto the ground plane,
// measured as atan2(f.x, f.z) with Y up.
double yaw_of(const Eigen::Matrix3d& r);

double wrap_angle(double radians); // to (-pi, pi]

} // namespace egtw::kin
