#include "egtw/kin/rotation.hpp"

#include <cmath>
#include <numbers>

#include "egtw/core/error.hpp"

namespace egtw::kin {

Eigen::Matrix3d rot6d_to_matrix(const Rotation6D& r) {
    const Eigen::Vector3d a = r.col0();
    const Eigen::Vector3d b = r.col1();
    const double na = a.norm();
    if (na <= 1e-8) throw DegenerateRotationError("6D rotation: first column has near-zero norm");
    const Eigen::Vector3d c0 = a / na;
    const Eigen::Vector3d b_orth = b - c0.dot(b) * c0;
    const double nb = b_orth.norm();
    if (nb <= 1e-8) throw DegenerateRotationError("6D rotation: columns are near-parallel");
    const Eigen::Vector3d c1 = b_orth / nb;
    const Eigen::Vector3d c2 = c0.cross(c1);
    Eigen::Matrix3d m;
    m.col(0) = c0;
    m.col(1) = c1;
    m.col(2) = c2;
    return m;
}

bool is_rotation_matrix(const Eigen::Matrix3d& m, double tol) {
    const Eigen::Matrix3d e = m.transpose() * m - Eigen::Matrix3d::Identity();
    return e.cwiseAbs().maxCoeff() <= tol && m.determinant() > 0.0;
}

Rotation6D matrix_to_rot6d(const Eigen::Matrix3d& m) {
    if (!is_rotation_matrix(m)) throw ValidationError("matrix_to_rot6d: input is not a rotation matrix");
    Rotation6D r;
    r.v = {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
    return r;
}

double rotation_angle_deg(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
    const double tr = std::clamp((a.transpose() * b).trace(), -1.0, 3.0);
    const double c = std::clamp((tr - 1.0) / 2.0, -1.0, 1.0);
    return std::acos(c) * 180.0 / std::numbers::pi;
}

Eigen::Matrix3d rot_x(double t) {
    Eigen::Matrix3d m;
    m << 1, 0, 0,
         0, std::cos(t), -std::sin(t),
         0, std::sin(t), std::cos(t);
    return m;
}

Eigen::Matrix3d rot_y(double t) {
    Eigen::Matrix3d m;
    m << std::cos(t), 0, std::sin(t),
         0, 1, 0,
         -std::sin(t), 0, std::cos(t);
    return m;
}

Eigen::Matrix3d rot_z(double t) {
    Eigen::Matrix3d m;
    m << std::cos(t), -std::sin(t), 0,
         std::sin(t), std::cos(t), 0,
         0, 0, 1;
    return m;
}

double yaw_of(const Eigen::Matrix3d& r) {
    const Eigen::Vector3d f = r.col(2); // rotated +Z
    return std::atan2(f.x(), f.z());
}

double wrap_angle(double a) {
    const double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a > std::numbers::pi) a -= two_pi;
    if (a <= -std::numbers::pi) a += two_pi;
    return a;
}

} // namespace egtw::kin
