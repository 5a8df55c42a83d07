#include "egtw/synth/camera.hpp"

#include "egtw/core/error.hpp"

namespace egtw::synth {

void CameraIntrinsics::validate() const {
    if (fx <= 0 || fy <= 0) throw ValidationError("intrinsics: focal lengths must be positive");
    if (width <= 0 || height <= 0) throw ValidationError("intrinsics: image size must be positive");
    if (cx < 0 || cx >= width || cy < 0 || cy >= height)
        throw ValidationError("intrinsics: principal point outside the image");
}

std::optional<Eigen::Vector2d> CameraIntrinsics::project(const Eigen::Vector3d& p) const {
    if (p.z() <= 0.0) return std::nullopt;
    return Eigen::Vector2d(fx * p.x() / p.z() + cx, fy * p.y() / p.z() + cy);
}

bool CameraIntrinsics::in_bounds(const Eigen::Vector2d& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
}

nlohmann::json CameraIntrinsics::to_json() const {
    return {{"fx", fx}, {"fy", fy}, {"cx", cx}, {"cy", cy}, {"width", width}, {"height", height}};
}

CameraIntrinsics CameraIntrinsics::from_json(const nlohmann::json& j) {
    CameraIntrinsics c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    c.validate();
    return c;
}

} // namespace egtw::synth
