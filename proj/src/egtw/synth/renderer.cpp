#include "egtw/synth/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "egtw/core/error.hpp"

namespace egtw::synth {

namespace {

constexpr double kNear = 0.02;

struct Hit {
    double t = std::numeric_limits<double>::infinity();
    Rgb color{};
    int axis = -1; // normal axis for flat shading, -1 = floor
};

// Slab intersection against an axis-aligned box; returns the entry distance
// and the axis of the entered face.
bool intersect_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const Box& box,
                   double& t_hit, int& axis_hit) {
    double t0 = kNear, t1 = std::numeric_limits<double>::infinity();
    int axis = -1;
    for (int a = 0; a < 3; ++a) {
        const double lo = box.center[a] - box.half_size[a];
        const double hi = box.center[a] + box.half_size[a];
        if (std::abs(dir[a]) < 1e-12) {
            if (origin[a] < lo || origin[a] > hi) return false;
            continue;
        }
        double ta = (lo - origin[a]) / dir[a];
        double tb = (hi - origin[a]) / dir[a];
        if (ta > tb) std::swap(ta, tb);
        if (ta > t0) {
            t0 = ta;
            axis = a;
        }
        t1 = std::min(t1, tb);
        if (t0 > t1) return false;
    }
    if (axis < 0) return false; // origin inside the box; skip (no entry face)
    t_hit = t0;
    axis_hit = axis;
    return true;
}

Rgb shade(const Rgb& base, int axis) {
    // simple per-axis factor so box faces are distinguishable
    const double f = axis == 0 ? 0.85 : axis == 2 ? 0.7 : 1.0;
    Rgb out;
    for (int i = 0; i < 3; ++i)
        out[static_cast<std::size_t>(i)] =
            static_cast<std::uint8_t>(std::lround(base[static_cast<std::size_t>(i)] * f));
    return out;
}

} // namespace

Image render_frame(const SceneSpec& scene, const CameraIntrinsics& intrinsics, const CameraPose& pose) {
    intrinsics.validate();
    Image img(intrinsics.width, intrinsics.height);
    for (int y = 0; y < intrinsics.height; ++y) {
        for (int x = 0; x < intrinsics.width; ++x) {
            const Eigen::Vector3d dir_cam((x + 0.5 - intrinsics.cx) / intrinsics.fx,
                                          (y + 0.5 - intrinsics.cy) / intrinsics.fy, 1.0);
            const Eigen::Vector3d dir = (pose.rotation * dir_cam).normalized();

            Hit best;
            // floor plane y = 0
            if (std::abs(dir.y()) > 1e-12) {
                const double t = -pose.position.y() / dir.y();
                if (t > kNear) {
                    best.t = t;
                    best.color = scene.floor_color;
                }
            }
            for (const auto& box : scene.boxes) {
                double t;
                int axis;
                if (intersect_box(pose.position, dir, box, t, axis) && t < best.t) {
                    best.t = t;
                    best.color = shade(box.color, axis);
                    best.axis = axis;
                }
            }
            const Rgb color = std::isfinite(best.t) ? best.color : scene.background_color;
            std::uint8_t* px = img.pixel(x, y);
            px[0] = color[0];
            px[1] = color[1];
            px[2] = color[2];
        }
    }
    return img;
}

void overlay_hand_marker(Image& img, const CameraIntrinsics& intrinsics, const CameraPose& pose,
                         const Eigen::Vector3d& wrist_world, const Rgb& color) {
    const Eigen::Vector3d p_cam = pose.world_to_camera(wrist_world);
    const auto px = intrinsics.project(p_cam);
    if (!px || !intrinsics.in_bounds(*px)) return;

    // marker radius ~5 cm sphere; clamped so the disc always covers enough
    // pixels for the color-mask detector even at the image corners
    const double radius = std::clamp(intrinsics.fx * 0.05 / p_cam.z(), 2.5, 12.0);
    const int x0 = std::max(0, static_cast<int>(std::floor(px->x() - radius)));
    const int x1 = std::min(img.width - 1, static_cast<int>(std::ceil(px->x() + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(px->y() - radius)));
    const int y1 = std::min(img.height - 1, static_cast<int>(std::ceil(px->y() + radius)));
    for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
            const double dx = x + 0.5 - px->x();
            const double dy = y + 0.5 - px->y();
            if (dx * dx + dy * dy <= radius * radius) {
                std::uint8_t* p = img.pixel(x, y);
                p[0] = color[0];
                p[1] = color[1];
                p[2] = color[2];
            }
        }
    }
}

int count_color_pixels(const Image& img, const Rgb& color) {
    int count = 0;
    for (std::size_t i = 0; i + 2 < img.rgb.size(); i += 3)
        if (img.rgb[i] == color[0] && img.rgb[i + 1] == color[1] && img.rgb[i + 2] == color[2]) ++count;
    return count;
}

void write_ppm(const Image& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open for writing: " + path);
    os << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    // stored v grows upward; PPM rows go top-down, so flip for natural viewing
    for (int y = img.height - 1; y >= 0; --y)
        os.write(reinterpret_cast<const char*>(img.pixel(0, y)), static_cast<std::streamsize>(img.width) * 3);
}

} // namespace egtw::synth
