#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egtw/synth/camera.hpp"
#include "egtw/synth/scene.hpp"

namespace egtw::synth {

struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {}

    std::uint8_t* pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
    const std::uint8_t* pixel(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }

    bool operator==(const Image& other) const = default;
};

// Deterministic ray-cast rendering of the box scene through a pinhole camera:
// per-pixel nearest hit over floor plane and axis-aligned boxes, flat shading
// by face axis.
Image render_frame(const SceneSpec& scene, const CameraIntrinsics& intrinsics, const CameraPose& pose);

// Hand markers are solid-color discs drawn on top of the scene. A disc is
// drawn iff the wrist center projects strictly in front of the camera and
// inside the image bounds, which makes presence decidable by color mask.
void overlay_hand_marker(Image& img, const CameraIntrinsics& intrinsics, const CameraPose& pose,
                         const Eigen::Vector3d& wrist_world, const Rgb& color);

int count_color_pixels(const Image& img, const Rgb& color);

void write_ppm(const Image& img, const std::string& path);

} // namespace egtw::synth
