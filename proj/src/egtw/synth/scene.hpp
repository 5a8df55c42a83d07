#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

namespace egtw::synth {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kLeftHandColor = {0, 255, 0};
constexpr Rgb kRightHandColor = {0, 0, 255};

struct Box {
    Eigen::Vector3d center;
    Eigen::Vector3d half_size;
    Rgb color;
};

// Axis-aligned colored boxes in a bounded room plus a floor plane at y = 0.
// The seed fully determines the scene.
struct SceneSpec {
    std::vector<Box> boxes;
    Rgb floor_color = {96, 112, 88};
    Rgb background_color = {168, 196, 220};
    std::uint64_t seed = 0;

    static SceneSpec random(std::uint64_t seed);
    void validate() const;
};

} // namespace egtw::synth
