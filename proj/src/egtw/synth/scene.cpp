#include "egtw/synth/scene.hpp"

#include <cmath>
#include <numbers>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::synth {

namespace {

constexpr double kRoomHalf = 4.0;

// Distinct palette; pure green and pure blue are reserved for hand markers.
constexpr Rgb kPalette[] = {
    {200, 60, 60}, {220, 160, 40}, {150, 90, 200}, {60, 170, 170},
    {200, 110, 160}, {120, 130, 40}, {90, 90, 210}, {220, 220, 210},
};

} // namespace

SceneSpec SceneSpec::random(std::uint64_t seed) {
    Rng rng(seed);
    SceneSpec s;
    s.seed = seed;
    const int count = static_cast<int>(rng.uniform_int(6, 9));
    for (int i = 0; i < count; ++i) {
        Box b;
        // ring placement: boxes surround the actor so every view direction sees
        // different content
        const double ang = rng.uniform(0, 2 * std::numbers::pi);
        const double radius = rng.uniform(1.8, 3.4);
        const double sx = rng.uniform(0.15, 0.5);
        const double sy = rng.uniform(0.2, 0.8);
        const double sz = rng.uniform(0.15, 0.5);
        const bool floating = rng.uniform() < 0.3;
        const double cy = floating ? rng.uniform(1.2, 2.0) : sy;
        b.center = {radius * std::sin(ang), cy, radius * std::cos(ang)};
        b.half_size = {sx, sy, sz};
        b.color = kPalette[static_cast<std::size_t>(rng.uniform_int(0, 7))];
        s.boxes.push_back(b);
    }
    s.validate();
    return s;
}

void SceneSpec::validate() const {
    for (const auto& b : boxes) {
        if ((b.half_size.array() <= 0).any()) throw ValidationError("scene: box with non-positive size");
        if (b.center.cwiseAbs().maxCoeff() > kRoomHalf + 2.0)
            throw ValidationError("scene: box outside the bounded room");
    }
}

} // namespace egtw::synth
