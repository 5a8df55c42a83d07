#pragma once

#include <cstdint>
#include <string>

#include "egtw/core/rng.hpp"
#include "egtw/diffusion/cfg.hpp"
#include "egtw/diffusion/schedule.hpp"

namespace egtw::diffusion {

enum class SampleMode {
    T2VM, // text -> video + motion (joint)
    TM2V, // text + motion -> video
    TV2M, // text + video -> motion
};

SampleMode sample_mode_from_string(const std::string& s);
std::string to_string(SampleMode mode);

struct SamplerConfig {
    SampleMode mode = SampleMode::T2VM;
    int steps = 50;
    std::uint64_t seed = 1;
    GuidanceScales scales;
    bool vanilla_cfg = false; // w/o-AD ablation: text-only guidance at a shared timestep
};

struct SampleConditioning {
    TextCondition text;
    // Full clean latents. TM2V reads the whole motion latent; TV2M the whole
    // video latent; every mode clamps the first latent frame of whatever it
    // generates to these (the I^0 / P^0 inpainting constraint).
    nn::Tensor video_latent_clean;
    nn::Tensor motion_latent_clean;
};

struct SampleResult {
    nn::Tensor video_latent;
    nn::Tensor motion_latent;
};

// Deterministic DDIM-style reverse trajectory on an evenly strided timestep
// grid; the mode's CFG produces the noise estimate each step and the first
// latent frame of each generated modality is re-imposed after every update.
SampleResult reverse_sample(const Denoiser& model, const NoiseSchedule& schedule,
                            const SamplerConfig& config, const SampleConditioning& cond);

} // namespace egtw::diffusion
