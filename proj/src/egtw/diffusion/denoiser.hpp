#pragma once

#include <vector>

#include "egtw/nn/tensor.hpp"

namespace egtw::diffusion {

struct TextCondition {
    std::vector<int> ids;
    int valid = 0;
};

struct DenoiseRequest {
    nn::Tensor video_latent;  // (F_v, H8, W8, C_v); empty => no video tokens
    nn::Tensor motion_latent; // (F_m, C_m); empty => no motion tokens
    int t_video = 0;
    int t_motion = 0;
    TextCondition text;
    bool text_null = false; // use the learned null embedding instead of text
};

struct DenoisePrediction {
    nn::Tensor video_eps;  // latent-shaped
    nn::Tensor motion_eps; // (F_m, C_m)
};

// Joint noise predictor: the CFG combiners and the reverse sampler only see
// this surface, so stub models can drive the algebra tests.
class Denoiser {
public:
    virtual ~Denoiser() = default;
    virtual DenoisePrediction predict(const DenoiseRequest& request) const = 0;
};

} // namespace egtw::diffusion
