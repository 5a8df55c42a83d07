#pragma once

#include "egtw/diffusion/denoiser.hpp"
#include "egtw/dit/mask.hpp"
#include "egtw/dit/model.hpp"

namespace egtw::diffusion {

// Inference adapter: patchifies video latents into tokens, runs the
// transformer under the prebuilt interaction mask and unpatchifies the video
// noise estimate back to latent shape.
class DitDenoiser : public Denoiser {
public:
    DitDenoiser(const dit::DitModel& model, dit::TokenLayout full_layout, bool no_mask);

    DenoisePrediction predict(const DenoiseRequest& request) const override;

    const nn::AttentionMask& full_mask() const { return full_mask_; }

private:
    const dit::DitModel& model_;
    dit::TokenLayout full_layout_;
    nn::AttentionMask full_mask_;
    dit::TokenLayout motion_only_layout_;
    nn::AttentionMask motion_only_mask_;
    int h8_ = 0, w8_ = 0;
};

} // namespace egtw::diffusion
