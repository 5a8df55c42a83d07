#include "egtw/diffusion/dit_denoiser.hpp"

#include "egtw/core/error.hpp"
#include "egtw/dit/tokenizers.hpp"

namespace egtw::diffusion {

DitDenoiser::DitDenoiser(const dit::DitModel& model, dit::TokenLayout full_layout, bool no_mask)
    : model_(model), full_layout_(full_layout) {
    full_layout_.validate();
    if (full_layout_.video_frames < 1 || full_layout_.motion_len < 1)
        throw ConfigError("denoiser: the full layout needs both video and motion tokens");
    full_mask_ = no_mask ? dit::full_attention_mask(full_layout_) : dit::build_interaction_mask(full_layout_);
    motion_only_layout_ = full_layout_;
    motion_only_layout_.video_frames = 0;
    motion_only_layout_.grid_h = motion_only_layout_.grid_w = 0;
    motion_only_mask_ = dit::full_attention_mask(motion_only_layout_);
    h8_ = full_layout.grid_h * model_.config().patch;
    w8_ = full_layout.grid_w * model_.config().patch;
}

DenoisePrediction DitDenoiser::predict(const DenoiseRequest& request) const {
    const bool with_video = request.video_latent.numel() > 0;
    dit::DitInput input;
    input.layout = with_video ? full_layout_ : motion_only_layout_;
    input.t_video = request.t_video;
    input.t_motion = request.t_motion;
    input.text_null = request.text_null;
    if (!request.text_null) {
        input.text_ids = request.text.ids;
        input.text_valid = request.text.valid;
    }
    if (with_video) input.video_tokens = dit::patchify(request.video_latent, model_.config().patch);
    input.motion_latent = request.motion_latent;

    const dit::DitForward fwd =
        model_.forward(input, with_video ? full_mask_ : motion_only_mask_);

    DenoisePrediction out;
    if (fwd.video_eps)
        out.video_eps = dit::unpatchify(fwd.video_eps->value, full_layout_.video_frames, h8_, w8_,
                                        model_.config().video_channels, model_.config().patch);
    if (fwd.motion_eps) out.motion_eps = fwd.motion_eps->value;
    return out;
}

} // namespace egtw::diffusion
