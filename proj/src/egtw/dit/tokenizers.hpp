#pragma once

#include <vector>

#include "egtw/nn/tensor.hpp"
#include "egtw/synth/renderer.hpp"

namespace egtw::dit {

// Identity video tokenizer: 8x spatial average pooling into [-1, 1] RGB
// latents with the causal 4x temporal grouping (latent frame 0 = frame 0,
// latent l >= 1 = mean of frames 4(l-1)+1 .. 4l, trailing group may be
// partial). The decode path upsamples by replication; it is lossy by design.
nn::Tensor video_to_latent(const std::vector<synth::Image>& frames);
std::vector<synth::Image> latent_to_video(const nn::Tensor& latent, int raw_frame_count);

int video_latent_frames(int raw_frame_count); // ceil(N_v / 4) + 1

// Patchify a (F, H8, W8, C) latent into (F * gh * gw, patch * patch * C)
// tokens and back.
nn::Tensor patchify(const nn::Tensor& latent, int patch);
nn::Tensor unpatchify(const nn::Tensor& tokens, int frames, int h8, int w8, int channels, int patch);

} // namespace egtw::dit
