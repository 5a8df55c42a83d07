#pragma once

#include <string>

#include "egtw/dit/config.hpp"
#include "egtw/nn/autodiff.hpp"

namespace egtw::dit {

// Attention-permission matrix over the concatenated token sequence.
//
// Video and motion latent frames are mapped back to raw frames: video latent
// l_v covers observations O^{c(l_v-1)+1 .. c*l_v} (latent 0 covers O^0, the
// trailing group may be partial), motion latent l_m covers the chunked actions
// A^i whose pose frames (P^{2i+1}, P^{2i+2}) fall in raw motion frames
// c(l_m-1)+1 .. c*l_m (latent 0 holds the initial pose). Forward dynamics lets
// video tokens of O^i attend motion tokens of A^{i-1}; inverse dynamics lets
// motion tokens of A^i attend video tokens of O^i and O^{i+1}; the initial
// observation and pose attend each other bilaterally. Everything intra-modal
// and everything involving text stays permitted. All spatial tokens of a video
// latent frame share its permission row.
nn::AttentionMask build_interaction_mask(const TokenLayout& layout, int compression = 4, int rate_ratio = 2);

// The w/o-IM ablation: full attention.
nn::AttentionMask full_attention_mask(const TokenLayout& layout);

// Padded text tokens are removed as keys for every other query (they keep a
// self-loop so their rows stay normalizable).
void apply_text_padding(nn::AttentionMask& mask, const TokenLayout& layout, int valid_text_len);

void dump_mask_csv(const nn::AttentionMask& mask, const std::string& path);
void dump_mask_pgm(const nn::AttentionMask& mask, const std::string& path);

} // namespace egtw::dit
