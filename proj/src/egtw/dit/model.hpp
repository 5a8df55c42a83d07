#pragma once

#include <optional>
#include <string>

#include "egtw/dit/config.hpp"
#include "egtw/dit/mask.hpp"
#include "egtw/nn/params.hpp"

namespace egtw::dit {

struct DitInput {
    std::vector<int> text_ids; // length text_len, padded
    int text_valid = 0;        // non-pad prefix length (0 allowed only with text_null)
    bool text_null = false;    // replace the text sequence with the learned null embedding

    nn::Tensor video_tokens;   // (L_v, patch^2 * C_v) noisy latent tokens; empty => video absent
    nn::Tensor motion_latent;  // (F_m, C_m) noisy motion latents; empty => motion absent

    TokenLayout layout;
    int t_video = 0;
    int t_motion = 0;
};

struct DitForward {
    nn::Var video_eps;  // (L_v, patch^2 * C_v) or null
    nn::Var motion_eps; // (F_m, C_m) or null
};

// Triple-branch diffusion transformer. Text and video branches share all
// non-AdaLN weights; the motion branch runs at motion_width for the lower
// motion_layers() layers and exits through its own head. Joint attention
// concatenates all present modalities at the shared width under the given
// interaction mask (plus the text padding overlay).
class DitModel {
public:
    DitModel(DitConfig config, std::uint64_t init_seed);

    DitForward forward(const DitInput& input, const nn::AttentionMask& interaction) const;

    // name predicates used by the stage freezers and no-dead-parameter checks
    static bool is_motion_branch_param(const std::string& name);
    static bool is_text_branch_param(const std::string& name);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const DitConfig& config() const { return config_; }

private:
    DitConfig config_;
    nn::ParamStore params_;

    struct Modulation {
        nn::Var scale_msa, shift_msa, gate_msa, scale_mlp, shift_mlp, gate_mlp;
    };
    Modulation modulation(const nn::Var& y, const std::string& name, int width) const;
    nn::Var timestep_embedding(int t_video, int t_motion) const;
};

} // namespace egtw::dit
