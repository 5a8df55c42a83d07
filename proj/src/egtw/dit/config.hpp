#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

namespace egtw::dit {

// Triple-branch transformer configuration. The motion branch spans the lower
// half of the layers (motion_layers_override is a test/ablation hook) and runs
// at a reduced width; text and video share all non-AdaLN weights.
struct DitConfig {
    int width = 32;           // D: shared attention width
    int motion_width = 16;    // D_m
    int text_width = 32;      // D_t
    int video_width = 32;     // D_v
    int layers = 4;           // text/video depth
    int heads = 2;
    int patch = 4;            // spatial patch over the 8x-downsampled latent grid
    int text_len = 8;         // L_t
    int video_channels = 3;   // C_v
    int motion_channels = 16; // C_m
    int mlp_ratio = 2;
    int time_embed_dim = 32;  // sinusoidal width per timestep
    int vocab_size = 0;
    int motion_layers_override = -1; // -1: layers / 2

    int motion_layers() const { return motion_layers_override >= 0 ? motion_layers_override : layers / 2; }
    int video_token_dim() const { return patch * patch * video_channels; }

    void validate() const;
    nlohmann::json to_json() const;
    static DitConfig from_json(const nlohmann::json& j);
};

// Contiguous token ranges over the concatenated [text | video | motion]
// sequence, with per-video-token (latent frame, row, col) coordinates.
struct TokenLayout {
    int text_len = 0;
    int video_frames = 0; // latent frames; 0 when the video branch is absent
    int grid_h = 0;
    int grid_w = 0;
    int motion_len = 0;   // motion latent frames; 0 when absent

    int video_tokens() const { return video_frames * grid_h * grid_w; }
    int total_tokens() const { return text_len + video_tokens() + motion_len; }
    int text_begin() const { return 0; }
    int video_begin() const { return text_len; }
    int motion_begin() const { return text_len + video_tokens(); }

    int video_latent_frame(int video_token_index) const { return video_token_index / (grid_h * grid_w); }
    std::array<int, 3> video_position(int video_token_index) const;

    void validate() const;
};

} // namespace egtw::dit
