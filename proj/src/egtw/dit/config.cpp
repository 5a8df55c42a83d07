#include "egtw/dit/config.hpp"

#include "egtw/core/error.hpp"

namespace egtw::dit {

void DitConfig::validate() const {
    if (width <= 0 || motion_width <= 0 || text_width <= 0 || video_width <= 0)
        throw ConfigError("dit: widths must be positive");
    if (width % heads != 0) throw ConfigError("dit: width must be divisible by heads");
    if ((width / heads) % 2 != 0) throw ConfigError("dit: head dim must be even (rotary pairs)");
    if (layers < 1) throw ConfigError("dit: at least one layer");
    if (motion_layers() < 1 || motion_layers() > layers)
        throw ConfigError("dit: motion branch depth out of range");
    if (patch < 1 || text_len < 1 || video_channels < 1 || motion_channels < 1)
        throw ConfigError("dit: token dimensions must be positive");
    if (time_embed_dim % 2 != 0) throw ConfigError("dit: time embed dim must be even");
    if (vocab_size < 2) throw ConfigError("dit: vocabulary unset");
}

nlohmann::json DitConfig::to_json() const {
    return {{"width", width},
            {"motion_width", motion_width},
            {"text_width", text_width},
            {"video_width", video_width},
            {"layers", layers},
            {"heads", heads},
            {"patch", patch},
            {"text_len", text_len},
            {"video_channels", video_channels},
            {"motion_channels", motion_channels},
            {"mlp_ratio", mlp_ratio},
            {"time_embed_dim", time_embed_dim},
            {"vocab_size", vocab_size},
            {"motion_layers_override", motion_layers_override}};
}

DitConfig DitConfig::from_json(const nlohmann::json& j) {
    DitConfig c;
    c.width = j.value("width", c.width);
    c.motion_width = j.value("motion_width", c.motion_width);
    c.text_width = j.value("text_width", c.text_width);
    c.video_width = j.value("video_width", c.video_width);
    c.layers = j.value("layers", c.layers);
    c.heads = j.value("heads", c.heads);
    c.patch = j.value("patch", c.patch);
    c.text_len = j.value("text_len", c.text_len);
    c.video_channels = j.value("video_channels", c.video_channels);
    c.motion_channels = j.value("motion_channels", c.motion_channels);
    c.mlp_ratio = j.value("mlp_ratio", c.mlp_ratio);
    c.time_embed_dim = j.value("time_embed_dim", c.time_embed_dim);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    c.motion_layers_override = j.value("motion_layers_override", c.motion_layers_override);
    return c;
}

std::array<int, 3> TokenLayout::video_position(int idx) const {
    const int per_frame = grid_h * grid_w;
    const int f = idx / per_frame;
    const int rem = idx % per_frame;
    return {f, rem / grid_w, rem % grid_w};
}

void TokenLayout::validate() const {
    if (text_len < 1) throw ValidationError("layout: text tokens required");
    if (video_frames < 0 || motion_len < 0) throw ValidationError("layout: negative counts");
    if (video_frames > 0 && (grid_h < 1 || grid_w < 1))
        throw ValidationError("layout: video grid unset");
}

} // namespace egtw::dit
