#include "egtw/dit/model.hpp"

#include <cmath>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::dit {

using nn::Var;

namespace {

double fan_in_std(int fan_in) {
    return 1.0 / std::sqrt(static_cast<double>(fan_in));
}

} // namespace

DitModel::DitModel(DitConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
    config_.validate();
    Rng rng(init_seed);
    const int D = config_.width;
    const int Dm = config_.motion_width;
    const int Dt = config_.text_width;
    const int Dv = config_.video_width;
    const int Vd = config_.video_token_dim();
    const int Cm = config_.motion_channels;

    auto lin = [&](const std::string& name, int cin, int cout, double stddev = -1.0) {
        params_.create_randn(name + ".w", {cin, cout}, rng, stddev > 0 ? stddev : fan_in_std(cin));
        params_.create_zeros(name + ".b", {cout});
    };

    params_.create_randn("text.embed", {config_.vocab_size, Dt}, rng, 0.1);
    params_.create_randn("text.null", {1, Dt}, rng, 0.02);
    lin("text.proj", Dt, D);
    lin("video.embed", Vd, Dv);
    lin("video.proj", Dv, D);
    lin("motion.embed", Cm, Dm);

    lin("time.mlp1", 2 * config_.time_embed_dim, D);
    lin("time.mlp2", D, D);

    for (int l = 0; l < config_.layers; ++l) {
        const std::string p = "block" + std::to_string(l);
        lin(p + ".tv.qkv", D, 3 * D);
        lin(p + ".tv.out", D, D);
        lin(p + ".tv.mlp1", D, config_.mlp_ratio * D);
        lin(p + ".tv.mlp2", config_.mlp_ratio * D, D);
        lin(p + ".ada_text", D, 6 * D, 0.02);
        lin(p + ".ada_video", D, 6 * D, 0.02);
        if (l < config_.motion_layers()) {
            lin(p + ".m.qkv", Dm, 3 * D);
            lin(p + ".m.out", D, Dm);
            lin(p + ".m.mlp1", Dm, config_.mlp_ratio * Dm);
            lin(p + ".m.mlp2", config_.mlp_ratio * Dm, Dm);
            lin(p + ".ada_motion", D, 6 * Dm, 0.02);
        }
    }

    lin("video.final.ada", D, 2 * D, 0.02);
    lin("video.final", D, Vd);
    lin("motion.final.ada", D, 2 * Dm, 0.02);
    lin("motion.final", Dm, Cm);
}

bool DitModel::is_motion_branch_param(const std::string& name) {
    return name.rfind("motion.", 0) == 0 || name.find(".m.") != std::string::npos ||
           name.find("ada_motion") != std::string::npos;
}

bool DitModel::is_text_branch_param(const std::string& name) {
    return name.rfind("text.", 0) == 0 || name.find(".tv.") != std::string::npos ||
           name.find("ada_text") != std::string::npos;
}

Var DitModel::timestep_embedding(int t_video, int t_motion) const {
    const int Td = config_.time_embed_dim;
    nn::Tensor cat({1, 2 * Td});
    const nn::Tensor ev = nn::sinusoidal_encoding(static_cast<double>(t_video), Td);
    const nn::Tensor em = nn::sinusoidal_encoding(static_cast<double>(t_motion), Td);
    for (int i = 0; i < Td; ++i) {
        cat.data[static_cast<std::size_t>(i)] = ev.data[static_cast<std::size_t>(i)];
        cat.data[static_cast<std::size_t>(Td + i)] = em.data[static_cast<std::size_t>(i)];
    }
    Var y = nn::linear(nn::constant(std::move(cat)), params_.get("time.mlp1.w"), params_.get("time.mlp1.b"));
    y = nn::silu(y);
    return nn::linear(y, params_.get("time.mlp2.w"), params_.get("time.mlp2.b"));
}

DitModel::Modulation DitModel::modulation(const Var& y, const std::string& name, int width) const {
    Var mod = nn::linear(nn::silu(y), params_.get(name + ".w"), params_.get(name + ".b"));
    Modulation m;
    m.scale_msa = nn::add_scalar(nn::slice_cols(mod, 0, width), 1.0);
    m.shift_msa = nn::slice_cols(mod, width, 2 * width);
    m.gate_msa = nn::slice_cols(mod, 2 * width, 3 * width);
    m.scale_mlp = nn::add_scalar(nn::slice_cols(mod, 3 * width, 4 * width), 1.0);
    m.shift_mlp = nn::slice_cols(mod, 4 * width, 5 * width);
    m.gate_mlp = nn::slice_cols(mod, 5 * width, 6 * width);
    return m;
}

DitForward DitModel::forward(const DitInput& input, const nn::AttentionMask& interaction) const {
    const DitConfig& c = config_;
    const TokenLayout& layout = input.layout;
    layout.validate();
    if (layout.text_len != c.text_len) throw ValidationError("dit forward: text length mismatch");

    const bool with_video = input.video_tokens.numel() > 0;
    const bool with_motion = input.motion_latent.numel() > 0;
    if (with_video &&
        (input.video_tokens.rank() != 2 || input.video_tokens.dim(0) != layout.video_tokens() ||
         input.video_tokens.dim(1) != c.video_token_dim()))
        throw ValidationError("dit forward: video token shape mismatch");
    if (!with_video && layout.video_frames != 0)
        throw ValidationError("dit forward: layout announces video but none given");
    if (with_motion && (input.motion_latent.rank() != 2 || input.motion_latent.dim(0) != layout.motion_len ||
                        input.motion_latent.dim(1) != c.motion_channels))
        throw ValidationError("dit forward: motion latent shape mismatch");
    if (!with_motion && layout.motion_len != 0)
        throw ValidationError("dit forward: layout announces motion but none given");
    if (interaction.n != layout.total_tokens())
        throw ValidationError("dit forward: interaction mask size mismatch");
    if (!input.text_null && (input.text_valid < 1 || input.text_valid > c.text_len))
        throw ValidationError("dit forward: text_valid out of range");
    if (!input.text_null && static_cast<int>(input.text_ids.size()) != c.text_len)
        throw ValidationError("dit forward: text ids length mismatch");

    // ---- tokenize ----
    Var x_text;
    if (input.text_null) {
        // broadcast the learned null embedding over the full text length
        std::vector<Var> rows(static_cast<std::size_t>(c.text_len), params_.get("text.null"));
        x_text = nn::concat_rows(rows);
    } else {
        x_text = nn::embedding(params_.get("text.embed"), input.text_ids);
    }
    x_text = nn::linear(x_text, params_.get("text.proj.w"), params_.get("text.proj.b"));

    Var x_video, x_motion;
    std::vector<std::array<int, 3>> video_pos;
    if (with_video) {
        x_video = nn::linear(nn::constant(input.video_tokens), params_.get("video.embed.w"),
                             params_.get("video.embed.b"));
        x_video = nn::linear(x_video, params_.get("video.proj.w"), params_.get("video.proj.b"));
        // sinusoidal absolute encoding by temporal (latent frame) index
        nn::Tensor pe({layout.video_tokens(), c.width});
        for (int i = 0; i < layout.video_tokens(); ++i) {
            const nn::Tensor e = nn::sinusoidal_encoding(layout.video_latent_frame(i), c.width);
            std::copy(e.data.begin(), e.data.end(),
                      pe.data.begin() + static_cast<std::ptrdiff_t>(i * c.width));
            video_pos.push_back(layout.video_position(i));
        }
        x_video = nn::add(x_video, nn::constant(std::move(pe)));
    }
    if (with_motion) {
        x_motion = nn::linear(nn::constant(input.motion_latent), params_.get("motion.embed.w"),
                              params_.get("motion.embed.b"));
        nn::Tensor pe({layout.motion_len, c.motion_width});
        for (int i = 0; i < layout.motion_len; ++i) {
            const nn::Tensor e = nn::sinusoidal_encoding(i, c.motion_width);
            std::copy(e.data.begin(), e.data.end(),
                      pe.data.begin() + static_cast<std::ptrdiff_t>(i * c.motion_width));
        }
        x_motion = nn::add(x_motion, nn::constant(std::move(pe)));
    }

    const Var y = timestep_embedding(input.t_video, input.t_motion);

    // masks: full layout for the lower (motion-present) layers, text+video for
    // the upper ones; padded text keys are blocked everywhere
    nn::AttentionMask lower = interaction;
    apply_text_padding(lower, layout, input.text_null ? c.text_len : input.text_valid);
    TokenLayout upper_layout = layout;
    upper_layout.motion_len = 0;
    nn::AttentionMask upper = nn::AttentionMask::all_allowed(upper_layout.total_tokens());
    for (int q = 0; q < upper_layout.total_tokens(); ++q)
        for (int k = 0; k < upper_layout.total_tokens(); ++k) upper.set(q, k, lower.allowed(q, k));

    for (int l = 0; l < c.layers; ++l) {
        const std::string p = "block" + std::to_string(l);
        const bool motion_here = with_motion && l < c.motion_layers();
        // after the motion branch exits, text-only stacks have nothing left to feed
        if (!with_video && l >= c.motion_layers()) break;
        const nn::AttentionMask& use_mask = motion_here ? lower : (with_motion ? upper : lower);

        const Modulation mt = modulation(y, p + ".ada_text", c.width);
        Var h_text = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_text), mt.scale_msa), mt.shift_msa);
        Var qkv_text = nn::linear(h_text, params_.get(p + ".tv.qkv.w"), params_.get(p + ".tv.qkv.b"));

        Var qkv_video;
        Modulation mv;
        if (with_video) {
            mv = modulation(y, p + ".ada_video", c.width);
            Var h_video = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_video), mv.scale_msa), mv.shift_msa);
            qkv_video = nn::linear(h_video, params_.get(p + ".tv.qkv.w"), params_.get(p + ".tv.qkv.b"));
        }
        Var qkv_motion;
        Modulation mm;
        if (motion_here) {
            mm = modulation(y, p + ".ada_motion", c.motion_width);
            Var h_motion =
                nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_motion), mm.scale_msa), mm.shift_msa);
            qkv_motion = nn::linear(h_motion, params_.get(p + ".m.qkv.w"), params_.get(p + ".m.qkv.b"));
        }

        auto take = [&](const Var& qkv, int part) {
            return nn::slice_cols(qkv, part * c.width, (part + 1) * c.width);
        };

        std::vector<Var> qs{take(qkv_text, 0)}, ks{take(qkv_text, 1)}, vs{take(qkv_text, 2)};
        if (with_video) {
            Var qv = nn::rope3d(take(qkv_video, 0), video_pos, c.heads);
            Var kv = nn::rope3d(take(qkv_video, 1), video_pos, c.heads);
            qs.push_back(qv);
            ks.push_back(kv);
            vs.push_back(take(qkv_video, 2));
        }
        if (motion_here) {
            qs.push_back(take(qkv_motion, 0));
            ks.push_back(take(qkv_motion, 1));
            vs.push_back(take(qkv_motion, 2));
        }
        Var attn = nn::attention(nn::concat_rows(qs), nn::concat_rows(ks), nn::concat_rows(vs), c.heads,
                                 use_mask);

        const int tb = 0, vb = layout.text_len, mb = layout.text_len + (with_video ? layout.video_tokens() : 0);
        Var a_text = nn::slice_rows(attn, tb, layout.text_len);
        x_text = nn::add(x_text, nn::mul_rowvec(nn::linear(a_text, params_.get(p + ".tv.out.w"),
                                                           params_.get(p + ".tv.out.b")),
                                                mt.gate_msa));
        Var h2_text = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_text), mt.scale_mlp), mt.shift_mlp);
        Var mlp_text = nn::linear(nn::silu(nn::linear(h2_text, params_.get(p + ".tv.mlp1.w"),
                                                      params_.get(p + ".tv.mlp1.b"))),
                                  params_.get(p + ".tv.mlp2.w"), params_.get(p + ".tv.mlp2.b"));
        x_text = nn::add(x_text, nn::mul_rowvec(mlp_text, mt.gate_mlp));

        if (with_video) {
            Var a_video = nn::slice_rows(attn, vb, vb + layout.video_tokens());
            x_video = nn::add(x_video, nn::mul_rowvec(nn::linear(a_video, params_.get(p + ".tv.out.w"),
                                                                 params_.get(p + ".tv.out.b")),
                                                      mv.gate_msa));
            Var h2 = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_video), mv.scale_mlp), mv.shift_mlp);
            Var mlp = nn::linear(nn::silu(nn::linear(h2, params_.get(p + ".tv.mlp1.w"),
                                                     params_.get(p + ".tv.mlp1.b"))),
                                 params_.get(p + ".tv.mlp2.w"), params_.get(p + ".tv.mlp2.b"));
            x_video = nn::add(x_video, nn::mul_rowvec(mlp, mv.gate_mlp));
        }
        if (motion_here) {
            Var a_motion = nn::slice_rows(attn, mb, mb + layout.motion_len);
            x_motion = nn::add(x_motion, nn::mul_rowvec(nn::linear(a_motion, params_.get(p + ".m.out.w"),
                                                                   params_.get(p + ".m.out.b")),
                                                        mm.gate_msa));
            Var h2 = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_motion), mm.scale_mlp), mm.shift_mlp);
            Var mlp = nn::linear(nn::silu(nn::linear(h2, params_.get(p + ".m.mlp1.w"),
                                                     params_.get(p + ".m.mlp1.b"))),
                                 params_.get(p + ".m.mlp2.w"), params_.get(p + ".m.mlp2.b"));
            x_motion = nn::add(x_motion, nn::mul_rowvec(mlp, mm.gate_mlp));
        }
    }

    DitForward out;
    if (with_video) {
        Var mod = nn::linear(nn::silu(y), params_.get("video.final.ada.w"), params_.get("video.final.ada.b"));
        Var scale = nn::add_scalar(nn::slice_cols(mod, 0, c.width), 1.0);
        Var shift = nn::slice_cols(mod, c.width, 2 * c.width);
        Var h = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_video), scale), shift);
        out.video_eps = nn::linear(h, params_.get("video.final.w"), params_.get("video.final.b"));
    }
    if (with_motion) {
        Var mod = nn::linear(nn::silu(y), params_.get("motion.final.ada.w"), params_.get("motion.final.ada.b"));
        Var scale = nn::add_scalar(nn::slice_cols(mod, 0, c.motion_width), 1.0);
        Var shift = nn::slice_cols(mod, c.motion_width, 2 * c.motion_width);
        Var h = nn::add_rowvec(nn::mul_rowvec(nn::layer_norm_rows(x_motion), scale), shift);
        out.motion_eps = nn::linear(h, params_.get("motion.final.w"), params_.get("motion.final.b"));
    }
    return out;
}

} // namespace egtw::dit
