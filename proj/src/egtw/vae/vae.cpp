#include "egtw/vae/vae.hpp"

#include <cmath>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::vae {

using nn::Var;

void VaeConfig::validate() const {
    if (widths.size() != 3) throw ConfigError("vae: exactly three stage widths required (4x downsampling)");
    for (int w : widths)
        if (w <= 0 || w % norm_groups != 0)
            throw ConfigError("vae: stage widths must be positive multiples of norm_groups");
    if (latent_channels <= 0) throw ConfigError("vae: latent_channels must be positive");
    if (lambda_kl <= 0) throw ConfigError("vae: lambda_kl must be positive");
    if (resnet_blocks < 1) throw ConfigError("vae: at least one resnet block per stage");
    if (feature_width <= 0) throw ConfigError("vae: feature_width unset");
}

nlohmann::json VaeConfig::to_json() const {
    return {{"widths", widths},
            {"latent_channels", latent_channels},
            {"lambda_kl", lambda_kl},
            {"resnet_blocks", resnet_blocks},
            {"norm_groups", norm_groups},
            {"feature_width", feature_width}};
}

VaeConfig VaeConfig::from_json(const nlohmann::json& j) {
    VaeConfig c;
    c.widths = j.value("widths", c.widths);
    c.latent_channels = j.value("latent_channels", c.latent_channels);
    c.lambda_kl = j.value("lambda_kl", c.lambda_kl);
    c.resnet_blocks = j.value("resnet_blocks", c.resnet_blocks);
    c.norm_groups = j.value("norm_groups", c.norm_groups);
    c.feature_width = j.value("feature_width", c.feature_width);
    return c;
}

std::int64_t MotionVae::latent_length(std::int64_t frames) {
    if (frames < 5 || (frames - 1) % 4 != 0)
        throw ValidationError("vae: sequence length must be N+1 with N divisible by 4");
    return (frames - 1) / 4 + 1;
}

std::int64_t MotionVae::frames_for_latent(std::int64_t latents) {
    if (latents < 2) throw ValidationError("vae: latent length must be >= 2");
    return 4 * (latents - 1) + 1;
}

namespace {

double conv_init_std(int k, int cin) {
    return 1.0 / std::sqrt(static_cast<double>(k * cin));
}

} // namespace

MotionVae::MotionVae(VaeConfig config, const kin::FeatureLayout& layout, std::uint64_t init_seed)
    : config_(std::move(config)), layout_(layout) {
    config_.validate();
    if (layout_.width != config_.feature_width)
        throw ConfigError("vae: layout width does not match config feature_width");
    Rng rng(init_seed);
    const int F = config_.feature_width;
    const auto& w = config_.widths;
    const int C = config_.latent_channels;

    auto conv = [&](const std::string& name, int k, int cin, int cout) {
        params_.create_randn(name + ".w", {k, cin, cout}, rng, conv_init_std(k, cin));
        params_.create_zeros(name + ".b", {cout});
    };

    auto stage = [&](const std::string& prefix, int c) {
        for (int b = 0; b < config_.resnet_blocks; ++b) {
            const std::string p = prefix + ".res" + std::to_string(b);
            params_.create(p + ".n1.gamma", {c}, [](nn::Tensor& t) { for (auto& v : t.data) v = 1.0; });
            params_.create_zeros(p + ".n1.beta", {c});
            conv(p + ".c1", 3, c, c);
            params_.create(p + ".n2.gamma", {c}, [](nn::Tensor& t) { for (auto& v : t.data) v = 1.0; });
            params_.create_zeros(p + ".n2.beta", {c});
            conv(p + ".c2", 3, c, c);
        }
    };

    // encoder
    conv("enc.stem", 3, F, w[0]);
    stage("enc.s0", w[0]);
    conv("enc.down1", 3, w[0], w[1]);
    stage("enc.s1", w[1]);
    conv("enc.down2", 3, w[1], w[2]);
    stage("enc.s2", w[2]);
    params_.create("enc.out.gamma", {w[2]}, [](nn::Tensor& t) { for (auto& v : t.data) v = 1.0; });
    params_.create_zeros("enc.out.beta", {w[2]});
    conv("enc.head", 3, w[2], 2 * C);

    // decoder (symmetric)
    conv("dec.stem", 3, C, w[2]);
    stage("dec.s2", w[2]);
    conv("dec.up1", 3, w[2], w[1]);
    stage("dec.s1", w[1]);
    conv("dec.up0", 3, w[1], w[0]);
    stage("dec.s0", w[0]);
    params_.create("dec.out.gamma", {w[0]}, [](nn::Tensor& t) { for (auto& v : t.data) v = 1.0; });
    params_.create_zeros("dec.out.beta", {w[0]});
    conv("dec.head", 3, w[0], F);
}

Var MotionVae::norm_act(const Var& x, const std::string& prefix) const {
    Var h = nn::group_norm_channels(x, config_.norm_groups);
    h = nn::mul_rowvec(h, params_.get(prefix + ".gamma"));
    h = nn::add_rowvec(h, params_.get(prefix + ".beta"));
    return nn::silu(h);
}

Var MotionVae::res_block(const Var& x, const std::string& prefix) const {
    Var h = norm_act(x, prefix + ".n1");
    h = nn::causal_conv1d(h, params_.get(prefix + ".c1.w"), params_.get(prefix + ".c1.b"), 1);
    h = norm_act(h, prefix + ".n2");
    h = nn::causal_conv1d(h, params_.get(prefix + ".c2.w"), params_.get(prefix + ".c2.b"), 1);
    return nn::add(x, h);
}

VaeEncodeOut MotionVae::encode(const Var& x, Rng* posterior_rng) const {
    if (x->value.rank() != 2 || x->value.dim(1) != config_.feature_width)
        throw ValidationError("vae encode: expected (frames, " + std::to_string(config_.feature_width) + ")");
    latent_length(x->value.dim(0)); // validates length

    Var h = nn::causal_conv1d(x, params_.get("enc.stem.w"), params_.get("enc.stem.b"), 1);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "enc.s0.res" + std::to_string(b));
    h = nn::causal_conv1d(h, params_.get("enc.down1.w"), params_.get("enc.down1.b"), 2);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "enc.s1.res" + std::to_string(b));
    h = nn::causal_conv1d(h, params_.get("enc.down2.w"), params_.get("enc.down2.b"), 2);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "enc.s2.res" + std::to_string(b));
    h = norm_act(h, "enc.out");
    h = nn::causal_conv1d(h, params_.get("enc.head.w"), params_.get("enc.head.b"), 1);

    const std::int64_t C = config_.latent_channels;
    VaeEncodeOut out;
    out.mean = nn::slice_cols(h, 0, C);
    out.logvar = nn::slice_cols(h, C, 2 * C);
    if (posterior_rng) {
        nn::Tensor eps = nn::Tensor::randn(out.mean->value.shape, *posterior_rng);
        out.sample = nn::add(out.mean, nn::mul(nn::exp(nn::mul_scalar(out.logvar, 0.5)), nn::constant(std::move(eps))));
    } else {
        out.sample = out.mean;
    }
    return out;
}

Var MotionVae::decode(const Var& z) const {
    if (z->value.rank() != 2 || z->value.dim(1) != config_.latent_channels)
        throw ValidationError("vae decode: expected (latents, " + std::to_string(config_.latent_channels) + ")");
    frames_for_latent(z->value.dim(0)); // validates length

    Var h = nn::causal_conv1d(z, params_.get("dec.stem.w"), params_.get("dec.stem.b"), 1);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "dec.s2.res" + std::to_string(b));
    h = nn::upsample2x_causal(h);
    h = nn::causal_conv1d(h, params_.get("dec.up1.w"), params_.get("dec.up1.b"), 1);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "dec.s1.res" + std::to_string(b));
    h = nn::upsample2x_causal(h);
    h = nn::causal_conv1d(h, params_.get("dec.up0.w"), params_.get("dec.up0.b"), 1);
    for (int b = 0; b < config_.resnet_blocks; ++b) h = res_block(h, "dec.s0.res" + std::to_string(b));
    h = norm_act(h, "dec.out");
    return nn::causal_conv1d(h, params_.get("dec.head.w"), params_.get("dec.head.b"), 1);
}

VaeLossBreakdown MotionVae::loss(const Var& input, const Var& reconstruction, const Var& mean,
                                 const Var& logvar) const {
    if (!input->value.same_shape(reconstruction->value)) throw ValidationError("vae loss: shape mismatch");

    // KL(q || N(0,1)) averaged over latent entries; always >= 0
    Var kl = nn::mul_scalar(
        nn::mean_all(nn::sub(nn::add_scalar(nn::add(nn::square(mean), nn::exp(logvar)), -1.0), logvar)), 0.5);

    VaeLossBreakdown out;
    out.kl = kl->value.data[0];

    std::vector<Var> group_terms;
    std::vector<std::string> group_order = layout_.groups();
    for (const auto& group : group_order) {
        Var rec;
        for (const auto& field : layout_.fields) {
            if (field.group != group) continue;
            Var field_mse = nn::mean_squared_error(
                nn::slice_cols(reconstruction, field.offset, field.offset + field.width),
                nn::slice_cols(input, field.offset, field.offset + field.width));
            rec = rec ? nn::add(rec, field_mse) : field_mse;
        }
        out.group_rec[group] = rec->value.data[0];
        group_terms.push_back(nn::add(rec, nn::mul_scalar(kl, config_.lambda_kl)));
    }

    // fixed accumulation order: groups in layout order, then the 1/G average
    Var total = group_terms[0];
    for (std::size_t i = 1; i < group_terms.size(); ++i) total = nn::add(total, group_terms[i]);
    out.total = nn::mul_scalar(total, 1.0 / static_cast<double>(group_terms.size()));
    return out;
}

nn::Tensor MotionVae::encode_mean(const nn::Tensor& x) const {
    return encode(nn::constant(x), nullptr).mean->value;
}

nn::Tensor MotionVae::decode_tensor(const nn::Tensor& z) const {
    return decode(nn::constant(z))->value;
}

std::map<std::string, double> MotionVae::reconstruction_group_error(const nn::Tensor& x) const {
    Var input = nn::constant(x);
    VaeEncodeOut enc = encode(input, nullptr);
    Var recon = decode(enc.mean);
    const VaeLossBreakdown b = loss(input, recon, enc.mean, enc.logvar);
    return b.group_rec;
}

} // namespace egtw::vae
