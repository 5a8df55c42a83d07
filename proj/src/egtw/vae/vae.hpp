#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "egtw/kin/representation.hpp"
#include "egtw/nn/params.hpp"

namespace egtw::vae {

// 1D causal convolutional VAE over per-frame motion features. Two 2x
// downsampling stages (4x total): a sequence of N+1 frames with N % 4 == 0
// maps to N/4 + 1 latents. All convolution padding sits at the beginning of
// the time axis, so latent index l only sees input frames <= 4l.
struct VaeConfig {
    std::vector<int> widths = {48, 64, 80}; // channel width per stage
    int latent_channels = 16;               // C_m
    double lambda_kl = 1e-4;
    int resnet_blocks = 1;
    int norm_groups = 4;
    int feature_width = 0; // per-frame feature scalars (from the representation layout)

    void validate() const;
    nlohmann::json to_json() const;
    static VaeConfig from_json(const nlohmann::json& j);
};

struct VaeEncodeOut {
    nn::Var mean;   // (Tz, C_m)
    nn::Var logvar; // (Tz, C_m)
    nn::Var sample; // mean + exp(logvar/2) * eps
};

// Group-balanced loss: per group, the reconstruction term is the sum of the
// member fields' MSEs; the KL term is the full Gaussian KL applied identically
// inside each group, so the average over the four groups keeps it intact.
struct VaeLossBreakdown {
    nn::Var total;
    std::map<std::string, double> group_rec; // per-group reconstruction value
    double kl = 0.0;
};

class MotionVae {
public:
    MotionVae(VaeConfig config, const kin::FeatureLayout& layout, std::uint64_t init_seed);

    // Training path (autodiff). x is (T, feature_width); posterior_eps supplies
    // the reparameterization noise (pass nullptr to use the mean).
    VaeEncodeOut encode(const nn::Var& x, Rng* posterior_rng) const;
    nn::Var decode(const nn::Var& z) const;

    VaeLossBreakdown loss(const nn::Var& input, const nn::Var& reconstruction, const nn::Var& mean,
                          const nn::Var& logvar) const;

    // Inference conveniences on plain tensors.
    nn::Tensor encode_mean(const nn::Tensor& x) const;
    nn::Tensor decode_tensor(const nn::Tensor& z) const;
    std::map<std::string, double> reconstruction_group_error(const nn::Tensor& x) const;

    static std::int64_t latent_length(std::int64_t frames); // throws unless frames % 4 == 1
    static std::int64_t frames_for_latent(std::int64_t latents);

    nn::ParamStore& params() { return params_; }
    const nn::ParamStore& params() const { return params_; }
    const VaeConfig& config() const { return config_; }
    const kin::FeatureLayout& layout() const { return layout_; }

private:
    VaeConfig config_;
    kin::FeatureLayout layout_;
    nn::ParamStore params_;

    nn::Var res_block(const nn::Var& x, const std::string& prefix) const;
    nn::Var norm_act(const nn::Var& x, const std::string& prefix) const;
};

} // namespace egtw::vae
