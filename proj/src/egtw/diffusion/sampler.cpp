#include "egtw/diffusion/sampler.hpp"

#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::diffusion {

SampleMode sample_mode_from_string(const std::string& s) {
    if (s == "t2vm") return SampleMode::T2VM;
    if (s == "tm2v") return SampleMode::TM2V;
    if (s == "tv2m") return SampleMode::TV2M;
    throw ConfigError("unknown sampling mode: " + s);
}

std::string to_string(SampleMode mode) {
    switch (mode) {
        case SampleMode::T2VM: return "t2vm";
        case SampleMode::TM2V: return "tm2v";
        case SampleMode::TV2M: return "tv2m";
    }
    throw ConfigError("unknown sampling mode");
}

namespace {

// clamp the first latent frame (all entries with leading index 0)
void clamp_first_frame(nn::Tensor& z, const nn::Tensor& clean) {
    if (!z.same_shape(clean)) throw ValidationError("sampler: clamp shape mismatch");
    const std::int64_t frame = z.numel() / z.dim(0);
    for (std::int64_t i = 0; i < frame; ++i) z.data[static_cast<std::size_t>(i)] = clean.data[static_cast<std::size_t>(i)];
}

void ddim_update(nn::Tensor& z, const nn::Tensor& eps, double ab_now, double ab_next) {
    const double sa = std::sqrt(ab_now), sb = std::sqrt(1.0 - ab_now);
    const double na = std::sqrt(ab_next), nb = std::sqrt(1.0 - ab_next);
    for (std::size_t i = 0; i < z.data.size(); ++i) {
        const double x0 = (z.data[i] - sb * eps.data[i]) / sa;
        z.data[i] = na * x0 + nb * eps.data[i];
    }
}

} // namespace

SampleResult reverse_sample(const Denoiser& model, const NoiseSchedule& schedule,
                            const SamplerConfig& config, const SampleConditioning& cond) {
    if (config.steps < 1) throw ValidationError("sampler: step count must be >= 1");
    config.scales.validate();
    if (config.vanilla_cfg && config.mode != SampleMode::T2VM)
        throw ConfigError("sampler: vanilla CFG only supports joint sampling");

    const int T = schedule.max_timestep;
    Rng rng(Rng(config.seed).split("reverse-sample").seed());
    Rng init_rng = rng.split("init");
    Rng null_rng = rng.split("null-condition");

    const bool gen_video = config.mode != SampleMode::TV2M;
    const bool gen_motion = config.mode != SampleMode::TM2V;
    if (cond.video_latent_clean.numel() == 0 || cond.motion_latent_clean.numel() == 0)
        throw ValidationError("sampler: clean latents required for conditioning");

    nn::Tensor z_v = gen_video ? nn::Tensor::randn(cond.video_latent_clean.shape, init_rng)
                               : cond.video_latent_clean;
    nn::Tensor z_m = gen_motion ? nn::Tensor::randn(cond.motion_latent_clean.shape, init_rng)
                                : cond.motion_latent_clean;
    if (gen_video) clamp_first_frame(z_v, cond.video_latent_clean);
    if (gen_motion) clamp_first_frame(z_m, cond.motion_latent_clean);

    // evenly strided grid T = tau_0 > tau_1 > ... > tau_steps = 0
    std::vector<int> grid(static_cast<std::size_t>(config.steps) + 1);
    for (int i = 0; i <= config.steps; ++i)
        grid[static_cast<std::size_t>(i)] =
            static_cast<int>(std::lround(static_cast<double>(T) * (config.steps - i) / config.steps));

    for (int i = 0; i < config.steps; ++i) {
        const int t_now = grid[static_cast<std::size_t>(i)];
        const int t_next = grid[static_cast<std::size_t>(i + 1)];
        if (t_now == t_next) continue;
        const double ab_now = schedule.alpha_bar_at(t_now);
        const double ab_next = schedule.alpha_bar_at(t_next);

        switch (config.mode) {
            case SampleMode::TM2V: {
                nn::Tensor motion_noise = nn::Tensor::randn(cond.motion_latent_clean.shape, null_rng);
                const nn::Tensor eps = cfg_video_given_motion(model, z_v, t_now, cond.motion_latent_clean,
                                                              motion_noise, cond.text, config.scales, T);
                ddim_update(z_v, eps, ab_now, ab_next);
                clamp_first_frame(z_v, cond.video_latent_clean);
                break;
            }
            case SampleMode::TV2M: {
                nn::Tensor video_noise = nn::Tensor::randn(cond.video_latent_clean.shape, null_rng);
                const nn::Tensor eps = cfg_motion_given_video(model, z_m, t_now, cond.video_latent_clean,
                                                              video_noise, cond.text, config.scales, T);
                ddim_update(z_m, eps, ab_now, ab_next);
                clamp_first_frame(z_m, cond.motion_latent_clean);
                break;
            }
            case SampleMode::T2VM: {
                JointGuidance g;
                if (config.vanilla_cfg) {
                    g = cfg_joint_vanilla(model, z_v, z_m, t_now, cond.text, config.scales.w_t);
                } else {
                    nn::Tensor video_noise = nn::Tensor::randn(cond.video_latent_clean.shape, null_rng);
                    nn::Tensor motion_noise = nn::Tensor::randn(cond.motion_latent_clean.shape, null_rng);
                    g = cfg_joint(model, z_v, z_m, t_now, video_noise, motion_noise, cond.text,
                                  config.scales, T);
                }
                ddim_update(z_v, g.video_eps, ab_now, ab_next);
                ddim_update(z_m, g.motion_eps, ab_now, ab_next);
                clamp_first_frame(z_v, cond.video_latent_clean);
                clamp_first_frame(z_m, cond.motion_latent_clean);
                break;
            }
        }
    }

    SampleResult out;
    out.video_latent = z_v;
    out.motion_latent = z_m;
    return out;
}

} // namespace egtw::diffusion
