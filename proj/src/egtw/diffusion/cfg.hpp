#pragma once

#include "egtw/diffusion/denoiser.hpp"

namespace egtw::diffusion {

struct GuidanceScales {
    double w_t = 6.0;
    double w_v = 4.0;
    double w_m = 4.0;

    void validate() const; // finite
};

// Video prediction guided by text and a clean motion condition (three model
// evaluations):
//   eps = e(null, z_m^T) + w_t (e(c, z_m^T) - e(null, z_m^T))
//                        + w_m (e(c, z_m^0) - e(c, z_m^T))
// The null motion condition is a pure-noise latent at timestep T.
nn::Tensor cfg_video_given_motion(const Denoiser& model, const nn::Tensor& video_latent_t, int t,
                                  const nn::Tensor& motion_clean, const nn::Tensor& motion_noise,
                                  const TextCondition& text, const GuidanceScales& scales, int max_timestep);

// Mirror with the roles of video and motion exchanged (w_v in place of w_m).
nn::Tensor cfg_motion_given_video(const Denoiser& model, const nn::Tensor& motion_latent_t, int t,
                                  const nn::Tensor& video_clean, const nn::Tensor& video_noise,
                                  const TextCondition& text, const GuidanceScales& scales, int max_timestep);

// Joint sampling at a shared timestep. Each branch nulls the other modality
// at timestep T; the fully-conditioned evaluation is shared between branches
// (five model evaluations in total).
struct JointGuidance {
    nn::Tensor video_eps;
    nn::Tensor motion_eps;
};
JointGuidance cfg_joint(const Denoiser& model, const nn::Tensor& video_latent_t,
                        const nn::Tensor& motion_latent_t, int t, const nn::Tensor& video_noise,
                        const nn::Tensor& motion_noise, const TextCondition& text,
                        const GuidanceScales& scales, int max_timestep);

// Plain text-only CFG at a shared timestep (the w/o-AD ablation sampler).
JointGuidance cfg_joint_vanilla(const Denoiser& model, const nn::Tensor& video_latent_t,
                                const nn::Tensor& motion_latent_t, int t, const TextCondition& text,
                                double w_t);

} // namespace egtw::diffusion
