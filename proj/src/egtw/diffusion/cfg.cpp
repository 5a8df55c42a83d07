#include "egtw/diffusion/cfg.hpp"

#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::diffusion {

namespace {

nn::Tensor combine(const nn::Tensor& base, const nn::Tensor& text_delta_hi, const nn::Tensor& text_delta_lo,
                   double w_a, const nn::Tensor& cond_hi, const nn::Tensor& cond_lo, double w_b) {
    nn::Tensor out = base;
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] += w_a * (text_delta_hi.data[i] - text_delta_lo.data[i]) +
                       w_b * (cond_hi.data[i] - cond_lo.data[i]);
    return out;
}

} // namespace

void GuidanceScales::validate() const {
    if (!std::isfinite(w_t) || !std::isfinite(w_v) || !std::isfinite(w_m))
        throw ConfigError("guidance scales must be finite");
}

nn::Tensor cfg_video_given_motion(const Denoiser& model, const nn::Tensor& video_latent_t, int t,
                                  const nn::Tensor& motion_clean, const nn::Tensor& motion_noise,
                                  const TextCondition& text, const GuidanceScales& scales, int max_timestep) {
    scales.validate();
    DenoiseRequest r;
    r.video_latent = video_latent_t;
    r.t_video = t;

    r.motion_latent = motion_noise;
    r.t_motion = max_timestep;
    r.text_null = true;
    const nn::Tensor e_null = model.predict(r).video_eps;

    r.text = text;
    r.text_null = false;
    const nn::Tensor e_text = model.predict(r).video_eps;

    r.motion_latent = motion_clean;
    r.t_motion = 0;
    const nn::Tensor e_cond = model.predict(r).video_eps;

    return combine(e_null, e_text, e_null, scales.w_t, e_cond, e_text, scales.w_m);
}

nn::Tensor cfg_motion_given_video(const Denoiser& model, const nn::Tensor& motion_latent_t, int t,
                                  const nn::Tensor& video_clean, const nn::Tensor& video_noise,
                                  const TextCondition& text, const GuidanceScales& scales, int max_timestep) {
    scales.validate();
    DenoiseRequest r;
    r.motion_latent = motion_latent_t;
    r.t_motion = t;

    r.video_latent = video_noise;
    r.t_video = max_timestep;
    r.text_null = true;
    const nn::Tensor e_null = model.predict(r).motion_eps;

    r.text = text;
    r.text_null = false;
    const nn::Tensor e_text = model.predict(r).motion_eps;

    r.video_latent = video_clean;
    r.t_video = 0;
    const nn::Tensor e_cond = model.predict(r).motion_eps;

    return combine(e_null, e_text, e_null, scales.w_t, e_cond, e_text, scales.w_v);
}

JointGuidance cfg_joint(const Denoiser& model, const nn::Tensor& video_latent_t,
                        const nn::Tensor& motion_latent_t, int t, const nn::Tensor& video_noise,
                        const nn::Tensor& motion_noise, const TextCondition& text,
                        const GuidanceScales& scales, int max_timestep) {
    scales.validate();

    // shared fully-conditioned pass: both modalities at the true timestep
    DenoiseRequest shared;
    shared.video_latent = video_latent_t;
    shared.motion_latent = motion_latent_t;
    shared.t_video = t;
    shared.t_motion = t;
    shared.text = text;
    const DenoisePrediction both = model.predict(shared);

    // motion branch: video condition nulled at T
    DenoiseRequest rm;
    rm.motion_latent = motion_latent_t;
    rm.t_motion = t;
    rm.video_latent = video_noise;
    rm.t_video = max_timestep;
    rm.text_null = true;
    const nn::Tensor m_null = model.predict(rm).motion_eps;
    rm.text = text;
    rm.text_null = false;
    const nn::Tensor m_text = model.predict(rm).motion_eps;

    // video branch: motion condition nulled at T
    DenoiseRequest rv;
    rv.video_latent = video_latent_t;
    rv.t_video = t;
    rv.motion_latent = motion_noise;
    rv.t_motion = max_timestep;
    rv.text_null = true;
    const nn::Tensor v_null = model.predict(rv).video_eps;
    rv.text = text;
    rv.text_null = false;
    const nn::Tensor v_text = model.predict(rv).video_eps;

    JointGuidance out;
    out.motion_eps = combine(m_null, m_text, m_null, scales.w_t, both.motion_eps, m_text, scales.w_v);
    out.video_eps = combine(v_null, v_text, v_null, scales.w_t, both.video_eps, v_text, scales.w_m);
    return out;
}

JointGuidance cfg_joint_vanilla(const Denoiser& model, const nn::Tensor& video_latent_t,
                                const nn::Tensor& motion_latent_t, int t, const TextCondition& text,
                                double w_t) {
    DenoiseRequest r;
    r.video_latent = video_latent_t;
    r.motion_latent = motion_latent_t;
    r.t_video = t;
    r.t_motion = t;
    r.text_null = true;
    const DenoisePrediction null_pred = model.predict(r);
    r.text = text;
    r.text_null = false;
    const DenoisePrediction text_pred = model.predict(r);

    JointGuidance out;
    out.video_eps = null_pred.video_eps;
    out.motion_eps = null_pred.motion_eps;
    for (std::size_t i = 0; i < out.video_eps.data.size(); ++i)
        out.video_eps.data[i] += w_t * (text_pred.video_eps.data[i] - null_pred.video_eps.data[i]);
    for (std::size_t i = 0; i < out.motion_eps.data.size(); ++i)
        out.motion_eps.data[i] += w_t * (text_pred.motion_eps.data[i] - null_pred.motion_eps.data[i]);
    return out;
}

} // namespace egtw::diffusion
