#pragma once

#include <vector>

#include <json.hpp>

#include "egtw/nn/tensor.hpp"

namespace egtw::diffusion {

// DDPM noise schedule over integer timesteps 0..T with alpha_bar[0] = 1
// (timestep 0 is the clean signal) and alpha_bar[T] ~ 0.
struct NoiseSchedule {
    int max_timestep = 0; // T
    std::vector<double> beta;      // beta[0] = 0
    std::vector<double> alpha_bar; // cumulative products, size T+1

    static NoiseSchedule linear(int max_timestep = 1000, double beta_start = 1e-4, double beta_end = 2e-2);
    static NoiseSchedule from_alpha_bar(std::vector<double> alpha_bar);

    double alpha_bar_at(int t) const; // throws on out-of-range t
    void validate() const;            // monotone decreasing, ~1 at 0, ~0 at T

    // z^t = sqrt(alpha_bar_t) z + sqrt(1 - alpha_bar_t) eps
    nn::Tensor add_noise(const nn::Tensor& z, int t, const nn::Tensor& eps) const;

    nlohmann::json to_json() const;
    static NoiseSchedule from_json(const nlohmann::json& j);
};

} // namespace egtw::diffusion
