#include "egtw/diffusion/schedule.hpp"

#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::diffusion {

NoiseSchedule NoiseSchedule::linear(int max_timestep, double beta_start, double beta_end) {
    if (max_timestep < 1) throw ConfigError("schedule: T must be >= 1");
    NoiseSchedule s;
    s.max_timestep = max_timestep;
    s.beta.resize(static_cast<std::size_t>(max_timestep) + 1, 0.0);
    s.alpha_bar.resize(static_cast<std::size_t>(max_timestep) + 1, 1.0);
    for (int t = 1; t <= max_timestep; ++t) {
        const double frac = max_timestep > 1 ? static_cast<double>(t - 1) / (max_timestep - 1) : 0.0;
        s.beta[static_cast<std::size_t>(t)] = beta_start + (beta_end - beta_start) * frac;
        s.alpha_bar[static_cast<std::size_t>(t)] =
            s.alpha_bar[static_cast<std::size_t>(t - 1)] * (1.0 - s.beta[static_cast<std::size_t>(t)]);
    }
    s.validate();
    return s;
}

NoiseSchedule NoiseSchedule::from_alpha_bar(std::vector<double> alpha_bar) {
    if (alpha_bar.size() < 2) throw ConfigError("schedule: at least two alpha_bar entries");
    NoiseSchedule s;
    s.max_timestep = static_cast<int>(alpha_bar.size()) - 1;
    s.alpha_bar = std::move(alpha_bar);
    s.beta.assign(s.alpha_bar.size(), 0.0);
    for (std::size_t t = 1; t < s.alpha_bar.size(); ++t)
        s.beta[t] = 1.0 - s.alpha_bar[t] / s.alpha_bar[t - 1];
    return s;
}

double NoiseSchedule::alpha_bar_at(int t) const {
    if (t < 0 || t > max_timestep) throw ValidationError("schedule: timestep out of range");
    return alpha_bar[static_cast<std::size_t>(t)];
}

void NoiseSchedule::validate() const {
    if (alpha_bar.empty() || static_cast<int>(alpha_bar.size()) != max_timestep + 1)
        throw ConfigError("schedule: alpha_bar size mismatch");
    if (std::abs(alpha_bar[0] - 1.0) > 1e-9) throw ConfigError("schedule: alpha_bar[0] must be ~1");
    for (std::size_t t = 1; t < alpha_bar.size(); ++t)
        if (alpha_bar[t] >= alpha_bar[t - 1]) throw ConfigError("schedule: alpha_bar must decrease");
    if (alpha_bar.back() > 0.01) throw ConfigError("schedule: alpha_bar[T] must be ~0");
}

nn::Tensor NoiseSchedule::add_noise(const nn::Tensor& z, int t, const nn::Tensor& eps) const {
    if (!z.same_shape(eps)) throw ValidationError("add_noise: shape mismatch");
    const double ab = alpha_bar_at(t);
    const double a = std::sqrt(ab);
    const double b = std::sqrt(1.0 - ab);
    nn::Tensor out = z;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = a * z.data[i] + b * eps.data[i];
    return out;
}

nlohmann::json NoiseSchedule::to_json() const {
    return {{"max_timestep", max_timestep},
            {"beta_start", beta.size() > 1 ? beta[1] : 0.0},
            {"beta_end", beta.empty() ? 0.0 : beta.back()}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
    return linear(j.value("max_timestep", 1000), j.value("beta_start", 1e-4), j.value("beta_end", 2e-2));
}

} // namespace egtw::diffusion
