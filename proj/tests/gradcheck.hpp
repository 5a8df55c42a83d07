#pragma once

#include <functional>
#include <vector>

#include "egtw/core/rng.hpp"
#include "egtw/nn/autodiff.hpp"

namespace egtw::testutil {

// Central-difference gradient verification. loss_fn must rebuild the graph
// from the same parameter Vars on every call and be deterministic. Checks all
// coordinates up to max_coords_per_tensor (seeded subset beyond that) and
// returns the worst relative error.
inline double grad_check(const std::function<nn::Var()>& loss_fn, const std::vector<nn::Var>& params,
                         double h = 1e-3, int max_coords_per_tensor = 256, std::uint64_t seed = 1234567ull) {
    nn::zero_grad(params);
    nn::Var loss = loss_fn();
    nn::backward(loss);

    std::vector<std::vector<double>> analytic;
    for (const auto& p : params) {
        analytic.push_back(p->grad.data.empty() ? std::vector<double>(p->value.data.size(), 0.0) : p->grad.data);
    }

    double worst = 0;
    Rng rng(seed);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        const std::size_t n = p->value.data.size();
        std::vector<std::size_t> coords;
        if (static_cast<int>(n) <= max_coords_per_tensor) {
            for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
        } else {
            for (int i = 0; i < max_coords_per_tensor; ++i)
                coords.push_back(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1)));
        }
        for (std::size_t c : coords) {
            const double saved = p->value.data[c];
            p->value.data[c] = saved + h;
            const double fp = loss_fn()->value.data[0];
            p->value.data[c] = saved - h;
            const double fm = loss_fn()->value.data[0];
            p->value.data[c] = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double a = analytic[pi][c];
            const double rel = std::abs(a - fd) / std::max(std::abs(a) + std::abs(fd), 1e-6);
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

} // namespace egtw::testutil
