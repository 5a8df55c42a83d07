#include "egtw/vae/trainer.hpp"

#include <cmath>

#include "egtw/core/error.hpp"

namespace egtw::vae {

VaeTrainer::VaeTrainer(MotionVae& model, VaeTrainConfig config)
    : model_(model),
      config_(config),
      adam_(config.adam, model.params(), model.params().names()),
      rng_(Rng(config.seed).split("vae-train").seed()) {}

VaeStepLog VaeTrainer::step(const std::vector<const nn::Tensor*>& batch) {
    if (batch.empty()) throw ValidationError("vae trainer: empty batch");
    nn::zero_grad(model_.params().all());

    Rng posterior = rng_.split("posterior-" + std::to_string(step_count_));
    VaeStepLog log;
    log.step = step_count_;
    nn::Var total;
    for (const nn::Tensor* x : batch) {
        nn::Var input = nn::constant(*x);
        VaeEncodeOut enc = model_.encode(input, &posterior);
        nn::Var recon = model_.decode(enc.sample);
        VaeLossBreakdown b = model_.loss(input, recon, enc.mean, enc.logvar);
        total = total ? nn::add(total, b.total) : b.total;
        for (const auto& [g, v] : b.group_rec) log.group_rec[g] += v / static_cast<double>(batch.size());
        log.kl += b.kl / static_cast<double>(batch.size());
    }
    total = nn::mul_scalar(total, 1.0 / static_cast<double>(batch.size()));
    log.total = total->value.data[0];

    if (!std::isfinite(log.total))
        throw TrainingDiverged("vae training: non-finite loss at step " + std::to_string(step_count_) +
                               " (last finite step: " + std::to_string(last_finite_step_) + ")");
    last_finite_step_ = step_count_;

    nn::backward(total);
    adam_.step();
    ++step_count_;
    return log;
}

void VaeTrainer::train(const std::vector<nn::Tensor>& dataset,
                       const std::function<void(const VaeStepLog&)>& on_log) {
    if (dataset.empty()) throw ValidationError("vae trainer: empty dataset");
    Rng order = rng_.split("order");
    std::vector<int> indices(dataset.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    std::size_t cursor = indices.size(); // trigger reshuffle on first use

    for (int s = 0; s < config_.steps; ++s) {
        std::vector<const nn::Tensor*> batch;
        for (int b = 0; b < config_.batch_size; ++b) {
            if (cursor >= indices.size()) {
                // Fisher-Yates reshuffle per epoch
                for (std::size_t i = indices.size(); i > 1; --i)
                    std::swap(indices[i - 1], indices[static_cast<std::size_t>(order.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
                cursor = 0;
            }
            batch.push_back(&dataset[static_cast<std::size_t>(indices[cursor++])]);
        }
        const VaeStepLog log = step(batch);
        if (on_log && (s % config_.log_every == 0 || s + 1 == config_.steps)) on_log(log);
    }
}

} // namespace egtw::vae
