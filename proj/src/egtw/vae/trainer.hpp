#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "egtw/core/rng.hpp"
#include "egtw/vae/vae.hpp"

namespace egtw::vae {

struct VaeTrainConfig {
    int steps = 2000;
    int batch_size = 8;
    nn::AdamConfig adam{2e-3, 0.9, 0.999, 1e-8, 100};
    std::uint64_t seed = 1;
    int log_every = 20;
};

struct VaeStepLog {
    int step = 0;
    double total = 0;
    std::map<std::string, double> group_rec;
    double kl = 0;
};

// Full-batch-cycling trainer over pre-encoded feature sequences. Throws
// TrainingDiverged on non-finite loss; the message names the last step that
// produced a finite loss so callers can point at their most recent checkpoint.
class VaeTrainer {
public:
    VaeTrainer(MotionVae& model, VaeTrainConfig config);

    // One optimization step over a batch of feature matrices; returns the log.
    VaeStepLog step(const std::vector<const nn::Tensor*>& batch);

    // Runs the loop over the dataset. on_log fires every log_every steps and on
    // the final step.
    void train(const std::vector<nn::Tensor>& dataset,
               const std::function<void(const VaeStepLog&)>& on_log = {});

    nn::Adam& optimizer() { return adam_; }
    Rng& rng() { return rng_; }

private:
    MotionVae& model_;
    VaeTrainConfig config_;
    nn::Adam adam_;
    Rng rng_;
    int step_count_ = 0;
    int last_finite_step_ = -1;
};

} // namespace egtw::vae
