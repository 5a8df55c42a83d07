#pragma once

#include <functional>
#include <string>
#include <vector>

#include "egtw/core/rng.hpp"
#include "egtw/diffusion/schedule.hpp"
#include "egtw/dit/mask.hpp"
#include "egtw/dit/model.hpp"

namespace egtw::diffusion {

struct DiffusionTrainConfig {
    int steps = 1000;
    int batch_size = 8;
    nn::AdamConfig adam{2e-3, 0.9, 0.999, 1e-8, 50};
    std::uint64_t seed = 1;
    double text_dropout = 0.1;
    bool sync_timesteps = false; // w/o-AD ablation: t_v == t_m
    bool no_mask = false;        // w/o-IM ablation: full attention
    int log_every = 20;
};

// Cached encodings of one training sample.
struct TrainItem {
    std::vector<int> text_ids;
    int text_valid = 0;
    nn::Tensor video_latent;  // (F_v, H8, W8, C_v); empty during text-to-motion pretraining
    nn::Tensor motion_latent; // (F_m, C_m)
};

// One random draw for a training step; exposed so tests can pin it.
struct StepDraw {
    int t_video = 0;
    int t_motion = 0;
    bool drop_text = false;
    nn::Tensor eps_video; // empty when video absent
    nn::Tensor eps_motion;
};

// Asynchronous two-timestep denoising trainer. Stage 2 (with_video = false)
// optimizes the motion term only and keeps every non-motion-branch weight
// frozen; stage 3 optimizes the sum of both modality terms with all weights
// trainable.
class DiffusionTrainer {
public:
    DiffusionTrainer(dit::DitModel& model, const NoiseSchedule& schedule, DiffusionTrainConfig config,
                     bool with_video, dit::TokenLayout layout);

    StepDraw draw(const TrainItem& item);
    nn::Var item_loss(const TrainItem& item, const StepDraw& draw) const;

    double step(const std::vector<const TrainItem*>& batch);
    void train(const std::vector<TrainItem>& dataset,
               const std::function<void(int step, double loss)>& on_log = {});

    // Fixed-draw evaluation loss over the dataset (for before/after comparisons).
    double eval_loss(const std::vector<TrainItem>& dataset, std::uint64_t seed, int draws_per_item = 8);

    const nn::AttentionMask& mask() const { return mask_; }
    const dit::TokenLayout& layout() const { return layout_; }
    nn::Adam& optimizer() { return adam_; }
    Rng& rng() { return rng_; }
    void set_last_checkpoint(const std::string& path) { last_checkpoint_ = path; }
    static std::vector<std::string> trainable_names(const dit::DitModel& model, bool with_video);

private:
    dit::DitModel& model_;
    const NoiseSchedule& schedule_;
    DiffusionTrainConfig config_;
    bool with_video_;
    dit::TokenLayout layout_;
    nn::AttentionMask mask_;
    nn::Adam adam_;
    Rng rng_;
    int step_count_ = 0;
    std::string last_checkpoint_ = "<none>";
};

} // namespace egtw::diffusion
