#include "egtw/diffusion/trainer.hpp"

#include <cmath>

#include "egtw/core/error.hpp"
#include "egtw/dit/tokenizers.hpp"

namespace egtw::diffusion {

std::vector<std::string> DiffusionTrainer::trainable_names(const dit::DitModel& model, bool with_video) {
    std::vector<std::string> names;
    for (const auto& name : model.params().names()) {
        if (with_video || dit::DitModel::is_motion_branch_param(name)) names.push_back(name);
    }
    return names;
}

DiffusionTrainer::DiffusionTrainer(dit::DitModel& model, const NoiseSchedule& schedule,
                                   DiffusionTrainConfig config, bool with_video, dit::TokenLayout layout)
    : model_(model),
      schedule_(schedule),
      config_(config),
      with_video_(with_video),
      layout_(layout),
      adam_(config.adam, model.params(), trainable_names(model, with_video)),
      rng_(Rng(config.seed).split("dit-train").seed()) {
    layout_.validate();
    if (with_video_ && layout_.video_frames < 1)
        throw ConfigError("diffusion trainer: joint stage needs video tokens in the layout");
    if (!with_video_ && layout_.video_frames != 0)
        throw ConfigError("diffusion trainer: pretraining layout must not contain video tokens");
    mask_ = config_.no_mask || layout_.video_frames == 0 ? dit::full_attention_mask(layout_)
                                                         : dit::build_interaction_mask(layout_);
}

StepDraw DiffusionTrainer::draw(const TrainItem& item) {
    StepDraw d;
    const int T = schedule_.max_timestep;
    d.t_motion = static_cast<int>(rng_.uniform_int(0, T));
    if (with_video_) {
        d.t_video = config_.sync_timesteps ? d.t_motion : static_cast<int>(rng_.uniform_int(0, T));
        d.eps_video = nn::Tensor::randn(item.video_latent.shape, rng_);
    } else {
        // the unified timestep embedding still needs a video slot; absent video
        // is treated as maximally noised
        d.t_video = T;
    }
    d.eps_motion = nn::Tensor::randn(item.motion_latent.shape, rng_);
    d.drop_text = rng_.uniform() < config_.text_dropout;
    return d;
}

nn::Var DiffusionTrainer::item_loss(const TrainItem& item, const StepDraw& draw) const {
    dit::DitInput input;
    input.layout = layout_;
    input.t_video = draw.t_video;
    input.t_motion = draw.t_motion;
    input.text_null = draw.drop_text;
    if (!draw.drop_text) {
        input.text_ids = item.text_ids;
        input.text_valid = item.text_valid;
    }

    nn::Tensor video_eps_tokens;
    if (with_video_) {
        if (item.video_latent.numel() == 0) throw ValidationError("diffusion trainer: missing video latent");
        const nn::Tensor noisy = schedule_.add_noise(item.video_latent, draw.t_video, draw.eps_video);
        input.video_tokens = dit::patchify(noisy, model_.config().patch);
        video_eps_tokens = dit::patchify(draw.eps_video, model_.config().patch);
    }
    input.motion_latent = schedule_.add_noise(item.motion_latent, draw.t_motion, draw.eps_motion);

    const dit::DitForward fwd = model_.forward(input, mask_);
    // Eq. of the joint objective: mean-squared error per modality, two terms
    // summed (motion-only during pretraining)
    nn::Var loss = nn::mean_squared_error(fwd.motion_eps, nn::constant(draw.eps_motion));
    if (with_video_)
        loss = nn::add(loss, nn::mean_squared_error(fwd.video_eps, nn::constant(video_eps_tokens)));
    return loss;
}

double DiffusionTrainer::step(const std::vector<const TrainItem*>& batch) {
    if (batch.empty()) throw ValidationError("diffusion trainer: empty batch");
    nn::zero_grad(model_.params().all());
    nn::Var total;
    for (const TrainItem* item : batch) {
        const StepDraw d = draw(*item);
        nn::Var l = item_loss(*item, d);
        total = total ? nn::add(total, l) : l;
    }
    total = nn::mul_scalar(total, 1.0 / static_cast<double>(batch.size()));
    const double value = total->value.data[0];
    if (!std::isfinite(value))
        throw TrainingDiverged("diffusion training: non-finite loss at step " + std::to_string(step_count_) +
                               " (last good checkpoint: " + last_checkpoint_ + ")");
    nn::backward(total);
    adam_.step();
    ++step_count_;
    return value;
}

void DiffusionTrainer::train(const std::vector<TrainItem>& dataset,
                             const std::function<void(int, double)>& on_log) {
    if (dataset.empty()) throw ValidationError("diffusion trainer: empty dataset");
    Rng order = rng_.split("order");
    std::vector<int> indices(dataset.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    std::size_t cursor = indices.size();

    for (int s = 0; s < config_.steps; ++s) {
        std::vector<const TrainItem*> batch;
        for (int b = 0; b < config_.batch_size; ++b) {
            if (cursor >= indices.size()) {
                for (std::size_t i = indices.size(); i > 1; --i)
                    std::swap(indices[i - 1],
                              indices[static_cast<std::size_t>(order.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
                cursor = 0;
            }
            batch.push_back(&dataset[static_cast<std::size_t>(indices[cursor++])]);
        }
        const double loss = step(batch);
        if (on_log && (s % config_.log_every == 0 || s + 1 == config_.steps)) on_log(s, loss);
    }
}

double DiffusionTrainer::eval_loss(const std::vector<TrainItem>& dataset, std::uint64_t seed,
                                   int draws_per_item) {
    Rng saved = rng_;
    rng_ = Rng(Rng(seed).split("eval-draws").seed());
    double total = 0;
    int count = 0;
    for (const auto& item : dataset) {
        for (int i = 0; i < draws_per_item; ++i) {
            const StepDraw d = draw(item);
            total += item_loss(item, d)->value.data[0];
            ++count;
        }
    }
    rng_ = saved;
    return total / count;
}

} // namespace egtw::diffusion
