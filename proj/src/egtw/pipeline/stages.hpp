#pragma once

#include <map>
#include <optional>
#include <string>

#include "egtw/diffusion/sampler.hpp"
#include "egtw/pipeline/data.hpp"

namespace egtw::pipeline {

struct StageResult {
    std::string checkpoint_path;
    double initial_eval_loss = 0.0;
    double final_eval_loss = 0.0;
    std::map<std::string, double> final_group_error; // stage 1 only
    double wall_seconds = 0.0;
    double tokens_per_second = 0.0; // transformer stages
};

// Motion VAE training. Emits loss.csv, loss.svg, checkpoint.egtw and
// last_good.egtw under run_dir; optionally resumes (weights, optimizer state
// and step counter) from an earlier checkpoint of the same shape.
StageResult run_stage1(const ExperimentConfig& config, const std::string& run_dir,
                       const std::string& resume_checkpoint = "");

// Text-to-motion pretraining: motion branch only, no video tokens, text branch
// frozen. Requires the stage-1 checkpoint for the motion tokenizer.
StageResult run_stage2(const ExperimentConfig& config, const std::string& vae_checkpoint,
                       const std::string& run_dir);

// Joint training from the stage-2 checkpoint, with periodic evaluation on the
// held-out split when configured.
StageResult run_stage3(const ExperimentConfig& config, const std::string& stage2_checkpoint,
                       const std::string& run_dir);

// ---- sampling from trained checkpoints ----

struct LoadedJointModel {
    ExperimentConfig config;
    std::unique_ptr<dit::DitModel> model;
    std::unique_ptr<vae::MotionVae> vae;
    std::string stage;
};

LoadedJointModel load_joint_checkpoint(const std::string& path);
// Rebuilds just the VAE from a stage-1 checkpoint.
std::unique_ptr<vae::MotionVae> load_vae_checkpoint(const std::string& path, ExperimentConfig* out_config);

struct GenerationResult {
    kin::MotionSequence motion;
    std::vector<synth::Image> video;
    nn::Tensor motion_latent;
    nn::Tensor video_latent;
};

// Runs the reverse sampler conditioned on `init` (text plus the I^0/P^0
// first-frame constraint; TM2V reads the whole motion, TV2M the whole video)
// and decodes both modalities.
GenerationResult generate_sample_from_model(const LoadedJointModel& loaded, const LoadedData& data,
                                            const synth::Sample& init, diffusion::SampleMode mode,
                                            int steps, std::uint64_t seed,
                                            const std::optional<std::string>& prompt_override = {});

} // namespace egtw::pipeline
