#pragma once

#include <string>

#include <json.hpp>

#include "egtw/diffusion/cfg.hpp"
#include "egtw/diffusion/schedule.hpp"
#include "egtw/dit/config.hpp"
#include "egtw/kin/representation.hpp"
#include "egtw/nn/params.hpp"
#include "egtw/vae/vae.hpp"

namespace egtw::pipeline {

enum class Stage {
    Vae,         // motion VAE training
    T2mPretrain, // text-to-motion pretraining, text branch frozen
    Joint,       // joint text-video-motion training
};

Stage stage_from_string(const std::string& s);
std::string to_string(Stage stage);

struct OptimizerConfig {
    double lr = 3e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int warmup_steps = 100;
    int batch_size = 8;

    nn::AdamConfig adam() const { return {lr, beta1, beta2, eps, warmup_steps}; }
};

struct TrainScheduleConfig {
    int steps = 2000;
    int log_every = 20;
    int eval_every = 0;       // 0 disables cadence evaluation
    int eval_samples = 4;     // held-out samples per cadence point
    int eval_sample_steps = 20;
    double text_dropout = 0.1;
};

struct AblationConfig {
    bool no_mask = false;        // w/o IM: full attention
    bool sync_timesteps = false; // w/o AD: shared timestep + vanilla CFG sampling
};

// Config for one run. The seed is mandatory; all randomness in the run flows
// from it, split by purpose.
struct ExperimentConfig {
    Stage stage = Stage::Vae;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string train_data;
    std::string eval_data; // optional; falls back to train_data

    kin::RepresentationKind representation = kin::RepresentationKind::HeadCentric;
    vae::VaeConfig vae;       // feature_width filled from the representation layout
    dit::DitConfig model;     // vocab_size filled from the grammar
    diffusion::NoiseSchedule schedule = diffusion::NoiseSchedule::linear();
    diffusion::GuidanceScales guidance;
    OptimizerConfig optimizer;
    TrainScheduleConfig train;
    AblationConfig ablation;

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);

    // Desk-scale defaults matching the toy dataset dimensions.
    static ExperimentConfig toy_defaults();
};

// Run root resolution: relative run directories land under $EGTW_RUN_ROOT
// (default "runs").
std::string run_root();
std::string resolve_run_dir(const std::string& dir);

} // namespace egtw::pipeline
