#include "egtw/pipeline/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "egtw/core/error.hpp"
#include "egtw/synth/text_grammar.hpp"

namespace egtw::pipeline {

Stage stage_from_string(const std::string& s) {
    if (s == "vae") return Stage::Vae;
    if (s == "t2m_pretrain") return Stage::T2mPretrain;
    if (s == "joint") return Stage::Joint;
    throw ConfigError("unknown stage: " + s);
}

std::string to_string(Stage stage) {
    switch (stage) {
        case Stage::Vae: return "vae";
        case Stage::T2mPretrain: return "t2m_pretrain";
        case Stage::Joint: return "joint";
    }
    throw ConfigError("unknown stage");
}

void ExperimentConfig::validate() const {
    if (!seed_set) throw ConfigError("experiment config: seed is mandatory");
    if (train_data.empty()) throw ConfigError("experiment config: train data path unset");
    if (train.steps < 1) throw ConfigError("experiment config: steps must be >= 1");
    if (train.text_dropout < 0 || train.text_dropout > 1)
        throw ConfigError("experiment config: text dropout must be in [0, 1]");
    guidance.validate();
    if (stage != Stage::Vae) model.validate();
    // stage-valid combinations: the vae stage ignores ablation flags
    if (stage == Stage::Vae && (ablation.no_mask || ablation.sync_timesteps))
        throw ConfigError("experiment config: ablation flags apply to transformer stages only");
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["stage"] = to_string(stage);
    j["seed"] = seed;
    j["data"] = {{"train", train_data}, {"eval", eval_data}};
    j["representation"] = kin::to_string(representation);
    j["vae"] = vae.to_json();
    j["model"] = model.to_json();
    j["schedule"] = schedule.to_json();
    j["guidance"] = {{"w_t", guidance.w_t}, {"w_v", guidance.w_v}, {"w_m", guidance.w_m}};
    j["optimizer"] = {{"lr", optimizer.lr},       {"beta1", optimizer.beta1},
                      {"beta2", optimizer.beta2}, {"eps", optimizer.eps},
                      {"warmup_steps", optimizer.warmup_steps}, {"batch_size", optimizer.batch_size}};
    j["train"] = {{"steps", train.steps},
                  {"log_every", train.log_every},
                  {"eval_every", train.eval_every},
                  {"eval_samples", train.eval_samples},
                  {"eval_sample_steps", train.eval_sample_steps},
                  {"text_dropout", train.text_dropout}};
    j["ablation"] = {{"no_mask", ablation.no_mask}, {"sync_timesteps", ablation.sync_timesteps}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig c = toy_defaults();
    if (j.contains("stage")) c.stage = stage_from_string(j.at("stage").get<std::string>());
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_set = true;
    } else {
        c.seed_set = false;
    }
    if (j.contains("data")) {
        c.train_data = j.at("data").value("train", c.train_data);
        c.eval_data = j.at("data").value("eval", c.eval_data);
    }
    if (j.contains("representation"))
        c.representation = kin::representation_from_string(j.at("representation").get<std::string>());
    if (j.contains("vae")) c.vae = vae::VaeConfig::from_json(j.at("vae"));
    if (j.contains("model")) {
        c.model = dit::DitConfig::from_json(j.at("model"));
        c.model.vocab_size = synth::vocabulary().size(); // fixed by the grammar
    }
    if (j.contains("schedule")) c.schedule = diffusion::NoiseSchedule::from_json(j.at("schedule"));
    if (j.contains("guidance")) {
        c.guidance.w_t = j.at("guidance").value("w_t", c.guidance.w_t);
        c.guidance.w_v = j.at("guidance").value("w_v", c.guidance.w_v);
        c.guidance.w_m = j.at("guidance").value("w_m", c.guidance.w_m);
    }
    if (j.contains("optimizer")) {
        const auto& o = j.at("optimizer");
        c.optimizer.lr = o.value("lr", c.optimizer.lr);
        c.optimizer.beta1 = o.value("beta1", c.optimizer.beta1);
        c.optimizer.beta2 = o.value("beta2", c.optimizer.beta2);
        c.optimizer.eps = o.value("eps", c.optimizer.eps);
        c.optimizer.warmup_steps = o.value("warmup_steps", c.optimizer.warmup_steps);
        c.optimizer.batch_size = o.value("batch_size", c.optimizer.batch_size);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        c.train.steps = t.value("steps", c.train.steps);
        c.train.log_every = t.value("log_every", c.train.log_every);
        c.train.eval_every = t.value("eval_every", c.train.eval_every);
        c.train.eval_samples = t.value("eval_samples", c.train.eval_samples);
        c.train.eval_sample_steps = t.value("eval_sample_steps", c.train.eval_sample_steps);
        c.train.text_dropout = t.value("text_dropout", c.train.text_dropout);
    }
    if (j.contains("ablation")) {
        c.ablation.no_mask = j.at("ablation").value("no_mask", false);
        c.ablation.sync_timesteps = j.at("ablation").value("sync_timesteps", false);
    }
    return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    nlohmann::json j;
    is >> j;
    return from_json(j);
}

ExperimentConfig ExperimentConfig::toy_defaults() {
    ExperimentConfig c;
    c.stage = Stage::Vae;
    c.seed = 1;
    c.seed_set = true;

    c.vae.widths = {48, 64, 80};
    c.vae.latent_channels = 16;
    c.vae.norm_groups = 4;
    c.vae.resnet_blocks = 1;

    c.model.width = 64;
    c.model.motion_width = 32;
    c.model.text_width = 64;
    c.model.video_width = 64;
    c.model.layers = 4;
    c.model.heads = 4;
    c.model.patch = 4;
    c.model.text_len = 8;
    c.model.video_channels = 3;
    c.model.motion_channels = 16;
    c.model.mlp_ratio = 2;
    c.model.time_embed_dim = 32;
    c.model.vocab_size = synth::vocabulary().size();

    c.schedule = diffusion::NoiseSchedule::linear(1000, 1e-4, 2e-2);
    return c;
}

std::string run_root() {
    const char* env = std::getenv("EGTW_RUN_ROOT");
    return env && *env ? env : "runs";
}

std::string resolve_run_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    if (p.is_absolute()) return dir;
    return (std::filesystem::path(run_root()) / p).string();
}

} // namespace egtw::pipeline
