#include "egtw/pipeline/stages.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/core/table.hpp"
#include "egtw/diffusion/dit_denoiser.hpp"
#include "egtw/dit/tokenizers.hpp"
#include "egtw/metrics/evaluate.hpp"
#include "egtw/nn/checkpoint.hpp"
#include "egtw/synth/text_grammar.hpp"
#include "egtw/vae/trainer.hpp"

namespace egtw::pipeline {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_loss_artifacts(const std::string& run_dir, const CsvTable& table, bool log_scale) {
    table.save(run_dir + "/loss.csv");
    SvgSeries series;
    series.label = "train loss";
    for (const auto& row : table.rows) {
        series.x.push_back(std::stod(row[0]));
        series.y.push_back(std::stod(row[1]));
    }
    write_svg_line_plot(run_dir + "/loss.svg", "training loss", {series}, "step", "loss", log_scale);
}

void write_summary(const std::string& run_dir, const nlohmann::json& summary) {
    std::ofstream os(run_dir + "/summary.json");
    os << summary.dump(2) << '\n';
}

nlohmann::json provenance_entry(const ExperimentConfig& config, const LoadedData& data,
                                const std::string& parent) {
    return {{"stage", to_string(config.stage)},
            {"seed", config.seed},
            {"dataset_hash", data.dataset_hash},
            {"parent", parent}};
}

vae::VaeConfig vae_config_for(const ExperimentConfig& config, int joint_count) {
    vae::VaeConfig vc = config.vae;
    vc.feature_width = kin::layout_for(config.representation, joint_count).width;
    return vc;
}

dit::DitConfig dit_config_for(const ExperimentConfig& config) {
    dit::DitConfig mc = config.model;
    mc.vocab_size = synth::vocabulary().size();
    mc.motion_channels = config.vae.latent_channels;
    return mc;
}

} // namespace

StageResult run_stage1(const ExperimentConfig& config, const std::string& run_dir,
                       const std::string& resume_checkpoint) {
    config.validate();
    if (config.stage != Stage::Vae) throw ConfigError("run_stage1 requires stage = vae");
    fs::create_directories(run_dir);

    const LoadedData data = load_data(config.train_data);
    const auto features = encode_features(data, config.representation);
    const auto layout = kin::layout_for(config.representation, data.skeleton.joint_count);

    vae::MotionVae model(vae_config_for(config, data.skeleton.joint_count), layout,
                         Rng(config.seed).split("vae-init").seed());

    int start_step = 0;
    if (!resume_checkpoint.empty()) {
        start_step = static_cast<int>(nn::peek_checkpoint(resume_checkpoint).step);
        if (start_step >= config.train.steps)
            throw ConfigError("resume: checkpoint already has the requested steps");
    }

    vae::VaeTrainConfig tc;
    tc.steps = config.train.steps - start_step;
    tc.batch_size = std::min<int>(config.optimizer.batch_size, static_cast<int>(features.size()));
    tc.adam = config.optimizer.adam();
    tc.adam.decay_steps = config.train.steps;
    tc.seed = config.seed;
    tc.log_every = config.train.log_every;
    vae::VaeTrainer trainer(model, tc);

    if (!resume_checkpoint.empty()) {
        const nn::CheckpointMeta meta =
            nn::load_checkpoint(resume_checkpoint, model.params(), &trainer.optimizer());
        trainer.rng().restore_state(meta.rng_state);
    }

    {
        std::ofstream os(run_dir + "/config.json");
        os << config.to_json().dump(2) << '\n';
    }

    const auto start = Clock::now();
    CsvTable loss_table;
    loss_table.header = {"step", "total", "head_3d", "head_6d", "joint_3d", "joint_6d", "kl"};

    auto save_ckpt = [&](const std::string& name, int step) {
        nn::CheckpointMeta meta;
        meta.stage = "vae";
        meta.config = config.to_json();
        meta.config["vae"]["feature_width"] = model.config().feature_width;
        meta.step = step;
        meta.provenance = nlohmann::json::array({provenance_entry(config, data, resume_checkpoint)});
        meta.rng_state = trainer.rng().state_string();
        nn::save_checkpoint(run_dir + "/" + name, meta, model.params(), &trainer.optimizer());
    };

    trainer.train(features, [&](const vae::VaeStepLog& log) {
        const int global_step = start_step + log.step;
        loss_table.rows.push_back({std::to_string(global_step), format_double(log.total),
                                   format_double(log.group_rec.count("head_3d") ? log.group_rec.at("head_3d") : 0.0),
                                   format_double(log.group_rec.count("head_6d") ? log.group_rec.at("head_6d") : 0.0),
                                   format_double(log.group_rec.count("joint_3d") ? log.group_rec.at("joint_3d") : 0.0),
                                   format_double(log.group_rec.count("joint_6d") ? log.group_rec.at("joint_6d") : 0.0),
                                   format_double(log.kl)});
        save_ckpt("last_good.egtw", global_step + 1);
    });

    write_loss_artifacts(run_dir, loss_table, true);
    save_ckpt("checkpoint.egtw", start_step + tc.steps);

    StageResult result;
    result.checkpoint_path = run_dir + "/checkpoint.egtw";
    result.wall_seconds = seconds_since(start);

    // deterministic mean-latent reconstruction error per group
    std::map<std::string, double> worst;
    for (const auto& f : features) {
        const auto err = model.reconstruction_group_error(f);
        for (const auto& [g, v] : err) worst[g] = std::max(worst[g], v);
    }
    result.final_group_error = worst;

    nlohmann::json summary = {{"stage", "vae"},
                              {"steps", start_step + tc.steps},
                              {"wall_seconds", result.wall_seconds},
                              {"dataset_hash", data.dataset_hash}};
    for (const auto& [g, v] : worst) summary["max_group_reconstruction_error"][g] = v;
    write_summary(run_dir, summary);
    return result;
}

namespace {

std::unique_ptr<vae::MotionVae> rebuild_vae(const nlohmann::json& ckpt_config, const ChunkMap& map,
                                            const std::string& prefix) {
    const ExperimentConfig stored = ExperimentConfig::from_json(ckpt_config);
    vae::VaeConfig vc = vae::VaeConfig::from_json(ckpt_config.at("vae"));
    // reconstruct the layout from the stored feature width and representation
    const auto kind = stored.representation;
    int J = 2;
    while (kin::layout_for(kind, J).width < vc.feature_width) ++J;
    if (kin::layout_for(kind, J).width != vc.feature_width)
        throw FormatError("checkpoint: feature width does not match any joint count");
    auto vae_model = std::make_unique<vae::MotionVae>(vc, kin::layout_for(kind, J), 0);
    vae_model->params().load(map, prefix);
    return vae_model;
}

struct TransformerStageSetup {
    LoadedData data;
    std::unique_ptr<vae::MotionVae> vae;
    std::unique_ptr<dit::DitModel> model;
    std::vector<diffusion::TrainItem> items;
    dit::TokenLayout layout;
};

} // namespace

StageResult run_stage2(const ExperimentConfig& config, const std::string& vae_checkpoint,
                       const std::string& run_dir) {
    config.validate();
    if (config.stage != Stage::T2mPretrain) throw ConfigError("run_stage2 requires stage = t2m_pretrain");
    fs::create_directories(run_dir);

    const LoadedData data = load_data(config.train_data);
    const ChunkMap vae_map = read_chunk_file(vae_checkpoint, FileKind::Checkpoint);
    auto vae_model = rebuild_vae(nlohmann::json::parse(vae_map.string("config")), vae_map, "tensor/");

    dit::DitModel model(dit_config_for(config), Rng(config.seed).split("dit-init").seed());
    const auto items = make_train_items(data, *vae_model, config.representation, model.config(), false);
    const auto layout = make_layout(model.config(), data, false);

    diffusion::DiffusionTrainConfig tc;
    tc.steps = config.train.steps;
    tc.batch_size = std::min<int>(config.optimizer.batch_size, static_cast<int>(items.size()));
    tc.adam = config.optimizer.adam();
    tc.adam.decay_steps = config.train.steps;
    tc.seed = config.seed;
    tc.text_dropout = config.train.text_dropout;
    tc.sync_timesteps = config.ablation.sync_timesteps;
    tc.no_mask = config.ablation.no_mask;
    tc.log_every = config.train.log_every;
    diffusion::DiffusionTrainer trainer(model, config.schedule, tc, false, layout);

    {
        std::ofstream os(run_dir + "/config.json");
        os << config.to_json().dump(2) << '\n';
    }

    StageResult result;
    result.initial_eval_loss = trainer.eval_loss(items, config.seed + 101);

    auto save_ckpt = [&](const std::string& name, int step) {
        nn::CheckpointMeta meta;
        meta.stage = "t2m_pretrain";
        meta.config = config.to_json();
        meta.config["vae"]["feature_width"] = vae_model->config().feature_width;
        meta.step = step;
        meta.provenance = nlohmann::json::array({provenance_entry(config, data, vae_checkpoint)});
        meta.rng_state = trainer.rng().state_string();
        ChunkMap map;
        map.add_string("stage", meta.stage);
        map.add_string("config", meta.config.dump());
        map.add_scalar_i64("step", meta.step);
        map.add_string("provenance", meta.provenance.dump());
        map.add_string("rng_state", meta.rng_state);
        model.params().save(map, "tensor/");
        vae_model->params().save(map, "vae_tensor/");
        write_chunk_file(run_dir + "/" + name, FileKind::Checkpoint, map);
        trainer.set_last_checkpoint(run_dir + "/" + name);
    };

    const auto start = Clock::now();
    CsvTable loss_table;
    loss_table.header = {"step", "total"};
    trainer.train(items, [&](int step, double loss) {
        loss_table.rows.push_back({std::to_string(step), format_double(loss)});
        save_ckpt("last_good.egtw", step + 1);
    });
    result.wall_seconds = seconds_since(start);
    const double tokens =
        static_cast<double>(layout.total_tokens()) * tc.batch_size * config.train.steps;
    result.tokens_per_second = tokens / result.wall_seconds;

    write_loss_artifacts(run_dir, loss_table, true);
    save_ckpt("checkpoint.egtw", config.train.steps);
    result.checkpoint_path = run_dir + "/checkpoint.egtw";
    result.final_eval_loss = trainer.eval_loss(items, config.seed + 101);

    write_summary(run_dir, {{"stage", "t2m_pretrain"},
                            {"steps", config.train.steps},
                            {"wall_seconds", result.wall_seconds},
                            {"tokens_per_second", result.tokens_per_second},
                            {"initial_eval_loss", result.initial_eval_loss},
                            {"final_eval_loss", result.final_eval_loss},
                            {"dataset_hash", data.dataset_hash}});
    return result;
}

namespace {

// TV2M cadence evaluation: sample motion conditioned on each eval sample's
// text+video, then score against the sample's ground truth.
std::optional<metrics::EvaluationReport> cadence_eval(const ExperimentConfig& config,
                                                      const LoadedData& eval_data,
                                                      const dit::DitModel& model,
                                                      const vae::MotionVae& vae_model, int max_samples,
                                                      int sample_steps, std::uint64_t seed) {
    std::vector<synth::Sample> refs;
    std::vector<kin::MotionSequence> generated;
    const auto layout = make_layout(model.config(), eval_data, true);
    diffusion::DitDenoiser denoiser(model, layout, config.ablation.no_mask);

    const int n = std::min<int>(max_samples, static_cast<int>(eval_data.samples.size()));
    for (int i = 0; i < n; ++i) {
        const synth::Sample& sample = eval_data.samples[static_cast<std::size_t>(i)];
        diffusion::SamplerConfig sc;
        sc.mode = diffusion::SampleMode::TV2M;
        sc.steps = sample_steps;
        sc.seed = seed + static_cast<std::uint64_t>(i);
        sc.scales = config.guidance;
        sc.vanilla_cfg = false;

        diffusion::SampleConditioning cond;
        const auto& vocab = synth::vocabulary();
        cond.text.ids = vocab.encode(sample.text, model.config().text_len);
        cond.text.valid = 0;
        for (int id : cond.text.ids)
            if (id != vocab.pad_id()) ++cond.text.valid;
        cond.video_latent_clean = dit::video_to_latent(sample.video);
        cond.motion_latent_clean =
            vae_model.encode_mean(feature_tensor(kin::encode_representation(config.representation, sample.motion)));

        try {
            const diffusion::SampleResult out = diffusion::reverse_sample(denoiser, config.schedule, sc, cond);
            const nn::Tensor features = vae_model.decode_tensor(out.motion_latent);
            const auto rep = feature_sequence_from_tensor(features, config.representation,
                                                          eval_data.skeleton.joint_count,
                                                          sample.motion.fps);
            generated.push_back(kin::decode_representation(rep, eval_data.skeleton));
            refs.push_back(sample);
        } catch (const DegenerateRotationError&) {
            // undertrained decoders can emit invalid 6D blocks; skip honestly
        }
    }
    if (refs.empty()) return std::nullopt;
    metrics::EvaluateConfig ec;
    ec.rprec = false;
    return metrics::evaluate_samples(refs, generated, eval_data.sample_config, ec);
}

} // namespace

StageResult run_stage3(const ExperimentConfig& config, const std::string& stage2_checkpoint,
                       const std::string& run_dir) {
    config.validate();
    if (config.stage != Stage::Joint) throw ConfigError("run_stage3 requires stage = joint");
    fs::create_directories(run_dir);

    const LoadedData data = load_data(config.train_data);
    const LoadedData eval_data = config.eval_data.empty() ? data : load_data(config.eval_data);

    const ChunkMap parent = read_chunk_file(stage2_checkpoint, FileKind::Checkpoint);
    auto vae_model = rebuild_vae(nlohmann::json::parse(parent.string("config")), parent, "vae_tensor/");

    dit::DitModel model(dit_config_for(config), Rng(config.seed).split("dit-init").seed());
    model.params().load(parent, "tensor/"); // stage-3 init = stage-2 final weights

    const auto items = make_train_items(data, *vae_model, config.representation, model.config(), true);
    const auto layout = make_layout(model.config(), data, true);

    diffusion::DiffusionTrainConfig tc;
    tc.steps = config.train.steps;
    tc.batch_size = std::min<int>(config.optimizer.batch_size, static_cast<int>(items.size()));
    tc.adam = config.optimizer.adam();
    tc.adam.decay_steps = config.train.steps;
    tc.seed = config.seed;
    tc.text_dropout = config.train.text_dropout;
    tc.sync_timesteps = config.ablation.sync_timesteps;
    tc.no_mask = config.ablation.no_mask;
    tc.log_every = config.train.log_every;
    diffusion::DiffusionTrainer trainer(model, config.schedule, tc, true, layout);

    {
        std::ofstream os(run_dir + "/config.json");
        os << config.to_json().dump(2) << '\n';
    }

    StageResult result;
    result.initial_eval_loss = trainer.eval_loss(items, config.seed + 202);

    auto save_ckpt = [&](const std::string& name, int step) {
        nlohmann::json cfg = config.to_json();
        cfg["vae"]["feature_width"] = vae_model->config().feature_width;
        nlohmann::json prov = nlohmann::json::parse(parent.string("provenance"));
        prov.push_back(provenance_entry(config, data, stage2_checkpoint));
        ChunkMap map;
        map.add_string("stage", "joint");
        map.add_string("config", cfg.dump());
        map.add_scalar_i64("step", step);
        map.add_string("provenance", prov.dump());
        map.add_string("rng_state", trainer.rng().state_string());
        model.params().save(map, "tensor/");
        vae_model->params().save(map, "vae_tensor/");
        write_chunk_file(run_dir + "/" + name, FileKind::Checkpoint, map);
        trainer.set_last_checkpoint(run_dir + "/" + name);
    };

    CsvTable loss_table;
    loss_table.header = {"step", "total"};
    CsvTable eval_table;
    eval_table.header = {"step", "trans_err", "rot_err", "hand_score", "m_fid", "r_prec", "mm_dist"};

    auto run_cadence = [&](int step) {
        const auto report = cadence_eval(config, eval_data, model, *vae_model, config.train.eval_samples,
                                         config.train.eval_sample_steps, config.seed + 303);
        auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : "n/a"; };
        if (report) {
            eval_table.rows.push_back({std::to_string(step), cell(report->mean_trans_err),
                                       cell(report->mean_rot_err), cell(report->mean_hand_score),
                                       cell(report->m_fid), cell(report->r_precision), cell(report->mm_dist)});
        } else {
            eval_table.rows.push_back({std::to_string(step), "n/a", "n/a", "n/a", "n/a", "n/a", "n/a"});
        }
    };

    const auto start = Clock::now();
    trainer.train(items, [&](int step, double loss) {
        loss_table.rows.push_back({std::to_string(step), format_double(loss)});
        save_ckpt("last_good.egtw", step + 1);
        if (config.train.eval_every > 0 && step > 0 && step % config.train.eval_every == 0) run_cadence(step);
    });
    result.wall_seconds = seconds_since(start);
    const double tokens =
        static_cast<double>(layout.total_tokens()) * tc.batch_size * config.train.steps;
    result.tokens_per_second = tokens / result.wall_seconds;

    run_cadence(config.train.steps); // final evaluation point
    write_loss_artifacts(run_dir, loss_table, true);
    eval_table.save(run_dir + "/eval.csv");
    save_ckpt("checkpoint.egtw", config.train.steps);
    result.checkpoint_path = run_dir + "/checkpoint.egtw";
    result.final_eval_loss = trainer.eval_loss(items, config.seed + 202);

    write_summary(run_dir, {{"stage", "joint"},
                            {"steps", config.train.steps},
                            {"wall_seconds", result.wall_seconds},
                            {"tokens_per_second", result.tokens_per_second},
                            {"initial_eval_loss", result.initial_eval_loss},
                            {"final_eval_loss", result.final_eval_loss},
                            {"dataset_hash", data.dataset_hash}});
    return result;
}

LoadedJointModel load_joint_checkpoint(const std::string& path) {
    const ChunkMap map = read_chunk_file(path, FileKind::Checkpoint);
    LoadedJointModel out;
    out.stage = map.string("stage");
    if (out.stage != "joint" && out.stage != "t2m_pretrain")
        throw FormatError("not a transformer checkpoint: " + path);
    const nlohmann::json cfg = nlohmann::json::parse(map.string("config"));
    out.config = ExperimentConfig::from_json(cfg);
    out.vae = rebuild_vae(cfg, map, "vae_tensor/");
    out.model = std::make_unique<dit::DitModel>(dit_config_for(out.config), 0);
    out.model->params().load(map, "tensor/");
    return out;
}

std::unique_ptr<vae::MotionVae> load_vae_checkpoint(const std::string& path, ExperimentConfig* out_config) {
    const ChunkMap map = read_chunk_file(path, FileKind::Checkpoint);
    if (map.string("stage") != "vae") throw FormatError("not a vae checkpoint: " + path);
    const nlohmann::json cfg = nlohmann::json::parse(map.string("config"));
    if (out_config) *out_config = ExperimentConfig::from_json(cfg);
    return rebuild_vae(cfg, map, "tensor/");
}

GenerationResult generate_sample_from_model(const LoadedJointModel& loaded, const LoadedData& data,
                                            const synth::Sample& init, diffusion::SampleMode mode,
                                            int steps, std::uint64_t seed,
                                            const std::optional<std::string>& prompt_override) {
    const ExperimentConfig& config = loaded.config;
    const auto layout = make_layout(loaded.model->config(), data, true);
    diffusion::DitDenoiser denoiser(*loaded.model, layout, config.ablation.no_mask);

    diffusion::SamplerConfig sc;
    sc.mode = mode;
    sc.steps = steps;
    sc.seed = seed;
    sc.scales = config.guidance;
    sc.vanilla_cfg = config.ablation.sync_timesteps && mode == diffusion::SampleMode::T2VM;

    const auto& vocab = synth::vocabulary();
    const std::string text = prompt_override.value_or(init.text);
    diffusion::SampleConditioning cond;
    cond.text.ids = vocab.encode(text, loaded.model->config().text_len);
    cond.text.valid = 0;
    for (int id : cond.text.ids)
        if (id != vocab.pad_id()) ++cond.text.valid;
    cond.video_latent_clean = dit::video_to_latent(init.video);
    cond.motion_latent_clean = loaded.vae->encode_mean(
        feature_tensor(kin::encode_representation(config.representation, init.motion)));

    const diffusion::SampleResult out = diffusion::reverse_sample(denoiser, config.schedule, sc, cond);

    GenerationResult result;
    result.motion_latent = out.motion_latent;
    result.video_latent = out.video_latent;
    const nn::Tensor features = loaded.vae->decode_tensor(out.motion_latent);
    const auto rep = feature_sequence_from_tensor(features, config.representation,
                                                  data.skeleton.joint_count, init.motion.fps);
    result.motion = kin::decode_representation(rep, data.skeleton);
    result.video = dit::latent_to_video(out.video_latent, static_cast<int>(init.video.size()));
    return result;
}

} // namespace egtw::pipeline
