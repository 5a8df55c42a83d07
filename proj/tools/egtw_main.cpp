#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/dit/mask.hpp"
#include "egtw/dit/tokenizers.hpp"
#include "egtw/metrics/evaluate.hpp"
#include "egtw/pipeline/report.hpp"
#include "egtw/pipeline/stages.hpp"
#include "egtw/synth/dataset.hpp"

namespace fs = std::filesystem;
using namespace egtw;

namespace {

struct CommonOverrides {
    std::string config_path;
    std::int64_t seed = -1;
    int steps = -1;
    double lr = -1;
    bool no_mask = false;
    bool sync_timesteps = false;
    std::string representation;
};

void add_overrides(CLI::App* cmd, CommonOverrides& o) {
    cmd->add_option("--config", o.config_path, "experiment config JSON");
    cmd->add_option("--seed", o.seed, "override the run seed");
    cmd->add_option("--steps", o.steps, "override the step count");
    cmd->add_option("--lr", o.lr, "override the learning rate");
    cmd->add_flag("--no-mask", o.no_mask, "full attention (the w/o-IM ablation)");
    cmd->add_flag("--sync-timesteps", o.sync_timesteps, "shared timesteps + vanilla CFG (w/o AD)");
    cmd->add_option("--representation", o.representation, "head_centric or root_centric");
}

pipeline::ExperimentConfig build_config(const CommonOverrides& o, pipeline::Stage stage,
                                        const std::string& data, const std::string& eval_data) {
    pipeline::ExperimentConfig config = o.config_path.empty()
                                            ? pipeline::ExperimentConfig::toy_defaults()
                                            : pipeline::ExperimentConfig::from_file(o.config_path);
    config.stage = stage;
    if (!data.empty()) config.train_data = data;
    if (!eval_data.empty()) config.eval_data = eval_data;
    if (o.seed >= 0) {
        config.seed = static_cast<std::uint64_t>(o.seed);
        config.seed_set = true;
    }
    if (o.steps > 0) config.train.steps = o.steps;
    if (o.lr > 0) config.optimizer.lr = o.lr;
    if (o.no_mask) config.ablation.no_mask = true;
    if (o.sync_timesteps) config.ablation.sync_timesteps = true;
    if (!o.representation.empty())
        config.representation = kin::representation_from_string(o.representation);
    return config;
}

std::pair<std::string, int> parse_sample_ref(const std::string& ref) {
    const auto at = ref.find('@');
    if (at == std::string::npos) return {ref, 0};
    return {ref.substr(0, at), std::stoi(ref.substr(at + 1))};
}

int run_gen_data(const std::string& out, std::uint64_t scene_seed, std::uint64_t motion_seed,
                 const std::string& templates, int count, int width, int height, double video_fps,
                 int video_frames, const std::string& ppm_dir, bool shared_scene) {
    synth::DatasetGenConfig config;
    config.scene_seed = scene_seed;
    config.motion_seed = motion_seed;
    config.count = count;
    config.scene_per_sample = !shared_scene;
    config.sample.intrinsics.width = width;
    config.sample.intrinsics.height = height;
    config.sample.intrinsics.fx = width;
    config.sample.intrinsics.fy = width;
    config.sample.intrinsics.cx = width / 2.0;
    config.sample.intrinsics.cy = height / 2.0;
    config.sample.video_fps = video_fps;
    config.sample.motion_fps = 2.0 * video_fps;
    config.sample.video_frames = video_frames;
    if (!templates.empty()) {
        config.templates.clear();
        std::istringstream is(templates);
        std::string item;
        while (std::getline(is, item, ','))
            if (!item.empty()) config.templates.push_back(item);
    }
    const auto skeleton = kin::toy_humanoid();
    generate_dataset(config, skeleton, out);
    std::cout << "wrote " << count << " samples to " << out << "\n";

    if (!ppm_dir.empty()) {
        fs::create_directories(ppm_dir);
        synth::Dataset ds(out);
        for (std::int64_t i = 0; i < ds.size(); ++i) {
            const synth::Sample s = ds.sample(i);
            for (std::size_t f = 0; f < s.video.size(); ++f) {
                char name[64];
                std::snprintf(name, sizeof(name), "sample%03lld_frame%03zu.ppm",
                              static_cast<long long>(i), f);
                synth::write_ppm(s.video[f], (fs::path(ppm_dir) / name).string());
            }
        }
        std::cout << "debug frames in " << ppm_dir << "\n";
    }
    return 0;
}

int run_sample(const std::string& ckpt, const std::string& mode_str, const std::string& init_ref,
               const std::string& prompt, int steps, std::uint64_t seed, const std::string& out_dir,
               double w_t, double w_v, double w_m) {
    auto loaded = pipeline::load_joint_checkpoint(ckpt);
    if (w_t >= 0) loaded.config.guidance.w_t = w_t;
    if (w_v >= 0) loaded.config.guidance.w_v = w_v;
    if (w_m >= 0) loaded.config.guidance.w_m = w_m;

    const auto [data_path, index] = parse_sample_ref(init_ref);
    const pipeline::LoadedData data = pipeline::load_data(data_path);
    if (index < 0 || index >= static_cast<int>(data.samples.size()))
        throw ValidationError("init sample index out of range");
    const synth::Sample& init = data.samples[static_cast<std::size_t>(index)];

    const auto mode = diffusion::sample_mode_from_string(mode_str);
    const std::optional<std::string> prompt_opt =
        prompt.empty() ? std::nullopt : std::optional<std::string>(prompt);
    const auto result =
        pipeline::generate_sample_from_model(loaded, data, init, mode, steps, seed, prompt_opt);

    fs::create_directories(out_dir);
    kin::save_motion_file(result.motion, out_dir + "/motion.egtw");
    {
        std::ofstream os(out_dir + "/motion.json");
        os << result.motion.to_json().dump() << '\n';
    }
    for (std::size_t f = 0; f < result.video.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame%03zu.ppm", f);
        synth::write_ppm(result.video[f], (fs::path(out_dir) / name).string());
    }
    nlohmann::json meta = {{"mode", mode_str},
                           {"checkpoint", ckpt},
                           {"init_sample", init_ref},
                           {"prompt", prompt.empty() ? init.text : prompt},
                           {"steps", steps},
                           {"seed", seed},
                           {"guidance",
                            {{"w_t", loaded.config.guidance.w_t},
                             {"w_v", loaded.config.guidance.w_v},
                             {"w_m", loaded.config.guidance.w_m}}}};
    std::ofstream os(out_dir + "/metadata.json");
    os << meta.dump(2) << '\n';
    std::cout << "wrote generation to " << out_dir << "\n";
    return 0;
}

int run_evaluate(const std::string& data_path, const std::string& gen_dir, const std::string& metric_list,
                 const std::string& provider, const std::string& pose_file, double sigma_pos,
                 double sigma_rot, int pool, std::uint64_t seed, const std::string& report_path) {
    const pipeline::LoadedData data = pipeline::load_data(data_path);

    std::vector<kin::MotionSequence> generated;
    if (!gen_dir.empty()) {
        for (std::size_t i = 0; i < data.samples.size(); ++i) {
            const std::string path = (fs::path(gen_dir) / ("motion_" + std::to_string(i) + ".egtw")).string();
            if (!fs::exists(path)) throw ValidationError("missing generated motion: " + path);
            generated.push_back(kin::load_motion_file(path));
        }
    }

    metrics::EvaluateConfig ec = metrics::EvaluateConfig::from_metric_list(metric_list);
    ec.pose.kind = metrics::pose_provider_from_string(provider);
    ec.pose.sigma_position = sigma_pos;
    ec.pose.sigma_rotation_deg = sigma_rot;
    ec.pose.seed = seed;
    ec.pose.file_path = pose_file;
    ec.retrieval_pool = pool;
    ec.seed = seed;

    const auto report = metrics::evaluate_samples(data.samples, generated, data.sample_config, ec);
    report.save_csv(report_path);
    std::cout << "wrote " << report_path << "\n";
    if (report.mean_trans_err) std::cout << "  trans_err  " << *report.mean_trans_err << "\n";
    if (report.mean_rot_err) std::cout << "  rot_err    " << *report.mean_rot_err << "\n";
    if (report.mean_hand_score) std::cout << "  hand_score " << *report.mean_hand_score << "\n";
    if (report.m_fid) std::cout << "  m_fid      " << *report.m_fid << "\n";
    if (report.r_precision) std::cout << "  r_prec     " << *report.r_precision << "\n";
    if (report.mm_dist) std::cout << "  mm_dist    " << *report.mm_dist << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"egocentric video + motion joint generation toolkit"};
    app.require_subcommand(1);

    // ---- gen-data ----
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic text-video-motion dataset");
    std::string gen_out = "data.egtw", gen_templates, gen_ppm;
    std::uint64_t gen_scene_seed = 1, gen_motion_seed = 1;
    int gen_count = 8, gen_w = 64, gen_h = 64, gen_frames = 11;
    double gen_fps = 2.0;
    gen->add_option("--out", gen_out, "output dataset path")->required();
    gen->add_option("--scene-seed", gen_scene_seed, "scene randomization seed");
    gen->add_option("--motion-seed", gen_motion_seed, "motion randomization seed");
    gen->add_option("--templates", gen_templates, "comma-separated template names");
    gen->add_option("--count", gen_count, "sample count");
    gen->add_option("--width", gen_w, "image width");
    gen->add_option("--height", gen_h, "image height");
    gen->add_option("--video-fps", gen_fps, "video frame rate (motion runs at twice this)");
    gen->add_option("--video-frames", gen_frames, "video frames per sample (N_v + 1)");
    gen->add_option("--ppm-dir", gen_ppm, "optional directory for debug PPM frames");
    bool gen_shared_scene = false;
    gen->add_flag("--shared-scene", gen_shared_scene, "one scene for every sample");

    // ---- train-vae ----
    auto* tv = app.add_subcommand("train-vae", "stage 1: motion VAE training");
    CommonOverrides tv_o;
    std::string tv_data, tv_out = "stage1", tv_resume;
    add_overrides(tv, tv_o);
    tv->add_option("--data", tv_data, "training dataset")->required();
    tv->add_option("--out-dir", tv_out, "run directory (under $EGTW_RUN_ROOT if relative)");
    tv->add_option("--resume", tv_resume, "resume from an earlier stage-1 checkpoint");

    // ---- train-dit ----
    auto* td = app.add_subcommand("train-dit", "stages 2-3: transformer training");
    CommonOverrides td_o;
    int td_stage = 2;
    std::string td_data, td_eval, td_init, td_out = "stage2";
    add_overrides(td, td_o);
    td->add_option("--stage", td_stage, "2 = text-to-motion pretraining, 3 = joint")->required();
    td->add_option("--data", td_data, "training dataset")->required();
    td->add_option("--eval-data", td_eval, "held-out dataset for cadence evaluation");
    td->add_option("--init-ckpt", td_init, "stage-1 (for stage 2) or stage-2 (for stage 3) checkpoint")
        ->required();
    td->add_option("--out-dir", td_out, "run directory");

    // ---- sample ----
    auto* sp = app.add_subcommand("sample", "reverse-sample from a trained checkpoint");
    std::string sp_mode = "t2vm", sp_ckpt, sp_init, sp_prompt, sp_out = "generation";
    int sp_steps = 30;
    std::uint64_t sp_seed = 1;
    double sp_wt = -1, sp_wv = -1, sp_wm = -1;
    sp->add_option("--mode", sp_mode, "t2vm, tm2v or tv2m")->required();
    sp->add_option("--ckpt", sp_ckpt, "joint (or pretraining) checkpoint")->required();
    sp->add_option("--init-sample", sp_init, "dataset path with optional @index (I^0/P^0 source)")
        ->required();
    sp->add_option("--prompt", sp_prompt, "text prompt (defaults to the init sample's text)");
    sp->add_option("--steps", sp_steps, "reverse diffusion steps");
    sp->add_option("--seed", sp_seed, "sampling seed");
    sp->add_option("--out", sp_out, "output directory");
    sp->add_option("--w-t", sp_wt, "text guidance scale override");
    sp->add_option("--w-v", sp_wv, "video guidance scale override");
    sp->add_option("--w-m", sp_wm, "motion guidance scale override");

    // ---- evaluate ----
    auto* ev = app.add_subcommand("evaluate", "score motions against a reference dataset");
    std::string ev_data, ev_gen, ev_metrics = "trans,rot,hand,fid", ev_provider = "gt", ev_pose_file;
    std::string ev_report = "report.csv";
    double ev_sigma_pos = 0.01, ev_sigma_rot = 1.0;
    int ev_pool = 32;
    std::uint64_t ev_seed = 1;
    ev->add_option("--data", ev_data, "reference dataset")->required();
    ev->add_option("--gen", ev_gen, "directory of generated motion_<i>.egtw files (omit to self-check)");
    ev->add_option("--metrics", ev_metrics, "comma list: trans,rot,hand,fid,rprec");
    ev->add_option("--pose-provider", ev_provider, "gt, perturbed or file");
    ev->add_option("--pose-file", ev_pose_file, "trajectory JSON for the file provider");
    ev->add_option("--perturb-sigma-pos", ev_sigma_pos, "position noise for the perturbed provider");
    ev->add_option("--perturb-sigma-rot", ev_sigma_rot, "rotation noise (degrees)");
    ev->add_option("--pool", ev_pool, "retrieval pool size");
    ev->add_option("--seed", ev_seed, "evaluation seed");
    ev->add_option("--report", ev_report, "output CSV path");

    // ---- report ----
    auto* rp = app.add_subcommand("report", "comparison table over ablation runs");
    std::vector<std::string> rp_runs;
    std::string rp_out = "report";
    rp->add_option("--run", rp_runs, "variant=run_dir (repeatable)")->required();
    rp->add_option("--out", rp_out, "output directory");

    // ---- dump-mask ----
    auto* dm = app.add_subcommand("dump-mask", "write the interaction mask as CSV and PGM");
    int dm_text = 8, dm_video_frames = 11, dm_grid = 2;
    std::string dm_out = "mask";
    bool dm_full = false;
    dm->add_option("--text-len", dm_text, "text token count");
    dm->add_option("--video-frames", dm_video_frames, "raw video frames (N_v + 1)");
    dm->add_option("--grid", dm_grid, "spatial tokens per side");
    dm->add_option("--out", dm_out, "output path prefix");
    dm->add_flag("--full-attention", dm_full, "dump the unstructured variant instead");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return run_gen_data(gen_out, gen_scene_seed, gen_motion_seed, gen_templates, gen_count, gen_w,
                                gen_h, gen_fps, gen_frames, gen_ppm, gen_shared_scene);

        if (tv->parsed()) {
            auto config = build_config(tv_o, pipeline::Stage::Vae, tv_data, "");
            const auto result = pipeline::run_stage1(config, pipeline::resolve_run_dir(tv_out), tv_resume);
            std::cout << "stage 1 done: " << result.checkpoint_path << " (" << result.wall_seconds
                      << " s)\n";
            for (const auto& [g, v] : result.final_group_error)
                std::cout << "  max reconstruction error " << g << ": " << v << "\n";
            return 0;
        }

        if (td->parsed()) {
            if (td_stage == 2) {
                auto config = build_config(td_o, pipeline::Stage::T2mPretrain, td_data, td_eval);
                const auto result = pipeline::run_stage2(config, td_init, pipeline::resolve_run_dir(td_out));
                std::cout << "stage 2 done: " << result.checkpoint_path << " loss "
                          << result.initial_eval_loss << " -> " << result.final_eval_loss << " ("
                          << result.tokens_per_second << " tokens/s)\n";
            } else if (td_stage == 3) {
                auto config = build_config(td_o, pipeline::Stage::Joint, td_data, td_eval);
                const auto result = pipeline::run_stage3(config, td_init, pipeline::resolve_run_dir(td_out));
                std::cout << "stage 3 done: " << result.checkpoint_path << " loss "
                          << result.initial_eval_loss << " -> " << result.final_eval_loss << " ("
                          << result.tokens_per_second << " tokens/s)\n";
            } else {
                throw ConfigError("train-dit: stage must be 2 or 3");
            }
            return 0;
        }

        if (sp->parsed())
            return run_sample(sp_ckpt, sp_mode, sp_init, sp_prompt, sp_steps, sp_seed, sp_out, sp_wt, sp_wv,
                              sp_wm);

        if (ev->parsed())
            return run_evaluate(ev_data, ev_gen, ev_metrics, ev_provider, ev_pose_file, ev_sigma_pos,
                                ev_sigma_rot, ev_pool, ev_seed, ev_report);

        if (rp->parsed()) {
            std::vector<pipeline::VariantRun> runs;
            for (const auto& spec : rp_runs) {
                const auto eq = spec.find('=');
                if (eq == std::string::npos) throw ConfigError("--run expects variant=dir");
                runs.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
            }
            pipeline::write_report(runs, rp_out);
            std::cout << "wrote " << rp_out << "/comparison.csv\n";
            return 0;
        }

        if (dm->parsed()) {
            dit::TokenLayout layout;
            layout.text_len = dm_text;
            layout.video_frames = dit::video_latent_frames(dm_video_frames);
            layout.grid_h = layout.grid_w = dm_grid;
            const int n_m = 2 * (dm_video_frames - 1);
            layout.motion_len = n_m / 4 + 1;
            const auto mask =
                dm_full ? dit::full_attention_mask(layout) : dit::build_interaction_mask(layout);
            dit::dump_mask_csv(mask, dm_out + ".csv");
            dit::dump_mask_pgm(mask, dm_out + ".pgm");
            std::cout << "wrote " << dm_out << ".csv and " << dm_out << ".pgm (" << mask.n << "x" << mask.n
                      << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
