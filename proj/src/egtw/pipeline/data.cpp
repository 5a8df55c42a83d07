#include "egtw/pipeline/data.hpp"

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/dit/tokenizers.hpp"
#include "egtw/synth/text_grammar.hpp"

namespace egtw::pipeline {

LoadedData load_data(const std::string& path) {
    synth::Dataset ds(path);
    LoadedData out;
    out.skeleton = ds.skeleton();
    out.sample_config = ds.sample_config();
    out.path = path;
    out.dataset_hash = ds.content_hash();
    for (std::int64_t i = 0; i < ds.size(); ++i) out.samples.push_back(ds.sample(i));
    if (out.samples.empty()) throw ValidationError("dataset is empty: " + path);
    return out;
}

nn::Tensor feature_tensor(const kin::FeatureSequence& rep) {
    nn::Tensor t({rep.frame_count(), static_cast<std::int64_t>(rep.features.cols())});
    for (int r = 0; r < rep.frame_count(); ++r)
        for (int c = 0; c < rep.features.cols(); ++c) t.at(r, c) = rep.features(r, c);
    return t;
}

kin::FeatureSequence feature_sequence_from_tensor(const nn::Tensor& t, kin::RepresentationKind kind,
                                                  int joint_count, double fps) {
    kin::FeatureSequence rep;
    rep.kind = kind;
    rep.joint_count = joint_count;
    rep.fps = fps;
    rep.features = Eigen::MatrixXd(t.dim(0), t.dim(1));
    for (std::int64_t r = 0; r < t.dim(0); ++r)
        for (std::int64_t c = 0; c < t.dim(1); ++c) rep.features(r, c) = t.at(r, c);
    return rep;
}

std::vector<nn::Tensor> encode_features(const LoadedData& data, kin::RepresentationKind kind) {
    std::vector<nn::Tensor> out;
    for (const auto& sample : data.samples)
        out.push_back(feature_tensor(kin::encode_representation(kind, sample.motion)));
    return out;
}

std::vector<diffusion::TrainItem> make_train_items(const LoadedData& data, const vae::MotionVae& vae,
                                                   kin::RepresentationKind kind,
                                                   const dit::DitConfig& model, bool with_video) {
    const auto& vocab = synth::vocabulary();
    std::vector<diffusion::TrainItem> items;
    for (const auto& sample : data.samples) {
        diffusion::TrainItem item;
        item.text_ids = vocab.encode(sample.text, model.text_len);
        item.text_valid = 0;
        for (int id : item.text_ids)
            if (id != vocab.pad_id()) ++item.text_valid;
        if (item.text_valid == 0) throw ValidationError("sample with empty text");
        item.motion_latent = vae.encode_mean(feature_tensor(kin::encode_representation(kind, sample.motion)));
        if (with_video) item.video_latent = dit::video_to_latent(sample.video);
        items.push_back(std::move(item));
    }
    return items;
}

dit::TokenLayout make_layout(const dit::DitConfig& model, const LoadedData& data, bool with_video) {
    const synth::Sample& s = data.samples.front();
    dit::TokenLayout layout;
    layout.text_len = model.text_len;
    layout.motion_len = static_cast<int>(vae::MotionVae::latent_length(s.motion.frame_count()));
    if (with_video) {
        layout.video_frames = dit::video_latent_frames(static_cast<int>(s.video.size()));
        const int grid = s.video.front().width / 8 / model.patch;
        if (grid < 1 || (s.video.front().width / 8) % model.patch != 0)
            throw ConfigError("layout: image size incompatible with the patch size");
        layout.grid_h = s.video.front().height / 8 / model.patch;
        layout.grid_w = grid;
    }
    layout.validate();
    return layout;
}

} // namespace egtw::pipeline
