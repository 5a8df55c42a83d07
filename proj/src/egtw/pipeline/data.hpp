#pragma once

#include <string>
#include <vector>

#include "egtw/diffusion/trainer.hpp"
#include "egtw/dit/config.hpp"
#include "egtw/pipeline/config.hpp"
#include "egtw/synth/dataset.hpp"
#include "egtw/vae/vae.hpp"

namespace egtw::pipeline {

struct LoadedData {
    kin::Skeleton skeleton;
    synth::SampleConfig sample_config;
    std::vector<synth::Sample> samples;
    std::uint64_t dataset_hash = 0;
    std::string path;
};

LoadedData load_data(const std::string& path);

nn::Tensor feature_tensor(const kin::FeatureSequence& rep);
kin::FeatureSequence feature_sequence_from_tensor(const nn::Tensor& t, kin::RepresentationKind kind,
                                                  int joint_count, double fps);

// Per-sample representation features sized for the VAE.
std::vector<nn::Tensor> encode_features(const LoadedData& data, kin::RepresentationKind kind);

// Cached latents + token ids for the transformer stages.
std::vector<diffusion::TrainItem> make_train_items(const LoadedData& data, const vae::MotionVae& vae,
                                                   kin::RepresentationKind kind,
                                                   const dit::DitConfig& model, bool with_video);

dit::TokenLayout make_layout(const dit::DitConfig& model, const LoadedData& data, bool with_video);

} // namespace egtw::pipeline
