#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "egtw/synth/sample.hpp"

namespace egtw::synth {

struct DatasetGenConfig {
    SampleConfig sample;
    std::vector<std::string> templates = {"walk-forward", "turn-left", "turn-right", "raise-right-hand"};
    int count = 8;
    std::uint64_t scene_seed = 1;
    std::uint64_t motion_seed = 1;
    bool scene_per_sample = true; // otherwise one shared scene
};

// Deterministic: (config, seeds) -> bit-identical dataset file.
void generate_dataset(const DatasetGenConfig& config, const kin::Skeleton& skeleton,
                      const std::string& out_path);

class Dataset {
public:
    explicit Dataset(const std::string& path);

    std::int64_t size() const;
    Sample sample(std::int64_t index) const; // random access
    const kin::Skeleton& skeleton() const { return skeleton_; }
    const SampleConfig& sample_config() const { return config_; }
    const std::string& path() const { return path_; }
    std::uint64_t content_hash() const;

private:
    std::string path_;
    kin::Skeleton skeleton_;
    SampleConfig config_;
    struct ReaderHolder;
    std::shared_ptr<ReaderHolder> reader_;
};

void write_samples(const std::string& path, const kin::Skeleton& skeleton,
                   const SampleConfig& config, const std::vector<Sample>& samples);

} // namespace egtw::synth
