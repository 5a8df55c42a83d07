#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "egtw/nn/params.hpp"

namespace egtw::nn {

// Named-tensor checkpoint: model weights, config snapshot, training step and
// stage provenance chain, plus optional optimizer state for exact resume.
struct CheckpointMeta {
    std::string stage;
    nlohmann::json config;
    std::int64_t step = 0;
    nlohmann::json provenance = nlohmann::json::array(); // stage history entries
    std::string rng_state;
};

void save_checkpoint(const std::string& path, const CheckpointMeta& meta, const ParamStore& params,
                     const Adam* optimizer = nullptr);

CheckpointMeta load_checkpoint(const std::string& path, ParamStore& params, Adam* optimizer = nullptr);

// Reads only the metadata (for report/provenance inspection).
CheckpointMeta peek_checkpoint(const std::string& path);

} // namespace egtw::nn
