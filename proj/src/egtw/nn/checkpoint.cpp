#include "egtw/nn/checkpoint.hpp"

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"

namespace egtw::nn {

void save_checkpoint(const std::string& path, const CheckpointMeta& meta, const ParamStore& params,
                     const Adam* optimizer) {
    ChunkMap map;
    map.add_string("stage", meta.stage);
    map.add_string("config", meta.config.dump());
    map.add_scalar_i64("step", meta.step);
    map.add_string("provenance", meta.provenance.dump());
    map.add_string("rng_state", meta.rng_state);
    params.save(map, "tensor/");
    if (optimizer) optimizer->save(map, "opt/");
    write_chunk_file(path, FileKind::Checkpoint, map);
}

CheckpointMeta load_checkpoint(const std::string& path, ParamStore& params, Adam* optimizer) {
    const ChunkMap map = read_chunk_file(path, FileKind::Checkpoint);
    params.load(map, "tensor/");
    if (optimizer) optimizer->load(map, "opt/");
    CheckpointMeta meta;
    meta.stage = map.string("stage");
    meta.config = nlohmann::json::parse(map.string("config"));
    meta.step = map.scalar_i64("step");
    meta.provenance = nlohmann::json::parse(map.string("provenance"));
    meta.rng_state = map.string("rng_state");
    return meta;
}

CheckpointMeta peek_checkpoint(const std::string& path) {
    const ChunkMap map = read_chunk_file(path, FileKind::Checkpoint);
    CheckpointMeta meta;
    meta.stage = map.string("stage");
    meta.config = nlohmann::json::parse(map.string("config"));
    meta.step = map.scalar_i64("step");
    meta.provenance = nlohmann::json::parse(map.string("provenance"));
    meta.rng_state = map.string("rng_state");
    return meta;
}

} // namespace egtw::nn
