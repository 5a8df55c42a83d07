#pragma once

#include <functional>
#include <string>
#include <vector>

#include "egtw/nn/autodiff.hpp"

namespace egtw {
class ChunkMap;
class Rng;
}

namespace egtw::nn {

// Named parameters in registration order. Order matters: optimizer updates and
// serialization iterate it, which pins the accumulation order across runs.
class ParamStore {
public:
    Var create(const std::string& name, std::vector<std::int64_t> shape,
               const std::function<void(Tensor&)>& init);
    Var create_randn(const std::string& name, std::vector<std::int64_t> shape, Rng& rng, double stddev);
    Var create_zeros(const std::string& name, std::vector<std::int64_t> shape);

    bool has(const std::string& name) const;
    Var get(const std::string& name) const;
    const std::vector<std::string>& names() const { return order_; }
    std::vector<Var> all() const;
    std::vector<Var> matching(const std::function<bool(const std::string&)>& pred) const;
    std::int64_t total_parameters() const;

    void save(ChunkMap& map, const std::string& prefix = "tensor/") const;
    // Loads values into existing parameters (shapes must match).
    void load(const ChunkMap& map, const std::string& prefix = "tensor/");

    std::uint64_t values_hash() const;
    std::uint64_t values_hash(const std::function<bool(const std::string&)>& pred) const;

private:
    std::vector<std::string> order_;
    std::vector<Var> vars_;
    Var find(const std::string& name) const;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int warmup_steps = 0;
    int decay_steps = 0;       // cosine decay horizon; 0 disables
    double min_lr_frac = 0.1;  // floor of the decayed learning rate
};

// Adam with linear warmup. Moments are keyed by parameter name and can be
// serialized for exact resume.
class Adam {
public:
    Adam(AdamConfig config, const ParamStore& store, std::vector<std::string> trainable_names);

    void step();
    int step_count() const { return step_; }
    void set_step_count(int s) { step_ = s; }
    const std::vector<std::string>& trainable() const { return names_; }
    std::vector<Var> trainable_vars() const { return vars_; }

    void save(ChunkMap& map, const std::string& prefix = "opt/") const;
    void load(const ChunkMap& map, const std::string& prefix = "opt/");

private:
    AdamConfig config_;
    std::vector<std::string> names_;
    std::vector<Var> vars_;
    std::vector<Tensor> m_, v_;
    int step_ = 0;
};

} // namespace egtw::nn
