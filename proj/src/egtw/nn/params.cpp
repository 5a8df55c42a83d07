#include "egtw/nn/params.hpp"

#include <cmath>
#include <numbers>

#include "egtw/core/container.hpp"
#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::nn {

Var ParamStore::create(const std::string& name, std::vector<std::int64_t> shape,
                       const std::function<void(Tensor&)>& init) {
    if (has(name)) throw ConfigError("duplicate parameter: " + name);
    Tensor t(std::move(shape));
    init(t);
    order_.push_back(name);
    vars_.push_back(parameter(std::move(t)));
    return vars_.back();
}

Var ParamStore::create_randn(const std::string& name, std::vector<std::int64_t> shape, Rng& rng, double stddev) {
    return create(name, std::move(shape), [&rng, stddev](Tensor& t) {
        for (auto& v : t.data) v = rng.normal() * stddev;
    });
}

Var ParamStore::create_zeros(const std::string& name, std::vector<std::int64_t> shape) {
    return create(name, std::move(shape), [](Tensor&) {});
}

Var ParamStore::find(const std::string& name) const {
    for (std::size_t i = 0; i < order_.size(); ++i)
        if (order_[i] == name) return vars_[i];
    return nullptr;
}

bool ParamStore::has(const std::string& name) const {
    return find(name) != nullptr;
}

Var ParamStore::get(const std::string& name) const {
    Var v = find(name);
    if (!v) throw ConfigError("unknown parameter: " + name);
    return v;
}

std::vector<Var> ParamStore::all() const {
    return vars_;
}

std::vector<Var> ParamStore::matching(const std::function<bool(const std::string&)>& pred) const {
    std::vector<Var> out;
    for (std::size_t i = 0; i < order_.size(); ++i)
        if (pred(order_[i])) out.push_back(vars_[i]);
    return out;
}

std::int64_t ParamStore::total_parameters() const {
    std::int64_t n = 0;
    for (const auto& v : vars_) n += v->value.numel();
    return n;
}

void ParamStore::save(ChunkMap& map, const std::string& prefix) const {
    for (std::size_t i = 0; i < order_.size(); ++i)
        map.add_f64(prefix + order_[i], vars_[i]->value.shape, vars_[i]->value.data);
}

void ParamStore::load(const ChunkMap& map, const std::string& prefix) {
    for (std::size_t i = 0; i < order_.size(); ++i) {
        const auto& e = map.at(prefix + order_[i]);
        if (e.dims != vars_[i]->value.shape)
            throw FormatError("checkpoint shape mismatch for " + order_[i]);
        vars_[i]->value.data = e.f64;
    }
}

std::uint64_t ParamStore::values_hash() const {
    return values_hash([](const std::string&) { return true; });
}

std::uint64_t ParamStore::values_hash(const std::function<bool(const std::string&)>& pred) const {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < order_.size(); ++i) {
        if (!pred(order_[i])) continue;
        h = fnv1a64(order_[i].data(), order_[i].size(), h);
        h = fnv1a64(vars_[i]->value.data.data(), vars_[i]->value.data.size() * sizeof(double), h);
    }
    return h;
}

Adam::Adam(AdamConfig config, const ParamStore& store, std::vector<std::string> trainable_names)
    : config_(config), names_(std::move(trainable_names)) {
    for (const auto& name : names_) {
        Var v = store.get(name);
        vars_.push_back(v);
        m_.push_back(Tensor::zeros(v->value.shape));
        v_.push_back(Tensor::zeros(v->value.shape));
    }
}

void Adam::step() {
    ++step_;
    double lr = config_.lr;
    if (config_.warmup_steps > 0 && step_ < config_.warmup_steps)
        lr *= static_cast<double>(step_) / static_cast<double>(config_.warmup_steps);
    if (config_.decay_steps > 0) {
        const double u = std::min(1.0, static_cast<double>(step_) / config_.decay_steps);
        const double cosine = 0.5 * (1.0 + std::cos(u * std::numbers::pi));
        lr *= config_.min_lr_frac + (1.0 - config_.min_lr_frac) * cosine;
    }
    const double bc1 = 1.0 - std::pow(config_.beta1, step_);
    const double bc2 = 1.0 - std::pow(config_.beta2, step_);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        Var& p = vars_[i];
        if (p->grad.data.empty()) continue;
        for (std::size_t j = 0; j < p->value.data.size(); ++j) {
            const double g = p->grad.data[j];
            m_[i].data[j] = config_.beta1 * m_[i].data[j] + (1.0 - config_.beta1) * g;
            v_[i].data[j] = config_.beta2 * v_[i].data[j] + (1.0 - config_.beta2) * g * g;
            const double mhat = m_[i].data[j] / bc1;
            const double vhat = v_[i].data[j] / bc2;
            p->value.data[j] -= lr * mhat / (std::sqrt(vhat) + config_.eps);
        }
    }
}

void Adam::save(ChunkMap& map, const std::string& prefix) const {
    map.add_scalar_i64(prefix + "step", step_);
    for (std::size_t i = 0; i < names_.size(); ++i) {
        map.add_f64(prefix + "m/" + names_[i], m_[i].shape, m_[i].data);
        map.add_f64(prefix + "v/" + names_[i], v_[i].shape, v_[i].data);
    }
}

void Adam::load(const ChunkMap& map, const std::string& prefix) {
    step_ = static_cast<int>(map.scalar_i64(prefix + "step"));
    for (std::size_t i = 0; i < names_.size(); ++i) {
        m_[i].data = map.at(prefix + "m/" + names_[i]).f64;
        v_[i].data = map.at(prefix + "v/" + names_[i]).f64;
    }
}

} // namespace egtw::nn
