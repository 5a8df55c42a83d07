#include "egtw/nn/tensor.hpp"

#include <cmath>
#include <sstream>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"

namespace egtw::nn {

std::int64_t shape_numel(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) {
        if (d < 0) throw ValidationError("tensor: negative dimension");
        n *= d;
    }
    return n;
}

Tensor::Tensor(std::vector<std::int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<std::size_t>(shape_numel(shape)), 0.0);
}

Tensor Tensor::zeros(std::vector<std::int64_t> s) {
    return Tensor(std::move(s));
}

Tensor Tensor::full(std::vector<std::int64_t> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
}

Tensor Tensor::scalar(double v) {
    Tensor t;
    t.shape = {};
    t.data = {v};
    return t;
}

Tensor Tensor::randn(std::vector<std::int64_t> s, Rng& rng, double stddev) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = rng.normal() * stddev;
    return t;
}

Tensor Tensor::from_vector(std::vector<std::int64_t> s, std::vector<double> v) {
    Tensor t;
    t.shape = std::move(s);
    t.data = std::move(v);
    if (static_cast<std::int64_t>(t.data.size()) != shape_numel(t.shape))
        throw ValidationError("tensor: data size does not match shape");
    return t;
}

std::int64_t Tensor::numel() const {
    return static_cast<std::int64_t>(data.size());
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << ',';
        os << shape[i];
    }
    os << ')';
    return os.str();
}

} // namespace egtw::nn
