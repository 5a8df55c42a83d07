#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace egtw {
class Rng;
}

namespace egtw::nn {

// Dense row-major double tensor. Small and explicit; Eigen maps are used where
// matrix products matter.
struct Tensor {
    std::vector<std::int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::int64_t> s);

    static Tensor zeros(std::vector<std::int64_t> s);
    static Tensor full(std::vector<std::int64_t> s, double v);
    static Tensor scalar(double v);
    static Tensor randn(std::vector<std::int64_t> s, Rng& rng, double stddev = 1.0);
    static Tensor from_vector(std::vector<std::int64_t> s, std::vector<double> v);

    std::int64_t numel() const;
    int rank() const { return static_cast<int>(shape.size()); }
    std::int64_t dim(int i) const { return shape[static_cast<std::size_t>(i)]; }

    // 2D accessors (row-major)
    double& at(std::int64_t r, std::int64_t c) { return data[static_cast<std::size_t>(r * dim(1) + c)]; }
    double at(std::int64_t r, std::int64_t c) const { return data[static_cast<std::size_t>(r * dim(1) + c)]; }

    bool same_shape(const Tensor& other) const { return shape == other.shape; }
    bool all_finite() const;
    std::string shape_string() const;
};

std::int64_t shape_numel(const std::vector<std::int64_t>& shape);

} // namespace egtw::nn
