#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "egtw/nn/tensor.hpp"

namespace egtw::nn {

// Dynamic-graph reverse-mode autodiff over Tensor-valued nodes. Graphs are
// built by the free functions below; backward() walks the graph in reverse
// topological order. Accumulation order is fixed by construction order, so
// runs are bit-reproducible.
struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
    Tensor value;
    Tensor grad; // allocated lazily during backward
    bool requires_grad = false;
    std::vector<Var> parents;
    std::function<void(Node&)> backward_fn;

    Tensor& ensure_grad();
};

Var constant(Tensor value);
Var parameter(Tensor value); // leaf with requires_grad

// Seeds grad(root) = 1 (root must be scalar) and accumulates into every
// reachable parameter. Leaves previous grads in place: call zero_grad first
// when not accumulating across calls.
void backward(const Var& root);
void zero_grad(const std::vector<Var>& params);

// ---- elementwise and broadcast ----
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var add_scalar(const Var& a, double s);
Var mul_scalar(const Var& a, double s);
Var exp(const Var& a);
Var square(const Var& a);
Var silu(const Var& a);

// x: (R, C), v: C entries (any shape with numel C)
Var add_rowvec(const Var& x, const Var& v);
Var mul_rowvec(const Var& x, const Var& v);

// ---- shape ----
Var reshape(const Var& x, std::vector<std::int64_t> shape);
Var slice_rows(const Var& x, std::int64_t r0, std::int64_t r1); // [r0, r1)
Var slice_cols(const Var& x, std::int64_t c0, std::int64_t c1);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);

// ---- reductions / losses ----
Var sum_all(const Var& x);
Var mean_all(const Var& x);
Var mean_squared_error(const Var& a, const Var& b);

// ---- linear algebra ----
Var matmul(const Var& a, const Var& b);                      // (M,K) x (K,N)
Var linear(const Var& x, const Var& w, const Var& b);        // x (R,Cin), w (Cin,Cout), b (Cout)

// ---- normalization ----
Var layer_norm_rows(const Var& x, double eps = 1e-5);                  // per row, no affine
Var group_norm_channels(const Var& x, int groups, double eps = 1e-5);  // per row, per channel group

// ---- sequence ops (rows = time) ----
// Causal 1D convolution: w (k, Cin, Cout); left zero padding of k-1 so output
// index t only reads inputs <= stride*t. Output length (T-1)/stride + 1.
Var causal_conv1d(const Var& x, const Var& w, const Var& b, int stride);
// (T, C) -> (2T-1, C); out[2i] = x[i], out[2i+1] = (x[i] + x[i+1]) / 2.
Var upsample2x_causal(const Var& x);

// ---- embeddings / attention ----
Var embedding(const Var& table, const std::vector<int>& ids);

struct AttentionMask {
    std::int64_t n = 0;
    std::vector<std::uint8_t> allow; // row-major (query, key)

    static AttentionMask all_allowed(std::int64_t n);
    bool allowed(std::int64_t q, std::int64_t k) const { return allow[static_cast<std::size_t>(q * n + k)] != 0; }
    void set(std::int64_t q, std::int64_t k, bool v) { allow[static_cast<std::size_t>(q * n + k)] = v ? 1 : 0; }
};

// Multi-head scaled dot-product attention with a boolean permission mask.
// Blocked logits contribute exactly zero probability; each query row must have
// at least one permitted key (ConfigError otherwise).
Var attention(const Var& q, const Var& k, const Var& v, int heads, const AttentionMask& mask);

// 3D rotary embedding applied per head over (t, h, w) token positions. The
// head dim is split into three even-sized pair blocks (t takes the remainder).
Var rope3d(const Var& x, const std::vector<std::array<int, 3>>& positions, int heads, double base = 10000.0);

// Sinusoidal absolute encoding (0,1,0,1,... at position 0), interleaved sin/cos.
Tensor sinusoidal_encoding(double position, int dim, double base = 10000.0);

} // namespace egtw::nn
