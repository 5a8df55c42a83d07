#include "egtw/nn/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "egtw/core/error.hpp"

namespace egtw::nn {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatrixRM>;
using MapC = Eigen::Map<const MatrixRM>;

MapC map2(const Tensor& t) {
    if (t.rank() != 2) throw ValidationError("expected a rank-2 tensor, got " + t.shape_string());
    return MapC(t.data.data(), t.dim(0), t.dim(1));
}

MapM map2(Tensor& t) {
    if (t.rank() != 2) throw ValidationError("expected a rank-2 tensor, got " + t.shape_string());
    return MapM(t.data.data(), t.dim(0), t.dim(1));
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> fn) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto& p : parents)
        if (p->requires_grad) {
            n->requires_grad = true;
            break;
        }
    if (n->requires_grad) {
        n->parents = std::move(parents);
        n->backward_fn = std::move(fn);
    }
    return n;
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
    if (!a->value.same_shape(b->value))
        throw ValidationError(std::string(op) + ": shape mismatch " + a->value.shape_string() + " vs " +
                              b->value.shape_string());
}

} // namespace

Tensor& Node::ensure_grad() {
    if (grad.data.empty()) grad = Tensor::zeros(value.shape);
    return grad;
}

Var constant(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    return n;
}

Var parameter(Tensor value) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->requires_grad = true;
    return n;
}

void backward(const Var& root) {
    if (root->value.numel() != 1) throw ValidationError("backward: root must be scalar");
    if (!root->requires_grad) return;

    // iterative post-order DFS; reverse gives topological order from the root
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        bool descended = false;
        while (idx < node->parents.size()) {
            Node* p = node->parents[idx].get();
            ++idx;
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (!descended && (stack.back().second >= stack.back().first->parents.size())) {
            order.push_back(stack.back().first);
            stack.pop_back();
        }
    }

    root->ensure_grad().data[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward_fn && !n->grad.data.empty()) n->backward_fn(*n);
    }
}

void zero_grad(const std::vector<Var>& params) {
    for (const auto& p : params) {
        if (!p->grad.data.empty()) std::fill(p->grad.data.begin(), p->grad.data.end(), 0.0);
    }
}

// ---------------- elementwise ----------------

Var add(const Var& a, const Var& b) {
    check_same_shape(a, b, "add");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) {
            auto& ga = a->ensure_grad();
            for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += n.grad.data[i];
        }
        if (b->requires_grad) {
            auto& gb = b->ensure_grad();
            for (std::size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += n.grad.data[i];
        }
    });
}

Var sub(const Var& a, const Var& b) {
    check_same_shape(a, b, "sub");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) {
            auto& ga = a->ensure_grad();
            for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += n.grad.data[i];
        }
        if (b->requires_grad) {
            auto& gb = b->ensure_grad();
            for (std::size_t i = 0; i < gb.data.size(); ++i) gb.data[i] -= n.grad.data[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    check_same_shape(a, b, "mul");
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b->value.data[i];
    return make_node(std::move(out), {a, b}, [a, b](Node& n) {
        if (a->requires_grad) {
            auto& ga = a->ensure_grad();
            for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += n.grad.data[i] * b->value.data[i];
        }
        if (b->requires_grad) {
            auto& gb = b->ensure_grad();
            for (std::size_t i = 0; i < gb.data.size(); ++i) gb.data[i] += n.grad.data[i] * a->value.data[i];
        }
    });
}

Var add_scalar(const Var& a, double s) {
    Tensor out = a->value;
    for (auto& x : out.data) x += s;
    return make_node(std::move(out), {a}, [a](Node& n) {
        auto& ga = a->ensure_grad();
        for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += n.grad.data[i];
    });
}

Var mul_scalar(const Var& a, double s) {
    Tensor out = a->value;
    for (auto& x : out.data) x *= s;
    return make_node(std::move(out), {a}, [a, s](Node& n) {
        auto& ga = a->ensure_grad();
        for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += s * n.grad.data[i];
    });
}

Var exp(const Var& a) {
    Tensor out = a->value;
    for (auto& x : out.data) x = std::exp(x);
    auto saved = std::make_shared<Tensor>(out);
    return make_node(std::move(out), {a}, [a, saved](Node& n) {
        auto& ga = a->ensure_grad();
        for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += n.grad.data[i] * saved->data[i];
    });
}

Var square(const Var& a) {
    Tensor out = a->value;
    for (auto& x : out.data) x = x * x;
    return make_node(std::move(out), {a}, [a](Node& n) {
        auto& ga = a->ensure_grad();
        for (std::size_t i = 0; i < ga.data.size(); ++i) ga.data[i] += 2.0 * a->value.data[i] * n.grad.data[i];
    });
}

Var silu(const Var& a) {
    Tensor out = a->value;
    for (auto& x : out.data) x = x / (1.0 + std::exp(-x));
    return make_node(std::move(out), {a}, [a](Node& n) {
        auto& ga = a->ensure_grad();
        for (std::size_t i = 0; i < ga.data.size(); ++i) {
            const double x = a->value.data[i];
            const double sig = 1.0 / (1.0 + std::exp(-x));
            ga.data[i] += n.grad.data[i] * sig * (1.0 + x * (1.0 - sig));
        }
    });
}

Var add_rowvec(const Var& x, const Var& v) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    if (v->value.numel() != C) throw ValidationError("add_rowvec: width mismatch");
    Tensor out = x->value;
    for (std::int64_t r = 0; r < R; ++r)
        for (std::int64_t c = 0; c < C; ++c) out.data[static_cast<std::size_t>(r * C + c)] += v->value.data[static_cast<std::size_t>(c)];
    return make_node(std::move(out), {x, v}, [x, v, R, C](Node& n) {
        if (x->requires_grad) {
            auto& gx = x->ensure_grad();
            for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += n.grad.data[i];
        }
        if (v->requires_grad) {
            auto& gv = v->ensure_grad();
            for (std::int64_t r = 0; r < R; ++r)
                for (std::int64_t c = 0; c < C; ++c)
                    gv.data[static_cast<std::size_t>(c)] += n.grad.data[static_cast<std::size_t>(r * C + c)];
        }
    });
}

Var mul_rowvec(const Var& x, const Var& v) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    if (v->value.numel() != C) throw ValidationError("mul_rowvec: width mismatch");
    Tensor out = x->value;
    for (std::int64_t r = 0; r < R; ++r)
        for (std::int64_t c = 0; c < C; ++c) out.data[static_cast<std::size_t>(r * C + c)] *= v->value.data[static_cast<std::size_t>(c)];
    return make_node(std::move(out), {x, v}, [x, v, R, C](Node& n) {
        if (x->requires_grad) {
            auto& gx = x->ensure_grad();
            for (std::int64_t r = 0; r < R; ++r)
                for (std::int64_t c = 0; c < C; ++c)
                    gx.data[static_cast<std::size_t>(r * C + c)] +=
                        n.grad.data[static_cast<std::size_t>(r * C + c)] * v->value.data[static_cast<std::size_t>(c)];
        }
        if (v->requires_grad) {
            auto& gv = v->ensure_grad();
            for (std::int64_t r = 0; r < R; ++r)
                for (std::int64_t c = 0; c < C; ++c)
                    gv.data[static_cast<std::size_t>(c)] += n.grad.data[static_cast<std::size_t>(r * C + c)] *
                                                            x->value.data[static_cast<std::size_t>(r * C + c)];
        }
    });
}

// ---------------- shape ----------------

Var reshape(const Var& x, std::vector<std::int64_t> shape) {
    if (shape_numel(shape) != x->value.numel()) throw ValidationError("reshape: numel mismatch");
    Tensor out;
    out.shape = std::move(shape);
    out.data = x->value.data;
    return make_node(std::move(out), {x}, [x](Node& n) {
        auto& gx = x->ensure_grad();
        for (std::size_t i = 0; i < gx.data.size(); ++i) gx.data[i] += n.grad.data[i];
    });
}

Var slice_rows(const Var& x, std::int64_t r0, std::int64_t r1) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    if (r0 < 0 || r1 > R || r0 >= r1) throw ValidationError("slice_rows: bad range");
    Tensor out({r1 - r0, C});
    std::copy(x->value.data.begin() + static_cast<std::ptrdiff_t>(r0 * C),
              x->value.data.begin() + static_cast<std::ptrdiff_t>(r1 * C), out.data.begin());
    return make_node(std::move(out), {x}, [x, r0, C](Node& n) {
        auto& gx = x->ensure_grad();
        const std::int64_t rows = n.grad.dim(0);
        for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t c = 0; c < C; ++c)
                gx.data[static_cast<std::size_t>((r0 + r) * C + c)] += n.grad.data[static_cast<std::size_t>(r * C + c)];
    });
}

Var slice_cols(const Var& x, std::int64_t c0, std::int64_t c1) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    if (c0 < 0 || c1 > C || c0 >= c1) throw ValidationError("slice_cols: bad range");
    Tensor out({R, c1 - c0});
    for (std::int64_t r = 0; r < R; ++r)
        for (std::int64_t c = c0; c < c1; ++c)
            out.data[static_cast<std::size_t>(r * (c1 - c0) + (c - c0))] = x->value.data[static_cast<std::size_t>(r * C + c)];
    return make_node(std::move(out), {x}, [x, c0, c1, C](Node& n) {
        auto& gx = x->ensure_grad();
        const std::int64_t R2 = n.grad.dim(0);
        const std::int64_t W = c1 - c0;
        for (std::int64_t r = 0; r < R2; ++r)
            for (std::int64_t c = 0; c < W; ++c)
                gx.data[static_cast<std::size_t>(r * C + c0 + c)] += n.grad.data[static_cast<std::size_t>(r * W + c)];
    });
}

Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_rows: empty");
    const std::int64_t C = parts[0]->value.dim(1);
    std::int64_t R = 0;
    for (const auto& p : parts) {
        if (p->value.rank() != 2 || p->value.dim(1) != C) throw ValidationError("concat_rows: width mismatch");
        R += p->value.dim(0);
    }
    Tensor out({R, C});
    std::int64_t row = 0;
    for (const auto& p : parts) {
        std::copy(p->value.data.begin(), p->value.data.end(),
                  out.data.begin() + static_cast<std::ptrdiff_t>(row * C));
        row += p->value.dim(0);
    }
    std::vector<Var> parents = parts;
    return make_node(std::move(out), parents, [parts, C](Node& n) {
        std::int64_t row = 0;
        for (const auto& p : parts) {
            const std::int64_t rows = p->value.dim(0);
            if (p->requires_grad) {
                auto& gp = p->ensure_grad();
                for (std::int64_t r = 0; r < rows; ++r)
                    for (std::int64_t c = 0; c < C; ++c)
                        gp.data[static_cast<std::size_t>(r * C + c)] +=
                            n.grad.data[static_cast<std::size_t>((row + r) * C + c)];
            }
            row += rows;
        }
    });
}

Var concat_cols(const std::vector<Var>& parts) {
    if (parts.empty()) throw ValidationError("concat_cols: empty");
    const std::int64_t R = parts[0]->value.dim(0);
    std::int64_t C = 0;
    for (const auto& p : parts) {
        if (p->value.rank() != 2 || p->value.dim(0) != R) throw ValidationError("concat_cols: height mismatch");
        C += p->value.dim(1);
    }
    Tensor out({R, C});
    std::int64_t col = 0;
    for (const auto& p : parts) {
        const std::int64_t W = p->value.dim(1);
        for (std::int64_t r = 0; r < R; ++r)
            for (std::int64_t c = 0; c < W; ++c)
                out.data[static_cast<std::size_t>(r * C + col + c)] = p->value.data[static_cast<std::size_t>(r * W + c)];
        col += W;
    }
    std::vector<Var> parents = parts;
    return make_node(std::move(out), parents, [parts, R, C](Node& n) {
        std::int64_t col = 0;
        for (const auto& p : parts) {
            const std::int64_t W = p->value.dim(1);
            if (p->requires_grad) {
                auto& gp = p->ensure_grad();
                for (std::int64_t r = 0; r < R; ++r)
                    for (std::int64_t c = 0; c < W; ++c)
                        gp.data[static_cast<std::size_t>(r * W + c)] +=
                            n.grad.data[static_cast<std::size_t>(r * C + col + c)];
            }
            col += W;
        }
    });
}

// ---------------- reductions ----------------

Var sum_all(const Var& x) {
    double s = 0;
    for (double v : x->value.data) s += v;
    return make_node(Tensor::scalar(s), {x}, [x](Node& n) {
        auto& gx = x->ensure_grad();
        const double g = n.grad.data[0];
        for (auto& v : gx.data) v += g;
    });
}

Var mean_all(const Var& x) {
    const double inv = 1.0 / static_cast<double>(x->value.numel());
    double s = 0;
    for (double v : x->value.data) s += v;
    return make_node(Tensor::scalar(s * inv), {x}, [x, inv](Node& n) {
        auto& gx = x->ensure_grad();
        const double g = n.grad.data[0] * inv;
        for (auto& v : gx.data) v += g;
    });
}

Var mean_squared_error(const Var& a, const Var& b) {
    check_same_shape(a, b, "mse");
    const double inv = 1.0 / static_cast<double>(a->value.numel());
    double s = 0;
    for (std::size_t i = 0; i < a->value.data.size(); ++i) {
        const double d = a->value.data[i] - b->value.data[i];
        s += d * d;
    }
    return make_node(Tensor::scalar(s * inv), {a, b}, [a, b, inv](Node& n) {
        const double g = 2.0 * inv * n.grad.data[0];
        if (a->requires_grad) {
            auto& ga = a->ensure_grad();
            for (std::size_t i = 0; i < ga.data.size(); ++i)
                ga.data[i] += g * (a->value.data[i] - b->value.data[i]);
        }
        if (b->requires_grad) {
            auto& gb = b->ensure_grad();
            for (std::size_t i = 0; i < gb.data.size(); ++i)
                gb.data[i] -= g * (a->value.data[i] - b->value.data[i]);
        }
    });
}

// ---------------- linear algebra ----------------

Var matmul(const Var& a, const Var& b) {
    if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(1) != b->value.dim(0))
        throw ValidationError("matmul: incompatible shapes " + a->value.shape_string() + " x " +
                              b->value.shape_string());
    Tensor out({a->value.dim(0), b->value.dim(1)});
    map2(out).noalias() = map2(a->value) * map2(b->value);
    return make_node(std::move(out), {a, b}, [a, b](Node& n) {
        MapC gout(n.grad.data.data(), n.grad.dim(0), n.grad.dim(1));
        if (a->requires_grad) {
            auto& ga = a->ensure_grad();
            map2(ga).noalias() += gout * map2(b->value).transpose();
        }
        if (b->requires_grad) {
            auto& gb = b->ensure_grad();
            map2(gb).noalias() += map2(a->value).transpose() * gout;
        }
    });
}

Var linear(const Var& x, const Var& w, const Var& b) {
    return add_rowvec(matmul(x, w), b);
}

// ---------------- normalization ----------------

namespace {

// shared normalization backward for a contiguous span [start, start+len)
void norm_span_backward(const double* x, const double* gy, double* gx, std::int64_t len, double mean,
                        double inv_std) {
    double sum_gy = 0, sum_gy_xhat = 0;
    for (std::int64_t i = 0; i < len; ++i) {
        const double xhat = (x[i] - mean) * inv_std;
        sum_gy += gy[i];
        sum_gy_xhat += gy[i] * xhat;
    }
    const double inv_len = 1.0 / static_cast<double>(len);
    for (std::int64_t i = 0; i < len; ++i) {
        const double xhat = (x[i] - mean) * inv_std;
        gx[i] += inv_std * (gy[i] - inv_len * sum_gy - xhat * inv_len * sum_gy_xhat);
    }
}

} // namespace

Var layer_norm_rows(const Var& x, double eps) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    Tensor out({R, C});
    auto stats = std::make_shared<std::vector<std::pair<double, double>>>(); // (mean, inv_std) per row
    stats->reserve(static_cast<std::size_t>(R));
    for (std::int64_t r = 0; r < R; ++r) {
        const double* row = &x->value.data[static_cast<std::size_t>(r * C)];
        double mean = 0;
        for (std::int64_t c = 0; c < C; ++c) mean += row[c];
        mean /= static_cast<double>(C);
        double var = 0;
        for (std::int64_t c = 0; c < C; ++c) var += (row[c] - mean) * (row[c] - mean);
        var /= static_cast<double>(C);
        const double inv_std = 1.0 / std::sqrt(var + eps);
        stats->emplace_back(mean, inv_std);
        double* orow = &out.data[static_cast<std::size_t>(r * C)];
        for (std::int64_t c = 0; c < C; ++c) orow[c] = (row[c] - mean) * inv_std;
    }
    return make_node(std::move(out), {x}, [x, stats, R, C](Node& n) {
        auto& gx = x->ensure_grad();
        for (std::int64_t r = 0; r < R; ++r) {
            const auto [mean, inv_std] = (*stats)[static_cast<std::size_t>(r)];
            norm_span_backward(&x->value.data[static_cast<std::size_t>(r * C)],
                               &n.grad.data[static_cast<std::size_t>(r * C)],
                               &gx.data[static_cast<std::size_t>(r * C)], C, mean, inv_std);
        }
    });
}

Var group_norm_channels(const Var& x, int groups, double eps) {
    const std::int64_t R = x->value.dim(0), C = x->value.dim(1);
    if (groups <= 0 || C % groups != 0) throw ValidationError("group_norm: channels not divisible by groups");
    const std::int64_t gs = C / groups;
    Tensor out({R, C});
    auto stats = std::make_shared<std::vector<std::pair<double, double>>>();
    stats->reserve(static_cast<std::size_t>(R * groups));
    for (std::int64_t r = 0; r < R; ++r) {
        for (int g = 0; g < groups; ++g) {
            const double* span = &x->value.data[static_cast<std::size_t>(r * C + g * gs)];
            double mean = 0;
            for (std::int64_t i = 0; i < gs; ++i) mean += span[i];
            mean /= static_cast<double>(gs);
            double var = 0;
            for (std::int64_t i = 0; i < gs; ++i) var += (span[i] - mean) * (span[i] - mean);
            var /= static_cast<double>(gs);
            const double inv_std = 1.0 / std::sqrt(var + eps);
            stats->emplace_back(mean, inv_std);
            double* ospan = &out.data[static_cast<std::size_t>(r * C + g * gs)];
            for (std::int64_t i = 0; i < gs; ++i) ospan[i] = (span[i] - mean) * inv_std;
        }
    }
    return make_node(std::move(out), {x}, [x, stats, R, C, groups, gs](Node& n) {
        auto& gx = x->ensure_grad();
        for (std::int64_t r = 0; r < R; ++r) {
            for (int g = 0; g < groups; ++g) {
                const auto [mean, inv_std] = (*stats)[static_cast<std::size_t>(r * groups + g)];
                norm_span_backward(&x->value.data[static_cast<std::size_t>(r * C + g * gs)],
                                   &n.grad.data[static_cast<std::size_t>(r * C + g * gs)],
                                   &gx.data[static_cast<std::size_t>(r * C + g * gs)], gs, mean, inv_std);
            }
        }
    });
}

// ---------------- sequence ops ----------------

Var causal_conv1d(const Var& x, const Var& w, const Var& b, int stride) {
    if (w->value.rank() != 3) throw ValidationError("causal_conv1d: weight must be (k, Cin, Cout)");
    const std::int64_t T = x->value.dim(0), Cin = x->value.dim(1);
    const std::int64_t K = w->value.dim(0), Cout = w->value.dim(2);
    if (w->value.dim(1) != Cin) throw ValidationError("causal_conv1d: Cin mismatch");
    if (b->value.numel() != Cout) throw ValidationError("causal_conv1d: bias size mismatch");
    if (stride < 1) throw ValidationError("causal_conv1d: stride must be >= 1");
    const std::int64_t To = (T - 1) / stride + 1;

    Tensor out({To, Cout});
    for (std::int64_t t = 0; t < To; ++t) {
        double* orow = &out.data[static_cast<std::size_t>(t * Cout)];
        for (std::int64_t co = 0; co < Cout; ++co) orow[co] = b->value.data[static_cast<std::size_t>(co)];
        for (std::int64_t j = 0; j < K; ++j) {
            const std::int64_t ti = stride * t - (K - 1) + j; // left zero padding
            if (ti < 0) continue;
            const double* xrow = &x->value.data[static_cast<std::size_t>(ti * Cin)];
            const double* wmat = &w->value.data[static_cast<std::size_t>(j * Cin * Cout)];
            for (std::int64_t ci = 0; ci < Cin; ++ci) {
                const double xv = xrow[ci];
                if (xv == 0.0) continue;
                const double* wrow = &wmat[static_cast<std::size_t>(ci * Cout)];
                for (std::int64_t co = 0; co < Cout; ++co) orow[co] += xv * wrow[co];
            }
        }
    }
    return make_node(std::move(out), {x, w, b}, [x, w, b, T, Cin, K, Cout, stride](Node& n) {
        const std::int64_t To = n.grad.dim(0);
        for (std::int64_t t = 0; t < To; ++t) {
            const double* grow = &n.grad.data[static_cast<std::size_t>(t * Cout)];
            if (b->requires_grad) {
                auto& gb = b->ensure_grad();
                for (std::int64_t co = 0; co < Cout; ++co) gb.data[static_cast<std::size_t>(co)] += grow[co];
            }
            for (std::int64_t j = 0; j < K; ++j) {
                const std::int64_t ti = stride * t - (K - 1) + j;
                if (ti < 0) continue;
                const double* xrow = &x->value.data[static_cast<std::size_t>(ti * Cin)];
                const double* wmat = &w->value.data[static_cast<std::size_t>(j * Cin * Cout)];
                if (w->requires_grad) {
                    auto& gw = w->ensure_grad();
                    double* gw_mat = &gw.data[static_cast<std::size_t>(j * Cin * Cout)];
                    for (std::int64_t ci = 0; ci < Cin; ++ci) {
                        const double xv = xrow[ci];
                        if (xv == 0.0) continue;
                        double* gw_row = &gw_mat[static_cast<std::size_t>(ci * Cout)];
                        for (std::int64_t co = 0; co < Cout; ++co) gw_row[co] += xv * grow[co];
                    }
                }
                if (x->requires_grad) {
                    auto& gx = x->ensure_grad();
                    double* gx_row = &gx.data[static_cast<std::size_t>(ti * Cin)];
                    for (std::int64_t ci = 0; ci < Cin; ++ci) {
                        const double* wrow = &wmat[static_cast<std::size_t>(ci * Cout)];
                        double acc = 0;
                        for (std::int64_t co = 0; co < Cout; ++co) acc += wrow[co] * grow[co];
                        gx_row[ci] += acc;
                    }
                }
            }
        }
    });
}

Var upsample2x_causal(const Var& x) {
    const std::int64_t T = x->value.dim(0), C = x->value.dim(1);
    if (T < 1) throw ValidationError("upsample2x_causal: empty input");
    const std::int64_t To = 2 * T - 1;
    Tensor out({To, C});
    for (std::int64_t t = 0; t < T; ++t) {
        for (std::int64_t c = 0; c < C; ++c) {
            out.data[static_cast<std::size_t>(2 * t * C + c)] = x->value.data[static_cast<std::size_t>(t * C + c)];
            if (t + 1 < T)
                out.data[static_cast<std::size_t>((2 * t + 1) * C + c)] =
                    0.5 * (x->value.data[static_cast<std::size_t>(t * C + c)] +
                           x->value.data[static_cast<std::size_t>((t + 1) * C + c)]);
        }
    }
    return make_node(std::move(out), {x}, [x, T, C](Node& n) {
        auto& gx = x->ensure_grad();
        for (std::int64_t t = 0; t < T; ++t) {
            for (std::int64_t c = 0; c < C; ++c) {
                double g = n.grad.data[static_cast<std::size_t>(2 * t * C + c)];
                if (t + 1 < T) g += 0.5 * n.grad.data[static_cast<std::size_t>((2 * t + 1) * C + c)];
                if (t > 0) g += 0.5 * n.grad.data[static_cast<std::size_t>((2 * t - 1) * C + c)];
                gx.data[static_cast<std::size_t>(t * C + c)] += g;
            }
        }
    });
}

// ---------------- embeddings / attention ----------------

Var embedding(const Var& table, const std::vector<int>& ids) {
    const std::int64_t V = table->value.dim(0), D = table->value.dim(1);
    for (int id : ids)
        if (id < 0 || id >= V) throw ValidationError("embedding: token id out of range");
    Tensor out({static_cast<std::int64_t>(ids.size()), D});
    for (std::size_t i = 0; i < ids.size(); ++i)
        std::copy(table->value.data.begin() + static_cast<std::ptrdiff_t>(ids[i] * D),
                  table->value.data.begin() + static_cast<std::ptrdiff_t>((ids[i] + 1) * D),
                  out.data.begin() + static_cast<std::ptrdiff_t>(i * static_cast<std::size_t>(D)));
    return make_node(std::move(out), {table}, [table, ids, D](Node& n) {
        auto& gt = table->ensure_grad();
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::int64_t d = 0; d < D; ++d)
                gt.data[static_cast<std::size_t>(ids[i] * D + d)] +=
                    n.grad.data[i * static_cast<std::size_t>(D) + static_cast<std::size_t>(d)];
    });
}

AttentionMask AttentionMask::all_allowed(std::int64_t n) {
    AttentionMask m;
    m.n = n;
    m.allow.assign(static_cast<std::size_t>(n * n), 1);
    return m;
}

Var attention(const Var& q, const Var& k, const Var& v, int heads, const AttentionMask& mask) {
    const std::int64_t L = q->value.dim(0), D = q->value.dim(1);
    if (k->value.dim(0) != L || v->value.dim(0) != L || k->value.dim(1) != D || v->value.dim(1) != D)
        throw ValidationError("attention: q/k/v shape mismatch");
    if (heads <= 0 || D % heads != 0) throw ValidationError("attention: width not divisible by heads");
    if (mask.n != L) throw ValidationError("attention: mask size mismatch");
    const std::int64_t dh = D / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    for (std::int64_t r = 0; r < L; ++r) {
        bool any = false;
        for (std::int64_t c = 0; c < L; ++c)
            if (mask.allowed(r, c)) {
                any = true;
                break;
            }
        if (!any) throw ConfigError("attention: query row with zero permitted keys");
    }

    // per-head probability matrices saved for backward
    auto probs = std::make_shared<std::vector<MatrixRM>>();
    probs->reserve(static_cast<std::size_t>(heads));
    Tensor out({L, D});

    for (int h = 0; h < heads; ++h) {
        const std::int64_t off = h * dh;
        MatrixRM P(L, L);
        for (std::int64_t r = 0; r < L; ++r) {
            double max_logit = -std::numeric_limits<double>::infinity();
            std::vector<double> logits(static_cast<std::size_t>(L), 0.0);
            for (std::int64_t c = 0; c < L; ++c) {
                if (!mask.allowed(r, c)) continue;
                double dot = 0;
                const double* qrow = &q->value.data[static_cast<std::size_t>(r * D + off)];
                const double* krow = &k->value.data[static_cast<std::size_t>(c * D + off)];
                for (std::int64_t d = 0; d < dh; ++d) dot += qrow[d] * krow[d];
                logits[static_cast<std::size_t>(c)] = dot * scale;
                max_logit = std::max(max_logit, logits[static_cast<std::size_t>(c)]);
            }
            double denom = 0;
            for (std::int64_t c = 0; c < L; ++c) {
                const double e = mask.allowed(r, c) ? std::exp(logits[static_cast<std::size_t>(c)] - max_logit) : 0.0;
                P(r, c) = e;
                denom += e;
            }
            for (std::int64_t c = 0; c < L; ++c) P(r, c) /= denom;
        }
        // O_h = P * V_h
        for (std::int64_t r = 0; r < L; ++r) {
            double* orow = &out.data[static_cast<std::size_t>(r * D + off)];
            for (std::int64_t c = 0; c < L; ++c) {
                const double p = P(r, c);
                if (p == 0.0) continue;
                const double* vrow = &v->value.data[static_cast<std::size_t>(c * D + off)];
                for (std::int64_t d = 0; d < dh; ++d) orow[d] += p * vrow[d];
            }
        }
        probs->push_back(std::move(P));
    }

    return make_node(std::move(out), {q, k, v}, [q, k, v, probs, heads, dh, scale, L, D](Node& n) {
        for (int h = 0; h < heads; ++h) {
            const std::int64_t off = h * dh;
            const MatrixRM& P = (*probs)[static_cast<std::size_t>(h)];

            // dP(r,c) = dO_r . V_c ; dV_c += sum_r P(r,c) dO_r
            MatrixRM dP = MatrixRM::Zero(L, L);
            for (std::int64_t r = 0; r < L; ++r) {
                const double* gor = &n.grad.data[static_cast<std::size_t>(r * D + off)];
                for (std::int64_t c = 0; c < L; ++c) {
                    if (P(r, c) == 0.0) continue; // blocked or vanished entries carry no grad
                    const double* vrow = &v->value.data[static_cast<std::size_t>(c * D + off)];
                    double dot = 0;
                    for (std::int64_t d = 0; d < dh; ++d) dot += gor[d] * vrow[d];
                    dP(r, c) = dot;
                }
            }
            if (v->requires_grad) {
                auto& gv = v->ensure_grad();
                for (std::int64_t c = 0; c < L; ++c) {
                    double* gvr = &gv.data[static_cast<std::size_t>(c * D + off)];
                    for (std::int64_t r = 0; r < L; ++r) {
                        const double p = P(r, c);
                        if (p == 0.0) continue;
                        const double* gor = &n.grad.data[static_cast<std::size_t>(r * D + off)];
                        for (std::int64_t d = 0; d < dh; ++d) gvr[d] += p * gor[d];
                    }
                }
            }

            // softmax backward: dS = P .* (dP - rowsum(dP .* P))
            MatrixRM dS(L, L);
            for (std::int64_t r = 0; r < L; ++r) {
                double dot = 0;
                for (std::int64_t c = 0; c < L; ++c) dot += dP(r, c) * P(r, c);
                for (std::int64_t c = 0; c < L; ++c) dS(r, c) = P(r, c) * (dP(r, c) - dot);
            }

            if (q->requires_grad) {
                auto& gq = q->ensure_grad();
                for (std::int64_t r = 0; r < L; ++r) {
                    double* gqr = &gq.data[static_cast<std::size_t>(r * D + off)];
                    for (std::int64_t c = 0; c < L; ++c) {
                        const double s = dS(r, c) * scale;
                        if (s == 0.0) continue;
                        const double* krow = &k->value.data[static_cast<std::size_t>(c * D + off)];
                        for (std::int64_t d = 0; d < dh; ++d) gqr[d] += s * krow[d];
                    }
                }
            }
            if (k->requires_grad) {
                auto& gk = k->ensure_grad();
                for (std::int64_t c = 0; c < L; ++c) {
                    double* gkr = &gk.data[static_cast<std::size_t>(c * D + off)];
                    for (std::int64_t r = 0; r < L; ++r) {
                        const double s = dS(r, c) * scale;
                        if (s == 0.0) continue;
                        const double* qrow = &q->value.data[static_cast<std::size_t>(r * D + off)];
                        for (std::int64_t d = 0; d < dh; ++d) gkr[d] += s * qrow[d];
                    }
                }
            }
        }
    });
}

namespace {

// pair counts per axis: t takes the remainder so every pair belongs to an axis
std::array<std::int64_t, 3> rope_axis_pairs(std::int64_t pairs_per_head) {
    const std::int64_t third = pairs_per_head / 3;
    return {pairs_per_head - 2 * third, third, third};
}

} // namespace

Var rope3d(const Var& x, const std::vector<std::array<int, 3>>& positions, int heads, double base) {
    const std::int64_t L = x->value.dim(0), D = x->value.dim(1);
    if (static_cast<std::int64_t>(positions.size()) != L) throw ValidationError("rope3d: positions size mismatch");
    if (heads <= 0 || D % heads != 0) throw ValidationError("rope3d: width not divisible by heads");
    const std::int64_t dh = D / heads;
    if (dh % 2 != 0) throw ValidationError("rope3d: head dim must be even");
    const auto axis_pairs = rope_axis_pairs(dh / 2);

    // per-row angles, shared across heads
    auto angles = std::make_shared<std::vector<double>>(static_cast<std::size_t>(L * (dh / 2)));
    for (std::int64_t r = 0; r < L; ++r) {
        std::int64_t pair = 0;
        for (int axis = 0; axis < 3; ++axis) {
            for (std::int64_t j = 0; j < axis_pairs[static_cast<std::size_t>(axis)]; ++j, ++pair) {
                const double freq =
                    std::pow(base, -static_cast<double>(j) / static_cast<double>(axis_pairs[static_cast<std::size_t>(axis)]));
                (*angles)[static_cast<std::size_t>(r * (dh / 2) + pair)] =
                    static_cast<double>(positions[static_cast<std::size_t>(r)][static_cast<std::size_t>(axis)]) * freq;
            }
        }
    }

    Tensor out = x->value;
    for (std::int64_t r = 0; r < L; ++r) {
        for (int h = 0; h < heads; ++h) {
            const std::int64_t off = r * D + h * dh;
            for (std::int64_t pair = 0; pair < dh / 2; ++pair) {
                const double a = (*angles)[static_cast<std::size_t>(r * (dh / 2) + pair)];
                const double c = std::cos(a), s = std::sin(a);
                const double x0 = x->value.data[static_cast<std::size_t>(off + 2 * pair)];
                const double x1 = x->value.data[static_cast<std::size_t>(off + 2 * pair + 1)];
                out.data[static_cast<std::size_t>(off + 2 * pair)] = x0 * c - x1 * s;
                out.data[static_cast<std::size_t>(off + 2 * pair + 1)] = x0 * s + x1 * c;
            }
        }
    }
    return make_node(std::move(out), {x}, [x, angles, heads, dh, L, D](Node& n) {
        auto& gx = x->ensure_grad();
        for (std::int64_t r = 0; r < L; ++r) {
            for (int h = 0; h < heads; ++h) {
                const std::int64_t off = r * D + h * dh;
                for (std::int64_t pair = 0; pair < dh / 2; ++pair) {
                    const double a = (*angles)[static_cast<std::size_t>(r * (dh / 2) + pair)];
                    const double c = std::cos(a), s = std::sin(a);
                    const double g0 = n.grad.data[static_cast<std::size_t>(off + 2 * pair)];
                    const double g1 = n.grad.data[static_cast<std::size_t>(off + 2 * pair + 1)];
                    // transpose rotation
                    gx.data[static_cast<std::size_t>(off + 2 * pair)] += g0 * c + g1 * s;
                    gx.data[static_cast<std::size_t>(off + 2 * pair + 1)] += -g0 * s + g1 * c;
                }
            }
        }
    });
}

Tensor sinusoidal_encoding(double position, int dim, double base) {
    if (dim % 2 != 0) throw ValidationError("sinusoidal_encoding: dim must be even");
    Tensor out({dim});
    for (int i = 0; i < dim / 2; ++i) {
        const double freq = std::pow(base, -2.0 * static_cast<double>(i) / static_cast<double>(dim));
        out.data[static_cast<std::size_t>(2 * i)] = std::sin(position * freq);
        out.data[static_cast<std::size_t>(2 * i + 1)] = std::cos(position * freq);
    }
    return out;
}

} // namespace egtw::nn
