#include <doctest.h>

#include <cmath>
#include <numbers>

#include "egtw/core/error.hpp"
#include "egtw/core/rng.hpp"
#include "egtw/nn/autodiff.hpp"
#include "egtw/nn/params.hpp"
#include "gradcheck.hpp"

using namespace egtw;
using namespace egtw::nn;
using egtw::testutil::grad_check;

namespace {

Var randn_param(std::vector<std::int64_t> shape, Rng& rng, double stddev = 1.0) {
    return parameter(Tensor::randn(std::move(shape), rng, stddev));
}

} // namespace

TEST_CASE("basic elementwise forward and backward") {
    Rng rng(1);
    Var a = randn_param({3, 4}, rng);
    Var b = randn_param({3, 4}, rng);
    Var loss = mean_all(mul(add(a, b), sub(a, b))); // mean(a^2 - b^2)
    backward(loss);
    for (std::size_t i = 0; i < a->value.data.size(); ++i) {
        CHECK(a->grad.data[i] == doctest::Approx(2.0 * a->value.data[i] / 12.0).epsilon(1e-9));
        CHECK(b->grad.data[i] == doctest::Approx(-2.0 * b->value.data[i] / 12.0).epsilon(1e-9));
    }
}

TEST_CASE("grad accumulates across backward calls and zero_grad resets") {
    Rng rng(2);
    Var a = randn_param({2, 2}, rng);
    Var l1 = sum_all(a);
    backward(l1);
    const double g1 = a->grad.data[0];
    Var l2 = sum_all(a);
    backward(l2);
    CHECK(a->grad.data[0] == doctest::Approx(2 * g1));
    zero_grad({a});
    CHECK(a->grad.data[0] == 0.0);
}

TEST_CASE("matmul against finite differences") {
    Rng rng(3);
    Var a = randn_param({4, 5}, rng);
    Var b = randn_param({5, 3}, rng);
    Var target = constant(Tensor::randn({4, 3}, rng));
    auto loss_fn = [&] { return mean_squared_error(matmul(a, b), target); };
    CHECK(grad_check(loss_fn, {a, b}) < 1e-6);
}

TEST_CASE("mlp block gradients match finite differences") {
    Rng rng(4);
    Var x = constant(Tensor::randn({6, 8}, rng));
    Var w1 = randn_param({8, 16}, rng, 0.5);
    Var b1 = randn_param({16}, rng, 0.1);
    Var w2 = randn_param({16, 8}, rng, 0.5);
    Var b2 = randn_param({8}, rng, 0.1);
    Var target = constant(Tensor::randn({6, 8}, rng));
    auto loss_fn = [&] { return mean_squared_error(linear(silu(linear(x, w1, b1)), w2, b2), target); };
    CHECK(grad_check(loss_fn, {w1, b1, w2, b2}) < 1e-3);
}

TEST_CASE("layer norm and group norm gradients") {
    Rng rng(5);
    Var x = randn_param({5, 12}, rng);
    Var t1 = constant(Tensor::randn({5, 12}, rng));
    auto ln_loss = [&] { return mean_squared_error(layer_norm_rows(x), t1); };
    CHECK(grad_check(ln_loss, {x}) < 1e-3);

    auto gn_loss = [&] { return mean_squared_error(group_norm_channels(x, 4), t1); };
    CHECK(grad_check(gn_loss, {x}) < 1e-3);
}

TEST_CASE("group norm normalizes per time step") {
    // one row's change never affects another row's output
    Rng rng(6);
    Tensor base = Tensor::randn({4, 8}, rng);
    Var x1 = constant(base);
    Tensor mod = base;
    for (int c = 0; c < 8; ++c) mod.at(3, c) += 5.0; // only the last row
    Var x2 = constant(mod);
    Tensor y1 = group_norm_channels(x1, 2)->value;
    Tensor y2 = group_norm_channels(x2, 2)->value;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 8; ++c) CHECK(y1.at(r, c) == y2.at(r, c));
}

TEST_CASE("causal conv1d: length arithmetic and receptive field") {
    Rng rng(7);
    const int T = 21, Cin = 3, Cout = 5;
    Var w = randn_param({3, Cin, Cout}, rng, 0.4);
    Var b = randn_param({Cout}, rng, 0.1);

    Tensor xbase = Tensor::randn({T, Cin}, rng);
    CHECK(causal_conv1d(constant(xbase), w, b, 1)->value.dim(0) == T);
    CHECK(causal_conv1d(constant(xbase), w, b, 2)->value.dim(0) == 11);

    // causality: output index t depends only on inputs <= stride * t
    for (int stride : {1, 2}) {
        const Tensor out0 = causal_conv1d(constant(xbase), w, b, stride)->value;
        for (int perturb = 0; perturb < T; ++perturb) {
            Tensor xmod = xbase;
            for (int c = 0; c < Cin; ++c) xmod.at(perturb, c) += 1.0;
            const Tensor out1 = causal_conv1d(constant(xmod), w, b, stride)->value;
            for (std::int64_t t = 0; t < out0.dim(0); ++t) {
                const bool reachable = perturb <= stride * t;
                bool changed = false;
                for (int c = 0; c < Cout; ++c)
                    if (out0.at(t, c) != out1.at(t, c)) changed = true;
                if (!reachable) CHECK(!changed);
            }
        }
    }
}

TEST_CASE("causal conv1d gradients, stride 1 and 2") {
    Rng rng(8);
    Var x = randn_param({9, 3}, rng);
    Var w = randn_param({3, 3, 4}, rng, 0.5);
    Var b = randn_param({4}, rng, 0.1);
    for (int stride : {1, 2}) {
        Var target = constant(Tensor::randn({stride == 1 ? 9 : 5, 4}, rng));
        auto loss_fn = [&, stride] { return mean_squared_error(causal_conv1d(x, w, b, stride), target); };
        CHECK(grad_check(loss_fn, {x, w, b}) < 1e-3);
    }
}

TEST_CASE("upsample2x causal: values and gradient") {
    Rng rng(9);
    Var x = randn_param({4, 2}, rng);
    Var y = upsample2x_causal(x);
    CHECK(y->value.dim(0) == 7);
    CHECK(y->value.at(0, 0) == x->value.at(0, 0));
    CHECK(y->value.at(1, 0) == doctest::Approx(0.5 * (x->value.at(0, 0) + x->value.at(1, 0))));
    CHECK(y->value.at(6, 1) == x->value.at(3, 1));
    Var target = constant(Tensor::randn({7, 2}, rng));
    auto loss_fn = [&] { return mean_squared_error(upsample2x_causal(x), target); };
    CHECK(grad_check(loss_fn, {x}) < 1e-6);
}

TEST_CASE("embedding lookup and scatter gradient") {
    Rng rng(10);
    Var table = randn_param({7, 4}, rng);
    const std::vector<int> ids = {1, 3, 3, 0};
    Var target = constant(Tensor::randn({4, 4}, rng));
    auto loss_fn = [&] { return mean_squared_error(embedding(table, ids), target); };
    CHECK(grad_check(loss_fn, {table}) < 1e-6);
    CHECK_THROWS_AS(embedding(table, {9}), ValidationError);
}

TEST_CASE("attention with all-permitted mask and identical keys averages values") {
    Rng rng(11);
    const int L = 5, D = 4;
    Tensor k = Tensor::zeros({L, D});
    for (int r = 0; r < L; ++r)
        for (int c = 0; c < D; ++c) k.at(r, c) = 1.0; // identical keys -> uniform softmax
    Var q = constant(Tensor::randn({L, D}, rng));
    Var kk = constant(k);
    Var v = constant(Tensor::randn({L, D}, rng));
    Var out = attention(q, kk, v, 1, AttentionMask::all_allowed(L));
    for (int c = 0; c < D; ++c) {
        double mean = 0;
        for (int r = 0; r < L; ++r) mean += v->value.at(r, c) / L;
        for (int r = 0; r < L; ++r) CHECK(out->value.at(r, c) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("attention with self-only mask returns own value") {
    Rng rng(12);
    const int L = 4, D = 6;
    AttentionMask mask;
    mask.n = L;
    mask.allow.assign(L * L, 0);
    for (int i = 0; i < L; ++i) mask.set(i, i, true);
    Var q = constant(Tensor::randn({L, D}, rng));
    Var k = constant(Tensor::randn({L, D}, rng));
    Var v = constant(Tensor::randn({L, D}, rng));
    Var out = attention(q, k, v, 2, mask);
    for (int r = 0; r < L; ++r)
        for (int c = 0; c < D; ++c) CHECK(out->value.at(r, c) == doctest::Approx(v->value.at(r, c)).epsilon(1e-12));
}

TEST_CASE("attention matches dense reference with explicit -inf fill on a random 12-token case") {
    Rng rng(13);
    const int L = 12, D = 8, H = 2, dh = D / H;
    Var q = constant(Tensor::randn({L, D}, rng));
    Var k = constant(Tensor::randn({L, D}, rng));
    Var v = constant(Tensor::randn({L, D}, rng));
    AttentionMask mask = AttentionMask::all_allowed(L);
    for (int r = 0; r < L; ++r)
        for (int c = 0; c < L; ++c)
            if (r != c && rng.uniform() < 0.4) mask.set(r, c, false);

    const Tensor out = attention(q, k, v, H, mask)->value;

    // dense oracle: logits with explicit -inf fill, then softmax
    for (int h = 0; h < H; ++h) {
        for (int r = 0; r < L; ++r) {
            std::vector<double> logits(L, -std::numeric_limits<double>::infinity());
            for (int c = 0; c < L; ++c) {
                if (!mask.allowed(r, c)) continue;
                double dot = 0;
                for (int d = 0; d < dh; ++d) dot += q->value.at(r, h * dh + d) * k->value.at(c, h * dh + d);
                logits[c] = dot / std::sqrt(static_cast<double>(dh));
            }
            const double m = *std::max_element(logits.begin(), logits.end());
            double denom = 0;
            std::vector<double> p(L, 0.0);
            for (int c = 0; c < L; ++c) {
                p[c] = std::exp(logits[c] - m);
                denom += p[c];
            }
            for (int d = 0; d < dh; ++d) {
                double expect = 0;
                for (int c = 0; c < L; ++c) expect += p[c] / denom * v->value.at(c, h * dh + d);
                CHECK(out.at(r, h * dh + d) == doctest::Approx(expect).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("attention rejects a query row with zero permitted keys") {
    AttentionMask mask = AttentionMask::all_allowed(3);
    for (int c = 0; c < 3; ++c) mask.set(1, c, false);
    Rng rng(14);
    Var q = constant(Tensor::randn({3, 4}, rng));
    CHECK_THROWS_AS(attention(q, q, q, 1, mask), ConfigError);
}

TEST_CASE("attention-with-mask layer gradients (qkv projections through attention)") {
    Rng rng(15);
    const int L = 6, D = 8;
    Var x = constant(Tensor::randn({L, D}, rng));
    Var wq = randn_param({D, D}, rng, 0.5);
    Var wk = randn_param({D, D}, rng, 0.5);
    Var wv = randn_param({D, D}, rng, 0.5);
    Var bq = randn_param({D}, rng, 0.05);
    AttentionMask mask = AttentionMask::all_allowed(L);
    mask.set(0, 3, false);
    mask.set(2, 5, false);
    mask.set(4, 1, false);
    Var target = constant(Tensor::randn({L, D}, rng));
    auto loss_fn = [&] {
        return mean_squared_error(
            attention(linear(x, wq, bq), matmul(x, wk), matmul(x, wv), 2, mask), target);
    };
    CHECK(grad_check(loss_fn, {wq, wk, wv, bq}) < 1e-3);
}

TEST_CASE("rope preserves norms") {
    Rng rng(16);
    const int L = 7, D = 12, H = 2;
    std::vector<std::array<int, 3>> pos;
    for (int i = 0; i < L; ++i) pos.push_back({i, i % 3, (i * 2) % 5});
    Var x = constant(Tensor::randn({L, D}, rng));
    const Tensor y = rope3d(x, pos, H)->value;
    for (int r = 0; r < L; ++r) {
        double nx = 0, ny = 0;
        for (int c = 0; c < D; ++c) {
            nx += x->value.at(r, c) * x->value.at(r, c);
            ny += y.at(r, c) * y.at(r, c);
        }
        CHECK(std::sqrt(ny) == doctest::Approx(std::sqrt(nx)).epsilon(1e-9));
    }
}

TEST_CASE("rope relative property per axis: dot depends only on position delta") {
    Rng rng(17);
    const int D = 12, H = 1;
    Tensor qrow = Tensor::randn({1, D}, rng);
    Tensor krow = Tensor::randn({1, D}, rng);

    for (int axis = 0; axis < 3; ++axis) {
        auto dot_at = [&](int pq, int pk) {
            std::array<int, 3> a{0, 0, 0}, b{0, 0, 0};
            a[static_cast<std::size_t>(axis)] = pq;
            b[static_cast<std::size_t>(axis)] = pk;
            Tensor stacked({2, D});
            for (int c = 0; c < D; ++c) {
                stacked.at(0, c) = qrow.at(0, c);
                stacked.at(1, c) = krow.at(0, c);
            }
            const Tensor r = rope3d(constant(stacked), {a, b}, H)->value;
            double dot = 0;
            for (int c = 0; c < D; ++c) dot += r.at(0, c) * r.at(1, c);
            return dot;
        };
        const double d1 = dot_at(3, 7);
        const double d2 = dot_at(10, 14); // same delta -4
        const double d3 = dot_at(2, 2);   // delta 0
        const double d4 = dot_at(9, 9);
        CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
        CHECK(d3 == doctest::Approx(d4).epsilon(1e-9));
    }
}

TEST_CASE("rope path gradients") {
    Rng rng(18);
    const int L = 5, D = 8;
    std::vector<std::array<int, 3>> pos;
    for (int i = 0; i < L; ++i) pos.push_back({i, i % 2, i % 3});
    Var x = constant(Tensor::randn({L, D}, rng));
    Var wq = randn_param({D, D}, rng, 0.5);
    Var wk = randn_param({D, D}, rng, 0.5);
    Var wv = randn_param({D, D}, rng, 0.5);
    Var target = constant(Tensor::randn({L, D}, rng));
    auto loss_fn = [&] {
        Var q = rope3d(matmul(x, wq), pos, 2);
        Var k = rope3d(matmul(x, wk), pos, 2);
        return mean_squared_error(attention(q, k, matmul(x, wv), 2, AttentionMask::all_allowed(L)), target);
    };
    CHECK(grad_check(loss_fn, {wq, wk, wv}) < 1e-3);
}

TEST_CASE("sinusoidal encoding at position 0 is (0,1,0,1,...)") {
    const Tensor e = sinusoidal_encoding(0.0, 8);
    for (int i = 0; i < 8; i += 2) {
        CHECK(e.data[i] == 0.0);
        CHECK(e.data[i + 1] == 1.0);
    }
}

TEST_CASE("adaln-style modulate + gate block gradients") {
    Rng rng(19);
    const int L = 5, D = 8, Dy = 6;
    Var x = constant(Tensor::randn({L, D}, rng));
    Var y = constant(Tensor::randn({1, Dy}, rng));
    Var w_mod = randn_param({Dy, 3 * D}, rng, 0.3);
    Var b_mod = randn_param({3 * D}, rng, 0.05);
    Var w_out = randn_param({D, D}, rng, 0.4);
    Var target = constant(Tensor::randn({L, D}, rng));
    auto loss_fn = [&] {
        Var mod = linear(silu(y), w_mod, b_mod);
        Var scale = add_scalar(slice_cols(mod, 0, D), 1.0);
        Var shift = slice_cols(mod, D, 2 * D);
        Var gate = slice_cols(mod, 2 * D, 3 * D);
        Var h = add_rowvec(mul_rowvec(layer_norm_rows(x), scale), shift);
        Var out = add(x, mul_rowvec(matmul(h, w_out), gate));
        return mean_squared_error(out, target);
    };
    CHECK(grad_check(loss_fn, {w_mod, b_mod, w_out}) < 1e-3);
}

TEST_CASE("slice and concat round trips with gradients") {
    Rng rng(20);
    Var x = randn_param({6, 9}, rng);
    Var target = constant(Tensor::randn({6, 9}, rng));
    auto loss_fn = [&] {
        Var a = slice_rows(x, 0, 2);
        Var b = slice_rows(x, 2, 6);
        Var joined = concat_rows({a, b});
        Var c1 = slice_cols(joined, 0, 4);
        Var c2 = slice_cols(joined, 4, 9);
        return mean_squared_error(concat_cols({c1, c2}), target);
    };
    Var roundtrip = concat_cols({slice_cols(x, 0, 4), slice_cols(x, 4, 9)});
    for (std::size_t i = 0; i < x->value.data.size(); ++i) CHECK(roundtrip->value.data[i] == x->value.data[i]);
    CHECK(grad_check(loss_fn, {x}) < 1e-6);
}

TEST_CASE("adam optimizes a quadratic and respects warmup") {
    ParamStore store;
    Rng rng(21);
    Var x = store.create_randn("x", {4}, rng, 1.0);
    AdamConfig cfg;
    cfg.lr = 0.05;
    cfg.warmup_steps = 10;
    Adam adam(cfg, store, {"x"});
    double first_step_move = -1;
    for (int step = 0; step < 400; ++step) {
        zero_grad({x});
        Var loss = mean_squared_error(x, constant(Tensor::full({4}, 3.0)));
        backward(loss);
        const Tensor before = x->value;
        adam.step();
        if (step == 0) {
            first_step_move = 0;
            for (int i = 0; i < 4; ++i)
                first_step_move = std::max(first_step_move, std::abs(x->value.data[i] - before.data[i]));
        }
    }
    for (int i = 0; i < 4; ++i) CHECK(x->value.data[i] == doctest::Approx(3.0).epsilon(1e-2));
    // warmup scales the first step down to lr/warmup
    CHECK(first_step_move < 0.011);
}

TEST_CASE("backward rejects non-scalar roots") {
    Rng rng(22);
    Var x = randn_param({2, 2}, rng);
    CHECK_THROWS_AS(backward(add(x, x)), ValidationError);
}
