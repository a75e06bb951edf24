#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "lowbridge/error.hpp"
#include "lowbridge/ops.hpp"
#include "lowbridge/rng.hpp"
#include "lowbridge/tensor.hpp"
#include "support/oracles.hpp"

using namespace lowbridge;

namespace {

std::vector<float> random_values(std::int64_t n, Pcg32& rng, double lo = -2.0,
                                 double hi = 2.0) {
    std::vector<float> v(static_cast<std::size_t>(n));
    for (auto& x : v)
        x = static_cast<float>(rng.uniform(lo, hi));
    return v;
}

oracle::dvec to_dvec(const Tensor& t) {
    return oracle::dvec(t.data(), t.data() + t.numel());
}

} // namespace

TEST_CASE("tensor basics") {
    Tensor t = Tensor::zeros({2, 3});
    CHECK(t.numel() == 6);
    CHECK(t.dims() == Shape{2, 3});
    for (std::int64_t i = 0; i < 6; ++i)
        CHECK(t.data()[i] == 0.0f);

    Tensor s = Tensor::scalar(2.5f);
    CHECK(s.numel() == 1);
    CHECK(s.item() == doctest::Approx(2.5));

    CHECK_THROWS_AS(Tensor::from_data({2, 2}, {1.0f, 2.0f, 3.0f}), ShapeError);
}

TEST_CASE("conv2d all-ones 3x3 gives 9") {
    Tensor in = Tensor::full({1, 1, 3, 3}, 1.0f);
    Tensor w = Tensor::full({1, 1, 3, 3}, 1.0f);
    Tensor b = Tensor::zeros({1});
    Tensor out = conv2d(in, w, b);
    CHECK(out.dims() == Shape{1, 1, 1, 1});
    CHECK(out.item() == doctest::Approx(9.0));
}

TEST_CASE("conv2d identity kernel reproduces input") {
    Pcg32 rng(7, 1);
    Tensor in = Tensor::from_data({1, 1, 5, 5}, random_values(25, rng));
    std::vector<float> kv(9, 0.0f);
    kv[4] = 1.0f; // center
    Tensor w = Tensor::from_data({1, 1, 3, 3}, kv);
    Tensor b = Tensor::zeros({1});
    Tensor out = conv2d(in, w, b, 1, 1);
    REQUIRE(out.dims() == in.dims());
    for (std::int64_t i = 0; i < in.numel(); ++i)
        CHECK(out.data()[i] == in.data()[i]);
}

TEST_CASE("conv2d random case matches direct-loop oracle") {
    // 9x9 keeps (H + 2p - 3)/s integral for every stride/padding combination.
    Pcg32 rng(11, 2);
    Tensor in = Tensor::from_data({2, 3, 9, 9}, random_values(2 * 3 * 9 * 9, rng));
    Tensor w = Tensor::from_data({4, 3, 3, 3}, random_values(4 * 3 * 3 * 3, rng));
    Tensor b = Tensor::from_data({4}, random_values(4, rng));
    for (int stride : {1, 2}) {
        for (int padding : {0, 1}) {
            Tensor out = conv2d(in, w, b, stride, padding);
            oracle::dvec ref = oracle::conv2d(to_dvec(in), 2, 3, 9, 9, to_dvec(w), 4, 3, 3,
                                              to_dvec(b), stride, padding);
            REQUIRE(out.numel() == static_cast<std::int64_t>(ref.size()));
            for (std::size_t i = 0; i < ref.size(); ++i)
                CHECK(std::fabs(out.data()[i] - ref[i]) < 1e-5);
        }
    }
}

TEST_CASE("conv2d shape errors name the offending dimension") {
    Tensor in = Tensor::zeros({1, 2, 4, 4});
    Tensor w = Tensor::zeros({1, 3, 3, 3}); // channel mismatch
    Tensor b = Tensor::zeros({1});
    CHECK_THROWS_WITH_AS(conv2d(in, w, b), doctest::Contains("channel"), ShapeError);
    Tensor w2 = Tensor::zeros({1, 2, 2, 2}); // even kernel
    CHECK_THROWS_AS(conv2d(in, w2, b), ShapeError);
}

TEST_CASE("pool_max2x2 trivial and oracle cases") {
    Tensor t = Tensor::from_data({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
    CHECK(pool_max2x2(t).item() == doctest::Approx(4.0));

    Tensor c = Tensor::full({1, 2, 4, 4}, 0.75f);
    Tensor pc = pool_max2x2(c);
    CHECK(pc.dims() == Shape{1, 2, 2, 2});
    for (std::int64_t i = 0; i < pc.numel(); ++i)
        CHECK(pc.data()[i] == 0.75f);

    Pcg32 rng(3, 9);
    Tensor r = Tensor::from_data({1, 1, 6, 6}, random_values(36, rng));
    Tensor pr = pool_max2x2(r);
    oracle::dvec ref = oracle::pool_max2x2(to_dvec(r), 1, 1, 6, 6);
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(pr.data()[i] == doctest::Approx(ref[i]));

    CHECK_THROWS_AS(pool_max2x2(Tensor::zeros({1, 1, 3, 4})), ShapeError);
}

TEST_CASE("pool_max2x2 gradient goes to first max on ties") {
    Tensor t = Tensor::from_data({1, 1, 2, 2}, {5.0f, 5.0f, 5.0f, 5.0f}, true);
    Tensor out = pool_max2x2(t);
    out.backward();
    CHECK(t.grad()[0] == 1.0f);
    CHECK(t.grad()[1] == 0.0f);
    CHECK(t.grad()[2] == 0.0f);
    CHECK(t.grad()[3] == 0.0f);
}

TEST_CASE("upsample_nearest2x replicates blocks") {
    Tensor t = Tensor::from_data({1, 1, 1, 1}, {5.0f});
    Tensor up = upsample_nearest2x(t);
    REQUIRE(up.dims() == Shape{1, 1, 2, 2});
    for (std::int64_t i = 0; i < 4; ++i)
        CHECK(up.data()[i] == 5.0f);

    // down(up(const)) is identity
    Tensor c = Tensor::full({1, 1, 4, 4}, 0.3f);
    Tensor round = pool_max2x2(upsample_nearest2x(c));
    REQUIRE(round.dims() == c.dims());
    for (std::int64_t i = 0; i < c.numel(); ++i)
        CHECK(round.data()[i] == c.data()[i]);
}

TEST_CASE("instance_norm trivial cases") {
    Tensor c = Tensor::full({1, 1, 2, 2}, 3.0f);
    Tensor gamma = Tensor::full({1}, 1.0f);
    Tensor beta = Tensor::zeros({1});
    Tensor out = instance_norm(c, gamma, beta);
    for (std::int64_t i = 0; i < 4; ++i)
        CHECK(std::fabs(out.data()[i]) < 1e-3); // zero variance absorbed by eps

    Tensor z = Tensor::from_data({1, 1, 1, 2}, {0.0f, 2.0f});
    Tensor out2 = instance_norm(z, gamma, beta, 1e-12f);
    CHECK(out2.data()[0] == doctest::Approx(-1.0));
    CHECK(out2.data()[1] == doctest::Approx(1.0));
}

TEST_CASE("pointwise trivial cases") {
    Tensor x = Tensor::from_data({3}, {-1.0f, 0.0f, 2.0f});
    Tensor r = relu(x);
    CHECK(r.data()[0] == 0.0f);
    CHECK(r.data()[1] == 0.0f);
    CHECK(r.data()[2] == 2.0f);

    Tensor l = leaky_relu(x, 0.1f);
    CHECK(l.data()[0] == doctest::Approx(-0.1));
    CHECK(l.data()[2] == doctest::Approx(2.0));

    CHECK(sigmoid(Tensor::scalar(0.0f)).item() == doctest::Approx(0.5));

    Tensor a = Tensor::full({2}, 1.0f);
    Tensor b = Tensor::full({2}, 2.0f);
    Tensor s = add(a, b);
    CHECK(s.data()[0] == 3.0f);
    CHECK_THROWS_AS(add(a, Tensor::zeros({3})), ShapeError);

    Tensor sc = scale(Tensor::full({2}, 3.0f), 0.5f);
    CHECK(sc.data()[0] == doctest::Approx(1.5));
}

TEST_CASE("concat_channels matches slice-copy oracle") {
    Pcg32 rng(21, 4);
    Tensor a = Tensor::from_data({2, 2, 3, 3}, random_values(2 * 2 * 9, rng));
    Tensor b = Tensor::from_data({2, 3, 3, 3}, random_values(2 * 3 * 9, rng));
    Tensor cat = concat_channels(a, b);
    REQUIRE(cat.dims() == Shape{2, 5, 3, 3});
    oracle::dvec ref = oracle::concat_channels(to_dvec(a), to_dvec(b), 2, 2, 3, 3, 3);
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(cat.data()[i] == doctest::Approx(ref[i]));

    CHECK_THROWS_AS(concat_channels(a, Tensor::zeros({2, 3, 4, 3})), ShapeError);
}

TEST_CASE("softmax_channels distribution properties") {
    Tensor z = Tensor::zeros({1, 4, 2, 2});
    Tensor s = softmax_channels(z);
    for (std::int64_t i = 0; i < s.numel(); ++i)
        CHECK(s.data()[i] == doctest::Approx(0.25));

    // extreme logits do not overflow
    Tensor big = Tensor::from_data({1, 2, 1, 1}, {1000.0f, 0.0f});
    Tensor sb = softmax_channels(big);
    CHECK(sb.data()[0] == doctest::Approx(1.0));
    CHECK(sb.data()[1] == doctest::Approx(0.0));
    CHECK(std::isfinite(sb.data()[0]));

    Pcg32 rng(5, 5);
    Tensor r = Tensor::from_data({2, 3, 4, 4}, random_values(2 * 3 * 16, rng));
    Tensor sr = softmax_channels(r);
    oracle::dvec ref = oracle::softmax_channels(to_dvec(r), 2, 3, 16);
    for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(std::fabs(sr.data()[i] - ref[i]) < 1e-6);

    // per-pixel sums
    for (std::int64_t n = 0; n < 2; ++n)
        for (std::int64_t p = 0; p < 16; ++p) {
            double sum = 0.0;
            for (std::int64_t ch = 0; ch < 3; ++ch)
                sum += sr.data()[(n * 3 + ch) * 16 + p];
            CHECK(std::fabs(sum - 1.0) < 1e-5);
        }
}

TEST_CASE("backward on linear and quadratic forms") {
    // J = sum(w * x) with x fixed -> dJ/dw = x
    Pcg32 rng(17, 3);
    std::vector<float> xv = random_values(6, rng);
    Tensor w = Tensor::from_data({6}, random_values(6, rng), true);
    Tensor j = oracle::weighted_sum(w, xv);
    j.backward();
    for (std::size_t i = 0; i < 6; ++i)
        CHECK(w.grad()[i] == xv[i]);

    // J = w^2 at w=3 -> grad 6 (via mul by itself: use weighted_sum twice)
    Tensor w2 = Tensor::from_data({1}, {3.0f}, true);
    Tensor sq = oracle::weighted_sum(w2, {3.0f}); // 3*w, grad 3
    sq.backward();
    CHECK(w2.grad()[0] == 3.0f);
    w2.zero_grad();
    // accumulate twice without zero_grad
    oracle::weighted_sum(w2, {3.0f}).backward();
    oracle::weighted_sum(w2, {3.0f}).backward();
    CHECK(w2.grad()[0] == 6.0f);
}

TEST_CASE("backward rejects non-scalar roots") {
    Tensor t = Tensor::from_data({2}, {1.0f, 2.0f}, true);
    Tensor r = relu(t);
    CHECK_THROWS_AS(r.backward(), ValidationError);
}

TEST_CASE("no-grad guard suppresses graph recording") {
    Tensor x = Tensor::from_data({2}, {1.0f, -1.0f}, true);
    autograd::NoGradGuard guard;
    Tensor y = relu(x);
    CHECK(y.is_leaf());
    CHECK_FALSE(y.requires_grad());
}

TEST_CASE("ops are deterministic and do not mutate inputs") {
    Pcg32 rng(23, 6);
    std::vector<float> vals = random_values(2 * 3 * 8 * 8, rng);
    Tensor in = Tensor::from_data({2, 3, 8, 8}, vals);
    Tensor w = Tensor::from_data({4, 3, 3, 3}, random_values(4 * 3 * 3 * 3, rng));
    Tensor b = Tensor::from_data({4}, random_values(4, rng));

    Tensor o1 = conv2d(in, w, b, 1, 1);
    Tensor o2 = conv2d(in, w, b, 1, 1);
    CHECK(std::memcmp(o1.data(), o2.data(),
                      static_cast<std::size_t>(o1.numel()) * sizeof(float)) == 0);
    CHECK(std::memcmp(in.data(), vals.data(), vals.size() * sizeof(float)) == 0);
}

// ---------------------------------------------------------------------------
// Finite-difference harness over every registered op. Analytic float32
// gradients vs central differences of the double-precision oracles.

namespace {

void run_gradcheck(const oracle::GradCheckCase& c, int instances, std::uint64_t seed) {
    Pcg32 rng(seed, 0xFD);
    for (int k = 0; k < instances; ++k) {
        oracle::GradCheckResult res = oracle::grad_check(c, rng);
        CHECK(res.max_rel_err < 1e-3);
        CHECK_FALSE(res.inputs_mutated);
    }
}

} // namespace

TEST_CASE("gradcheck conv2d") {
    oracle::GradCheckCase c;
    c.input_dims = {{1, 2, 6, 6}, {3, 2, 3, 3}, {3}};
    c.graph = [](const std::vector<Tensor>& in) { return conv2d(in[0], in[1], in[2], 1, 1); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::conv2d(in[0], 1, 2, 6, 6, in[1], 3, 3, 3, in[2], 1, 1);
    };
    run_gradcheck(c, 20, 101);
}

TEST_CASE("gradcheck conv2d stride 2") {
    // 7x7, k=3, pad 1, stride 2 -> (7+2-3)/2+1 = 4, integral.
    oracle::GradCheckCase c;
    c.input_dims = {{1, 1, 7, 7}, {2, 1, 3, 3}, {2}};
    c.graph = [](const std::vector<Tensor>& in) { return conv2d(in[0], in[1], in[2], 2, 1); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::conv2d(in[0], 1, 1, 7, 7, in[1], 2, 3, 3, in[2], 2, 1);
    };
    run_gradcheck(c, 20, 102);
}

TEST_CASE("gradcheck pool_max2x2") {
    // Max has a kink wherever two window entries tie. Snap draws to a 0.2
    // grid plus a distinct per-window-slot offset so every 2x2 window keeps
    // a gap >= 0.05 between entries, far above the FD step.
    oracle::GradCheckCase c;
    c.input_dims = {{2, 2, 4, 4}};
    c.graph = [](const std::vector<Tensor>& in) { return pool_max2x2(in[0]); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::pool_max2x2(in[0], 2, 2, 4, 4);
    };
    c.prepare = [](std::size_t, std::vector<float>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            const int x = static_cast<int>(i % 4);
            const int y = static_cast<int>((i / 4) % 4);
            const int slot = (y % 2) * 2 + (x % 2);
            v[i] = std::round(v[i] / 0.2f) * 0.2f + 0.05f * static_cast<float>(slot);
        }
    };
    run_gradcheck(c, 20, 103);
}

TEST_CASE("gradcheck upsample_nearest2x") {
    oracle::GradCheckCase c;
    c.input_dims = {{2, 2, 3, 3}};
    c.graph = [](const std::vector<Tensor>& in) { return upsample_nearest2x(in[0]); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::upsample_nearest2x(in[0], 2, 2, 3, 3);
    };
    run_gradcheck(c, 20, 104);
}

TEST_CASE("gradcheck instance_norm") {
    oracle::GradCheckCase c;
    c.input_dims = {{2, 3, 4, 4}, {3}, {3}};
    c.graph = [](const std::vector<Tensor>& in) {
        return instance_norm(in[0], in[1], in[2], 1e-5f);
    };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::instance_norm(in[0], 2, 3, 4, 4, in[1], in[2], 1e-5);
    };
    run_gradcheck(c, 20, 105);
}

TEST_CASE("gradcheck relu family") {
    // Shift the sampling window so no input sits within h of the kink.
    oracle::GradCheckCase c;
    c.input_dims = {{3, 7}};
    c.lo = 0.01;
    c.hi = 2.0;
    c.graph = [](const std::vector<Tensor>& in) { return relu(in[0]); };
    c.reference = [](const std::vector<oracle::dvec>& in) { return oracle::relu(in[0]); };
    run_gradcheck(c, 10, 106);

    oracle::GradCheckCase cn = c;
    cn.lo = -2.0;
    cn.hi = -0.01;
    run_gradcheck(cn, 10, 107);

    oracle::GradCheckCase cl;
    cl.input_dims = {{3, 7}};
    cl.lo = 0.01;
    cl.hi = 2.0;
    cl.graph = [](const std::vector<Tensor>& in) { return leaky_relu(in[0], 0.1f); };
    cl.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::leaky_relu(in[0], 0.1);
    };
    run_gradcheck(cl, 10, 108);
    cl.lo = -2.0;
    cl.hi = -0.01;
    run_gradcheck(cl, 10, 109);
}

TEST_CASE("gradcheck sigmoid") {
    oracle::GradCheckCase c;
    c.input_dims = {{4, 5}};
    c.graph = [](const std::vector<Tensor>& in) { return sigmoid(in[0]); };
    c.reference = [](const std::vector<oracle::dvec>& in) { return oracle::sigmoid(in[0]); };
    run_gradcheck(c, 20, 110);
}

TEST_CASE("gradcheck concat and add") {
    oracle::GradCheckCase c;
    c.input_dims = {{1, 2, 3, 3}, {1, 3, 3, 3}};
    c.graph = [](const std::vector<Tensor>& in) { return concat_channels(in[0], in[1]); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::concat_channels(in[0], in[1], 1, 2, 3, 3, 3);
    };
    run_gradcheck(c, 20, 111);

    oracle::GradCheckCase ca;
    ca.input_dims = {{2, 5}, {2, 5}};
    ca.graph = [](const std::vector<Tensor>& in) { return add(in[0], in[1]); };
    ca.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::add(in[0], in[1]);
    };
    run_gradcheck(ca, 20, 112);
}

TEST_CASE("gradcheck softmax_channels") {
    oracle::GradCheckCase c;
    c.input_dims = {{1, 3, 3, 3}};
    c.graph = [](const std::vector<Tensor>& in) { return softmax_channels(in[0]); };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        return oracle::softmax_channels(in[0], 1, 3, 9);
    };
    run_gradcheck(c, 20, 113);
}

TEST_CASE("gradcheck composed stage (conv+norm+sigmoid+upsample)") {
    // sigmoid rather than relu: instance_norm centers values at zero, which
    // is exactly relu's kink where finite differences are meaningless. The
    // chain stays kink-free end to end (no max pooling) on purpose.
    oracle::GradCheckCase c;
    c.input_dims = {{1, 2, 6, 6}, {2, 2, 3, 3}, {2}, {2}, {2}};
    c.graph = [](const std::vector<Tensor>& in) {
        Tensor y = conv2d(in[0], in[1], in[2], 1, 1);
        y = instance_norm(y, in[3], in[4], 1e-5f);
        y = sigmoid(y);
        return upsample_nearest2x(y);
    };
    c.reference = [](const std::vector<oracle::dvec>& in) {
        oracle::dvec y = oracle::conv2d(in[0], 1, 2, 6, 6, in[1], 2, 3, 3, in[2], 1, 1);
        y = oracle::instance_norm(y, 1, 2, 6, 6, in[3], in[4], 1e-5);
        y = oracle::sigmoid(y);
        return oracle::upsample_nearest2x(y, 1, 2, 6, 6);
    };
    run_gradcheck(c, 10, 114);
}
