// Microbenchmarks for the compute hot paths: convolution forward/backward,
// Canny extraction, surface-distance evaluation and full generator forward.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "lowbridge/edge.hpp"
#include "lowbridge/metrics.hpp"
#include "lowbridge/model.hpp"
#include "lowbridge/objective.hpp"
#include "lowbridge/ops.hpp"
#include "lowbridge/rng.hpp"
#include "lowbridge/tensor.hpp"

using namespace lowbridge;

namespace {

Tensor random_tensor(Shape dims, std::uint64_t seed, bool grad) {
    std::int64_t n = 1;
    for (auto d : dims)
        n *= d;
    Pcg32 rng(seed, 0x5EED);
    std::vector<float> v(static_cast<std::size_t>(n));
    for (auto& x : v)
        x = static_cast<float>(rng.uniform(-1.0, 1.0));
    return Tensor::from_data(std::move(dims), std::move(v), grad);
}

Image random_image(int size, std::uint64_t seed) {
    Pcg32 rng(seed, 0x1111);
    Image img(size, size);
    for (auto& x : img.v)
        x = rng.next_float();
    return gaussian_blur(img, 1.5, 4);
}

void bm_conv2d_forward(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    Tensor x = random_tensor({1, 8, size, size}, 1, false);
    Tensor w = random_tensor({8, 8, 3, 3}, 2, false);
    Tensor b = random_tensor({8}, 3, false);
    for (auto _ : state) {
        Tensor y = conv2d(x, w, b, 1, 1);
        benchmark::DoNotOptimize(y.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size) * size * 8 * 8 * 9);
}

void bm_conv2d_train_step(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    Tensor target = random_tensor({1, 8, size, size}, 4, false);
    for (auto _ : state) {
        state.PauseTiming();
        Tensor x = random_tensor({1, 8, size, size}, 1, false);
        Tensor w = random_tensor({8, 8, 3, 3}, 2, true);
        Tensor b = random_tensor({8}, 3, true);
        state.ResumeTiming();
        Tensor y = conv2d(x, w, b, 1, 1);
        Tensor l = mse_loss(y, target);
        l.backward();
        benchmark::DoNotOptimize(w.grad_data());
    }
}

void bm_canny(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    Image img = random_image(size, 7);
    CannyParams params;
    for (auto _ : state) {
        EdgeMap e = extract_edges(img, params);
        benchmark::DoNotOptimize(e.v.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size) * size);
}

void bm_asd(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    LabelMap a(size, size, 0), b(size, size, 0);
    const double r1 = size * 0.30, r2 = size * 0.27, c = size / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double d = std::hypot(y - c, x - c);
            if (d < r1)
                a.at(y, x) = 1;
            if (d < r2)
                b.at(y, x) = 1;
        }
    for (auto _ : state) {
        AsdResult r = asd(a, b, 1, {1.0f, 1.0f});
        benchmark::DoNotOptimize(r.value_mm);
    }
}

void bm_generator_forward(benchmark::State& state) {
    const int size = static_cast<int>(state.range(0));
    ModelSpec spec{ModelKind::mini_unet, 1, 1, 8, 3, FinalActivation::sigmoid};
    Model gen = build_model(spec, 42);
    Image img = random_image(size, 9);
    EdgeMap e = extract_edges(img, CannyParams{});
    autograd::NoGradGuard guard;
    for (auto _ : state) {
        Tensor y = forward_generator(gen.params(), {e});
        benchmark::DoNotOptimize(y.values().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(size) * size);
}

BENCHMARK(bm_conv2d_forward)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_conv2d_train_step)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_canny)->Arg(64)->Arg(224)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_asd)->Arg(64)->Arg(224)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_generator_forward)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
