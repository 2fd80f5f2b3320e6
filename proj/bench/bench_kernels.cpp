// Parallel kernels vs their serial reference implementations.

#include <benchmark/benchmark.h>

#include <random>

#include "ngdc/image.hpp"
#include "ngdc/metrics.hpp"
#include "ngdc/noise_bank.hpp"
#include "ngdc/patch.hpp"
#include "ngdc/reference.hpp"
#include "ngdc/resize.hpp"
#include "ngdc/rng.hpp"

namespace {

ngdc::Image random_image(uint64_t seed, int h, int w, int c) {
    auto eng = ngdc::make_engine(seed);
    ngdc::Image img(h, w, c);
    for (auto& v : img.data)
        v = static_cast<float>(static_cast<double>(eng() >> 11) * 0x1.0p-53);
    return img;
}

void BM_BicubicParallel(benchmark::State& state) {
    const ngdc::Image img = random_image(1, 512, 512, 3);
    for (auto _ : state) {
        auto out = ngdc::bicubic_resize(img, 128, 128);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_BicubicParallel)->Unit(benchmark::kMillisecond);

void BM_BicubicDenseReference(benchmark::State& state) {
    const ngdc::Image img = random_image(1, 512, 512, 3);
    for (auto _ : state) {
        auto out = ngdc::ref::bicubic_resize_dense(img, 128, 128);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_BicubicDenseReference)->Unit(benchmark::kMillisecond);

void BM_SsimParallel(benchmark::State& state) {
    const ngdc::Image a = random_image(2, 256, 256, 3);
    const ngdc::Image b = random_image(3, 256, 256, 3);
    for (auto _ : state) benchmark::DoNotOptimize(ngdc::ssim(a, b));
}
BENCHMARK(BM_SsimParallel)->Unit(benchmark::kMillisecond);

void BM_SsimWindowedReference(benchmark::State& state) {
    const ngdc::Image a = random_image(2, 256, 256, 3);
    const ngdc::Image b = random_image(3, 256, 256, 3);
    for (auto _ : state) benchmark::DoNotOptimize(ngdc::ref::ssim_windowed(a, b));
}
BENCHMARK(BM_SsimWindowedReference)->Unit(benchmark::kMillisecond);

void BM_PatchStatsScan(benchmark::State& state) {
    const ngdc::Image img = random_image(4, 1024, 1024, 3);
    const ngdc::Image luma = ngdc::to_luma(img);
    for (auto _ : state) {
        double acc = 0.0;
        for (auto [row, col] : ngdc::grid_origins(img.height, img.width, 64))
            acc += ngdc::rect_luma_stats(luma, row, col, 64).sigma;
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_PatchStatsScan)->Unit(benchmark::kMillisecond);

void BM_PatchStatsTwoPassReference(benchmark::State& state) {
    const ngdc::Image img = random_image(4, 1024, 1024, 3);
    const auto patches = ngdc::extract_patch_grid(img, 64);
    for (auto _ : state) {
        double acc = 0.0;
        for (const auto& p : patches) acc += ngdc::ref::two_pass_stats(p).sigma;
        benchmark::DoNotOptimize(acc);
    }
}
BENCHMARK(BM_PatchStatsTwoPassReference)->Unit(benchmark::kMillisecond);

void BM_InjectNoise(benchmark::State& state) {
    const ngdc::Image lr = random_image(5, 256, 256, 3);
    ngdc::Patch p;
    p.pixels = random_image(6, 64, 64, 3);
    for (auto _ : state) {
        auto out = ngdc::inject_noise(lr, p, 42);
        benchmark::DoNotOptimize(out.data.data());
    }
}
BENCHMARK(BM_InjectNoise)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
