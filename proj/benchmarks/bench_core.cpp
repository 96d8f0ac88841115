#include <benchmark/benchmark.h>

#include "dnerv/codec.hpp"
#include "dnerv/metrics.hpp"
#include "dnerv/model.hpp"
#include "dnerv/optim.hpp"
#include "dnerv/train.hpp"
#include "dnerv/video.hpp"

using namespace dnerv;

namespace {

// Decoder stage-3 shape of the tiny preset: the hottest conv in training.
static void BM_Conv2dForward(benchmark::State& state) {
    Rng rng(1);
    auto x = Tensor<float>::uniform({21, 16, 32}, rng, -1, 1);
    auto w = Tensor<float>::uniform({272, 21, 5, 5}, rng, -0.1f, 0.1f);
    auto b = Tensor<float>::zeros({272});
    NoGradGuard ng;
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, w, b, {1, 2, 1}));
    const double macs = 272.0 * 21 * 25 * 16 * 32;
    state.counters["GFLOP/s"] =
        benchmark::Counter(2 * macs, benchmark::Counter::kIsIterationInvariantRate,
                           benchmark::Counter::kIs1000);
}
BENCHMARK(BM_Conv2dForward);

static void BM_Conv2dTrainStep(benchmark::State& state) {
    Rng rng(2);
    auto x = Tensor<float>::uniform({21, 16, 32}, rng, -1, 1);
    auto w = Tensor<float>::uniform({272, 21, 5, 5}, rng, -0.1f, 0.1f, true);
    auto b = Tensor<float>::zeros({272}, true);
    for (auto _ : state) {
        w.zero_grad();
        b.zero_grad();
        auto loss = mean(square(conv2d(x, w, b, {1, 2, 1})));
        backward(loss);
        benchmark::DoNotOptimize(w.grad().data());
    }
}
BENCHMARK(BM_Conv2dTrainStep);

static void BM_TinyModelForward(benchmark::State& state) {
    ModelConfig cfg = preset("tiny-64x128");
    auto model = DnervModel<float>::build(cfg, 3);
    auto video = synth_video<float>(SynthKind::MovingSquare, 3, 64, 128, 4, 3);
    auto diff = diff_stream(video, 1, cfg.diff_variant);
    NoGradGuard ng;
    for (auto _ : state) benchmark::DoNotOptimize(model.forward(video.frames[1], diff));
}
BENCHMARK(BM_TinyModelForward);

static void BM_TinyModelTrainStep(benchmark::State& state) {
    ModelConfig cfg = preset("tiny-64x128");
    auto model = DnervModel<float>::build(cfg, 4);
    auto video = synth_video<float>(SynthKind::MovingSquare, 3, 64, 128, 4, 4);
    auto diff = diff_stream(video, 1, cfg.diff_variant);
    Adam<float> opt(model.params());
    for (auto _ : state) {
        opt.zero_grad();
        auto loss = loss_l2(model.forward(video.frames[1], diff), video.frames[1]);
        backward(loss);
        opt.step(5e-4);
    }
}
BENCHMARK(BM_TinyModelTrainStep);

static void BM_Ssim(benchmark::State& state) {
    Rng rng(5);
    auto x = Tensor<float>::uniform({3, 64, 128}, rng, 0, 1);
    auto y = Tensor<float>::uniform({3, 64, 128}, rng, 0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(ssim(x, y));
}
BENCHMARK(BM_Ssim);

static void BM_HuffmanRoundTrip(benchmark::State& state) {
    Rng rng(6);
    std::vector<std::uint16_t> codes(1 << 16);
    for (auto& c : codes) c = static_cast<std::uint16_t>(rng.below(256));
    for (auto _ : state) {
        auto rec = entropy_encode(codes);
        benchmark::DoNotOptimize(entropy_decode(rec));
    }
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * (1 << 16));
}
BENCHMARK(BM_HuffmanRoundTrip);

}  // namespace

BENCHMARK_MAIN();
