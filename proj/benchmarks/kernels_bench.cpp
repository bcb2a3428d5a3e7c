#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "rdl/autograd.hpp"
#include "rdl/dsp.hpp"
#include "rdl/fft.hpp"
#include "rdl/random.hpp"

namespace {

rdl::Tensor random(rdl::Shape shape, std::uint64_t seed) {
  rdl::Tensor t(std::move(shape));
  rdl::Rng rng(seed);
  for (auto& v : t.values()) v = rdl::Real(rng.uniform(-1, 1));
  return t;
}

// args: frames, in channels, out channels, kernel, dilation
void BM_ConvForward(benchmark::State& state) {
  const auto frames = std::size_t(state.range(0)), cin = std::size_t(state.range(1)),
             cout = std::size_t(state.range(2)), k = std::size_t(state.range(3));
  const int dilation = int(state.range(4));
  const rdl::Tensor x = random({frames, cin}, 1), w = random({k, cin, cout}, 2), b = random({cout}, 3);
  for (auto _ : state) {
    rdl::Tape tape;
    auto y = rdl::ops::causal_conv1d(tape.constant(x), tape.constant(w), tape.constant(b), dilation);
    benchmark::DoNotOptimize(y.value().data());
  }
  state.SetItemsProcessed(std::int64_t(state.iterations() * frames * cin * cout * k));
}
BENCHMARK(BM_ConvForward)->Args({200, 64, 64, 3, 1})->Args({200, 112, 16, 7, 8})->Args({200, 257, 64, 1, 1});

void BM_ConvBackward(benchmark::State& state) {
  const auto frames = std::size_t(state.range(0)), cin = std::size_t(state.range(1)),
             cout = std::size_t(state.range(2)), k = std::size_t(state.range(3));
  const int dilation = int(state.range(4));
  rdl::Parameter w{"w", random({k, cin, cout}, 2), rdl::Tensor({k, cin, cout})};
  rdl::Parameter b{"b", random({cout}, 3), rdl::Tensor({cout})};
  const rdl::Tensor x = random({frames, cin}, 1);
  for (auto _ : state) {
    rdl::Tape tape;
    auto y = rdl::ops::causal_conv1d(tape.constant(x), tape.parameter(w), tape.parameter(b), dilation);
    tape.backward(rdl::ops::sum(y));
    benchmark::DoNotOptimize(w.grad.data());
  }
  state.SetItemsProcessed(std::int64_t(state.iterations() * frames * cin * cout * k));
}
BENCHMARK(BM_ConvBackward)->Args({200, 64, 64, 3, 1})->Args({200, 112, 16, 7, 8});

void BM_Rfft512(benchmark::State& state) {
  std::vector<double> frame(rdl::dsp::kFrameLength);
  rdl::Rng rng(4);
  for (auto& v : frame) v = rng.normal();
  for (auto _ : state) {
    auto bins = rdl::dsp::rfft(frame);
    benchmark::DoNotOptimize(bins.data());
  }
}
BENCHMARK(BM_Rfft512);

void BM_AnalyzeSynthesize(benchmark::State& state) {
  rdl::dsp::AudioSignal x;
  rdl::Rng rng(5);
  for (int i = 0; i < rdl::dsp::kSampleRate; ++i) x.samples.push_back(0.3 * rng.normal());
  for (auto _ : state) {
    auto y = rdl::dsp::synthesize(rdl::dsp::analyze(x));
    benchmark::DoNotOptimize(y.samples.data());
  }
}
BENCHMARK(BM_AnalyzeSynthesize)->Unit(benchmark::kMillisecond);

}  // namespace
