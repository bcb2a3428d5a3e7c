#include "oracles.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "rdl/autograd.hpp"
#include "rdl/random.hpp"
#include "rdl/wav.hpp"

namespace rdl::oracle {

data::Corpus toy_corpus(std::size_t clean_count, std::size_t noise_count, std::uint64_t seed,
                        std::size_t clean_samples, std::size_t noise_samples) {
  data::Corpus c;
  Rng rng(seed);
  const double fs = dsp::kSampleRate;
  for (std::size_t i = 0; i < clean_count; ++i) {
    const double f0 = rng.uniform(110.0, 260.0);
    const double rate = rng.uniform(2.0, 5.0);
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    dsp::AudioSignal s;
    s.samples.resize(clean_samples);
    for (std::size_t n = 0; n < clean_samples; ++n) {
      const double t = double(n) / fs;
      const double env = std::max(0.0, std::sin(2.0 * std::numbers::pi * rate * t + phase));
      double v = 0.0;
      for (int k = 1; k <= 4; ++k) v += std::sin(2.0 * std::numbers::pi * f0 * k * t) / k;
      s.samples[n] = 0.25 * env * v;
    }
    c.clean.push_back(std::move(s));
    c.clean_ids.push_back("tone" + std::to_string(i));
  }
  for (std::size_t i = 0; i < noise_count; ++i) {
    dsp::AudioSignal s;
    s.samples.resize(noise_samples);
    for (auto& v : s.samples) v = 0.1 * rng.normal();
    c.noise.push_back(std::move(s));
    c.noise_ids.push_back("white" + std::to_string(i));
  }
  return c;
}

dsp::AudioSignal speech_like(std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  const double fs = dsp::kSampleRate;
  struct Resonator {
    double a1 = 0, a2 = 0, y1 = 0, y2 = 0;
    void tune(double freq, double bandwidth) {
      const double r = std::exp(-std::numbers::pi * bandwidth / dsp::kSampleRate);
      a1 = 2 * r * std::cos(2 * std::numbers::pi * freq / dsp::kSampleRate);
      a2 = -r * r;
    }
    double step(double x) {
      const double y = x + a1 * y1 + a2 * y2;
      y2 = y1;
      y1 = y;
      return y;
    }
  };
  Resonator f[3];
  dsp::AudioSignal s;
  s.samples.resize(samples);
  std::size_t n = 0;
  double phase = 0;
  while (n < samples) {
    const std::size_t len = std::min(samples - n, std::size_t(rng.uniform(0.06, 0.2) * fs));
    const double kind = rng.uniform01();
    const double f0 = rng.uniform(90, 220);
    f[0].tune(rng.uniform(300, 900), 80);
    f[1].tune(rng.uniform(900, 2400), 120);
    f[2].tune(rng.uniform(2400, 3400), 200);
    for (std::size_t i = 0; i < len; ++i, ++n) {
      double x = 0;
      if (kind < 0.6) {
        phase += f0 / fs;
        if (phase >= 1) {
          phase -= 1;
          x = 1;
        }
      } else if (kind < 0.85) {
        x = 0.3 * rng.normal();
      }
      const double env = std::sin(std::numbers::pi * double(i) / double(len));
      s.samples[n] = 0.02 * env * (f[0].step(x) + 0.6 * f[1].step(x) + 0.3 * f[2].step(x));
    }
  }
  return s;
}

std::vector<lattice::NodeRef> walk_dense_input(int h, int l, int height) {
  using lattice::NodeRef;
  if (h == 1 && l == 1) return {NodeRef::block_input()};
  std::vector<NodeRef> out;
  if (l <= height) {
    if (h > l) throw std::logic_error("not a left-triangle unit");
    if (h == 1) return {NodeRef::output_of(1, l - 1)};
    if (l > h) out.push_back(NodeRef::output_of(h, l - 1));
    for (const auto& r : walk_dense_input(h - 1, l, height)) out.push_back(r);
    return out;
  }
  if (h > 2 * height - l) throw std::logic_error("not a right-triangle unit");
  out.push_back(NodeRef::output_of(h, l - 1));
  if (h == 2 * height - l) {
    out.push_back(NodeRef::output_of(h + 1, l - 1));
  } else {
    for (const auto& r : walk_dense_input(h + 1, l, height)) out.push_back(r);
  }
  return out;
}

int walk_width(int h, int l, int height, int m1, int input_channels) {
  int w = 0;
  for (const auto& r : walk_dense_input(h, l, height)) {
    w += r.kind == lattice::NodeRef::Kind::BlockInput ? input_channels : m1 >> (r.unit.h - 1);
  }
  return w;
}

Tensor random_tensor(std::size_t frames, std::size_t bins, std::uint64_t seed, double lo, double hi) {
  Rng rng(seed);
  Tensor t({frames, bins});
  for (auto& v : t.values()) v = Real(rng.uniform(lo, hi));
  return t;
}

namespace {

double loss_of(const NetworkModel& model, const Tensor& input, const Tensor& target) {
  Tape tape;
  return double(ops::binary_cross_entropy(model.forward(tape, tape.constant(input)), target).value()[0]);
}

}  // namespace

GradCheck gradient_check(NetworkModel& model, std::size_t frames, std::size_t samples, std::uint64_t seed,
                         double step, double floor) {
  const std::size_t bins = std::size_t(model.config().input_bins);
  const Tensor input = random_tensor(frames, bins, mix_seed(seed, 1), 0.0, 2.0);
  const Tensor target = random_tensor(frames, bins, mix_seed(seed, 2), 0.05, 0.95);
  auto& params = model.parameters();
  params.zero_grad();
  {
    Tape tape;
    const Var loss = ops::binary_cross_entropy(model.forward(tape, tape.constant(input)), target);
    tape.backward(loss);
  }
  Rng rng(mix_seed(seed, 3));
  const std::size_t total = params.total_size();
  GradCheck result;
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t flat = rng.uniform_index(total);
    std::size_t p = 0;
    while (flat >= params[p].value.size()) flat -= params[p++].value.size();
    Parameter& param = params[p];
    const Real saved = param.value[flat];
    auto central = [&](double h) {
      param.value[flat] = Real(double(saved) + h);
      const double up = loss_of(model, input, target);
      param.value[flat] = Real(double(saved) - h);
      const double down = loss_of(model, input, target);
      param.value[flat] = saved;
      return (up - down) / (2.0 * h);
    };
    // Richardson extrapolation cancels the O(h^2) term of the central difference.
    const double numeric = (4.0 * central(0.5 * step) - central(step)) / 3.0;
    const double analytic = double(param.grad[flat]);
    const double denom = std::max({std::abs(numeric), std::abs(analytic), floor});
    const double rel = std::abs(numeric - analytic) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst = param.name + "[" + std::to_string(flat) + "] analytic=" + std::to_string(analytic) +
                     " numeric=" + std::to_string(numeric);
    }
    ++result.checked;
  }
  return result;
}

double max_past_change(const NetworkModel& model, std::size_t frames, int trials, std::uint64_t seed) {
  const std::size_t bins = std::size_t(model.config().input_bins);
  Rng rng(seed);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const Tensor input = random_tensor(frames, bins, rng.next(), 0.0, 2.0);
    const std::size_t t = 1 + rng.uniform_index(frames - 1);
    Tensor perturbed = input;
    for (std::size_t k = 0; k < bins; ++k) perturbed.at(t, k) += Real(rng.uniform(0.5, 3.0));
    const Tensor a = model.predict(input);
    const Tensor b = model.predict(perturbed);
    for (std::size_t f = 0; f < t; ++f) {
      for (std::size_t k = 0; k < bins; ++k) worst = std::max(worst, std::abs(double(a.at(f, k) - b.at(f, k))));
    }
  }
  return worst;
}

TempDir::TempDir(const std::string& tag) {
  Rng rng(std::random_device{}());
  path_ = std::filesystem::temp_directory_path() / ("rdl-" + tag + "-" + std::to_string(rng.next() % 1000000007));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string write_corpus(const data::Corpus& corpus, const TempDir& dir) {
  std::string manifest = "[clean]\n";
  for (std::size_t i = 0; i < corpus.clean.size(); ++i) {
    const std::string name = corpus.clean_ids[i] + ".wav";
    dsp::write_wav(dir.file(name), corpus.clean[i]);
    manifest += name + "\n";
  }
  manifest += "[noise]\n";
  for (std::size_t i = 0; i < corpus.noise.size(); ++i) {
    const std::string name = corpus.noise_ids[i] + ".wav";
    dsp::write_wav(dir.file(name), corpus.noise[i]);
    manifest += name + "\n";
  }
  const std::string path = dir.file("corpus.manifest");
  std::ofstream(path) << manifest;
  return path;
}

}  // namespace rdl::oracle
