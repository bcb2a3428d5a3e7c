#include "rdl/dsp.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "rdl/errors.hpp"
#include "rdl/fft.hpp"

namespace rdl::dsp {

Tensor SpectrogramFrames::magnitude_tensor() const {
  return Tensor({frames, kBins}, std::vector<Real>(magnitude.begin(), magnitude.end()));
}

const std::vector<double>& hamming_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(kFrameLength);
    for (std::size_t n = 0; n < kFrameLength; ++n) {
      w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(n) / double(kFrameLength));
    }
    return w;
  }();
  return window;
}

std::size_t frame_count(std::size_t samples) {
  if (samples < kFrameLength) return 0;
  return (samples - kFrameLength) / kFrameShift + 1;
}

std::size_t synthesis_length(std::size_t frames) {
  return frames == 0 ? 0 : (frames - 1) * kFrameShift + kFrameLength;
}

SpectrogramFrames analyze(const AudioSignal& signal) {
  if (signal.sample_rate != kSampleRate) {
    throw DataError("expected " + std::to_string(kSampleRate) + " Hz audio, got " + std::to_string(signal.sample_rate));
  }
  if (signal.samples.size() < kFrameLength) {
    throw DataError("signal of " + std::to_string(signal.samples.size()) + " samples is shorter than one " +
                    std::to_string(kFrameLength) + "-sample frame");
  }
  const auto& window = hamming_window();
  SpectrogramFrames out;
  out.frames = frame_count(signal.samples.size());
  out.magnitude.resize(out.frames * kBins);
  out.phase.resize(out.frames * kBins);
  std::vector<double> frame(kFrameLength);
  for (std::size_t t = 0; t < out.frames; ++t) {
    const double* src = signal.samples.data() + t * kFrameShift;
    for (std::size_t n = 0; n < kFrameLength; ++n) frame[n] = src[n] * window[n];
    const auto bins = rfft(frame);
    for (std::size_t k = 0; k < kBins; ++k) {
      out.magnitude[t * kBins + k] = std::abs(bins[k]);
      out.phase[t * kBins + k] = std::arg(bins[k]);
    }
  }
  return out;
}

AudioSignal synthesize(const SpectrogramFrames& frames) {
  const auto& window = hamming_window();
  AudioSignal out;
  const std::size_t length = synthesis_length(frames.frames);
  out.samples.assign(length, 0.0);
  std::vector<double> norm(length, 0.0);
  std::vector<std::complex<double>> bins(kBins);
  for (std::size_t t = 0; t < frames.frames; ++t) {
    for (std::size_t k = 0; k < kBins; ++k) {
      bins[k] = std::polar(frames.magnitude[t * kBins + k], frames.phase[t * kBins + k]);
    }
    const auto frame = irfft(bins);
    const std::size_t start = t * kFrameShift;
    for (std::size_t n = 0; n < kFrameLength; ++n) {
      out.samples[start + n] += frame[n] * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  for (std::size_t i = 0; i < length; ++i) out.samples[i] /= std::max(norm[i], 1e-8);
  return out;
}

double mean_power(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  long double acc = 0;
  for (double v : x) acc += (long double)v * v;
  return double(acc / (long double)x.size());
}

Mixture mix_at_snr(const AudioSignal& clean, const AudioSignal& noise, double snr_db) {
  if (clean.samples.size() != noise.samples.size()) {
    throw ConfigError("mix_at_snr: noise section must match the clean length");
  }
  const double p_clean = mean_power(clean.samples);
  const double p_noise = mean_power(noise.samples);
  if (p_clean <= 0.0) throw DataError("mix_at_snr: clean signal is silent");
  if (p_noise <= 0.0) throw DataError("mix_at_snr: noise signal is silent");
  Mixture m;
  m.alpha = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  m.scaled_noise.sample_rate = m.noisy.sample_rate = clean.sample_rate;
  m.scaled_noise.samples.resize(noise.samples.size());
  m.noisy.samples.resize(clean.samples.size());
  for (std::size_t i = 0; i < clean.samples.size(); ++i) {
    m.scaled_noise.samples[i] = m.alpha * noise.samples[i];
    m.noisy.samples[i] = clean.samples[i] + m.scaled_noise.samples[i];
  }
  return m;
}

double measured_snr_db(const AudioSignal& clean, const AudioSignal& noise) {
  return 10.0 * std::log10(mean_power(clean.samples) / mean_power(noise.samples));
}

}  // namespace rdl::dsp
