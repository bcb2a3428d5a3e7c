#pragma once

#include <cstddef>
#include <vector>

#include "rdl/tensor.hpp"

namespace rdl::dsp {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kFrameLength = 512;  // 32 ms
inline constexpr std::size_t kFrameShift = 256;   // 16 ms
inline constexpr std::size_t kBins = kFrameLength / 2 + 1;

struct AudioSignal {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
};

// Row-major {frames x 257} magnitude and phase.
struct SpectrogramFrames {
  std::size_t frames = 0;
  std::vector<double> magnitude;
  std::vector<double> phase;

  double& mag(std::size_t t, std::size_t k) { return magnitude[t * kBins + k]; }
  double mag(std::size_t t, std::size_t k) const { return magnitude[t * kBins + k]; }

  Tensor magnitude_tensor() const;
};

// Periodic Hamming window, 0.54 - 0.46 cos(2 pi n / N).
const std::vector<double>& hamming_window();

std::size_t frame_count(std::size_t samples);
std::size_t synthesis_length(std::size_t frames);

// Throws DataError when the signal is shorter than one frame or not 16 kHz.
SpectrogramFrames analyze(const AudioSignal& signal);

// Inverse DFT per frame, Hamming synthesis window, overlap-add divided by
// the accumulated squared window (floored at 1e-8).
AudioSignal synthesize(const SpectrogramFrames& frames);

struct Mixture {
  AudioSignal noisy;
  AudioSignal scaled_noise;
  double alpha = 1.0;
};

double mean_power(const std::vector<double>& x);

// Scales `noise` so that 10 log10(P_clean / P_noise') == snr_db and adds it.
Mixture mix_at_snr(const AudioSignal& clean, const AudioSignal& noise, double snr_db);

double measured_snr_db(const AudioSignal& clean, const AudioSignal& noise);

}  // namespace rdl::dsp
