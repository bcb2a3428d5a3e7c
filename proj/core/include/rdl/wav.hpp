#pragma once

#include <string>

#include "rdl/dsp.hpp"
#include "rdl/errors.hpp"

namespace rdl::dsp {

// The file is valid PCM WAV but not at the required sample rate.
class SampleRateMismatch : public DataError {
 public:
  using DataError::DataError;
};

// 16-bit PCM, mono, 16 kHz RIFF/WAVE only; anything else is a DataError.
AudioSignal read_wav(const std::string& path);

// Clamps samples to [-1, 1] and quantizes to 16-bit PCM; written atomically.
void write_wav(const std::string& path, const AudioSignal& signal);

}  // namespace rdl::dsp
