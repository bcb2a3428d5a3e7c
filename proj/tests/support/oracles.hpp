#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rdl/data.hpp"
#include "rdl/lattice.hpp"
#include "rdl/network.hpp"

namespace rdl::oracle {

// Harmonic tones with a slow on/off envelope, plus white-noise recordings.
data::Corpus toy_corpus(std::size_t clean_count, std::size_t noise_count, std::uint64_t seed,
                        std::size_t clean_samples = 16000, std::size_t noise_samples = 48000);

// Voiced/unvoiced source-filter signal: a glottal pulse train through three
// formant resonators, alternating with filtered noise bursts and pauses.
dsp::AudioSignal speech_like(std::size_t samples, std::uint64_t seed);

// Literal recursive expansion of the two dense-aggregation cases, used as
// an oracle for the closed form in the library.
std::vector<lattice::NodeRef> walk_dense_input(int h, int l, int height);

// Width of x_hl from the recursion, independent of BlockGraph.
int walk_width(int h, int l, int height, int m1, int input_channels);

// Random {frames, bins} tensor with entries in [lo, hi).
Tensor random_tensor(std::size_t frames, std::size_t bins, std::uint64_t seed, double lo = 0.0, double hi = 1.0);

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

// Compares analytic gradients of `samples` randomly chosen scalar
// parameters with Richardson-extrapolated central differences (steps h and
// h/2) on a BCE loss against a random target. Relative error is
// |a - n| / max(|a|, |n|, floor).
GradCheck gradient_check(NetworkModel& model, std::size_t frames, std::size_t samples, std::uint64_t seed,
                         double step = 1e-4, double floor = 1e-3);

// Perturbs the input at frame t and returns the largest output change at
// frames < t over `trials` random (t, input) pairs.
double max_past_change(const NetworkModel& model, std::size_t frames, int trials, std::uint64_t seed);

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Writes the corpus as WAV files plus a manifest; returns the manifest path.
std::string write_corpus(const data::Corpus& corpus, const TempDir& dir);

}  // namespace rdl::oracle
