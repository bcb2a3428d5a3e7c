#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rdl/dsp.hpp"
#include "rdl/tensor.hpp"
#include "rdl/xi.hpp"

namespace rdl::data {

inline constexpr int kMinSnrDb = -10;
inline constexpr int kMaxSnrDb = 20;
inline constexpr std::size_t kMaxCleanSamples = 10 * dsp::kSampleRate;
inline constexpr int kNoiseRetries = 16;

struct CorpusManifest {
  std::vector<std::string> clean;
  std::vector<std::string> noise;
  double validation_fraction = 0.05;
  std::uint64_t seed = 0;
};

// "[clean]" and "[noise]" sections, one path per line; '#' starts a
// comment. Relative paths resolve against `base_dir`.
CorpusManifest parse_manifest(const std::string& text, const std::string& base_dir = {});
CorpusManifest read_manifest(const std::string& path);

struct Corpus {
  std::vector<dsp::AudioSignal> clean;
  std::vector<dsp::AudioSignal> noise;
  std::vector<std::string> clean_ids;
  std::vector<std::string> noise_ids;
  std::vector<std::string> warnings;  // one per skipped file
};

// Unreadable, non-conforming or sub-frame files are skipped with a warning.
Corpus load_corpus(const CorpusManifest& manifest);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle; round(fraction * n) items go to validation. Both lists are
// returned sorted.
Split validation_split(std::size_t n, double fraction, std::uint64_t seed);

struct Mixed {
  dsp::AudioSignal clean;
  dsp::AudioSignal scaled_noise;
  dsp::AudioSignal noisy;
  int snr_db = 0;
  double alpha = 1.0;
  std::size_t clean_index = 0;
  std::size_t clean_offset = 0;
  std::size_t noise_index = 0;
  std::size_t noise_offset = 0;
};

struct TrainingExample {
  Tensor noisy;   // {frames, 257} magnitudes
  Tensor target;  // {frames, 257} mapped xi in (0, 1)
  int snr_db = 0;
  std::size_t clean_index = 0;
  std::size_t noise_index = 0;
  std::size_t noise_offset = 0;

  std::string provenance(const Corpus& corpus) const;
};

// Draws noisy mixtures from a pool of clean recordings. Example i uses its
// own RNG substream derived from (seed, i), so content never depends on
// generation order or threading.
class MixtureGenerator {
 public:
  MixtureGenerator(const Corpus& corpus, std::vector<std::size_t> clean_pool, std::uint64_t seed);

  Mixed mix(std::uint64_t index) const;
  TrainingExample example(std::uint64_t index, const xi::XiStatistics& stats) const;

  const Corpus& corpus() const { return *corpus_; }
  const std::vector<std::size_t>& pool() const { return pool_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const Corpus* corpus_;
  std::vector<std::size_t> pool_;
  std::uint64_t seed_;
};

// Examples batch_index*batch_size .. +batch_size of the generator's stream.
std::vector<TrainingExample> make_minibatch(const MixtureGenerator& gen, const xi::XiStatistics& stats,
                                            std::size_t batch_size, std::uint64_t batch_index);

// One example per clean recording in the pool, in pool order.
std::vector<TrainingExample> make_validation_set(const MixtureGenerator& gen, const xi::XiStatistics& stats);

// Clamped instantaneous xi_db frames drawn from the mixture stream until at
// least `min_frames` frames have been collected.
xi::XiStatistics sample_statistics(const MixtureGenerator& gen, std::size_t min_frames = xi::kMinStatFrames);

}  // namespace rdl::data
