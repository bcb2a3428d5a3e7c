#include "rdl/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "rdl/errors.hpp"
#include "rdl/file_util.hpp"
#include "rdl/random.hpp"
#include "rdl/wav.hpp"

namespace rdl::data {

CorpusManifest parse_manifest(const std::string& text, const std::string& base_dir) {
  CorpusManifest m;
  std::istringstream is(text);
  std::string line;
  std::vector<std::string>* section = nullptr;
  while (std::getline(is, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    if (line == "[clean]") {
      section = &m.clean;
    } else if (line == "[noise]") {
      section = &m.noise;
    } else if (line.front() == '[') {
      throw ConfigError("manifest: unknown section " + line);
    } else if (section == nullptr) {
      throw ConfigError("manifest: path outside of a [clean]/[noise] section: " + line);
    } else {
      std::filesystem::path p(line);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      section->push_back(p.string());
    }
  }
  return m;
}

CorpusManifest read_manifest(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_manifest(read_file_text(path), dir);
}

Corpus load_corpus(const CorpusManifest& manifest) {
  Corpus c;
  auto load = [&](const std::vector<std::string>& paths, std::vector<dsp::AudioSignal>& dst,
                  std::vector<std::string>& ids) {
    for (const auto& p : paths) {
      try {
        auto sig = dsp::read_wav(p);
        if (sig.samples.size() < dsp::kFrameLength) throw DataError(p + ": shorter than one frame");
        dst.push_back(std::move(sig));
        ids.push_back(p);
      } catch (const DataError& e) {
        c.warnings.push_back(e.what());
      }
    }
  };
  load(manifest.clean, c.clean, c.clean_ids);
  load(manifest.noise, c.noise, c.noise_ids);
  return c;
}

Split validation_split(std::size_t n, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) throw ConfigError("validation fraction must be in [0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x5b1d));
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);
  const auto n_val = std::size_t(std::llround(fraction * double(n)));
  Split s;
  s.validation.assign(order.begin(), order.begin() + std::ptrdiff_t(n_val));
  s.train.assign(order.begin() + std::ptrdiff_t(n_val), order.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::string TrainingExample::provenance(const Corpus& corpus) const {
  std::ostringstream os;
  os << "clean=" << (clean_index < corpus.clean_ids.size() ? corpus.clean_ids[clean_index] : "?")
     << " noise=" << (noise_index < corpus.noise_ids.size() ? corpus.noise_ids[noise_index] : "?")
     << " offset=" << noise_offset << " snr=" << snr_db << "dB";
  return os.str();
}

MixtureGenerator::MixtureGenerator(const Corpus& corpus, std::vector<std::size_t> clean_pool, std::uint64_t seed)
    : corpus_(&corpus), pool_(std::move(clean_pool)), seed_(seed) {
  if (pool_.empty()) throw ConfigError("mixture generator: empty clean pool");
  if (corpus.noise.empty()) throw ConfigError("mixture generator: no noise recordings");
  for (auto i : pool_) {
    if (i >= corpus.clean.size()) throw ConfigError("mixture generator: clean index out of range");
  }
}

Mixed MixtureGenerator::mix(std::uint64_t index) const {
  Rng rng(mix_seed(seed_, index));
  Mixed m;
  m.clean_index = pool_[rng.uniform_index(pool_.size())];
  const auto& full = corpus_->clean[m.clean_index].samples;
  std::size_t length = full.size();
  if (length > kMaxCleanSamples) {
    m.clean_offset = rng.uniform_index(length - kMaxCleanSamples + 1);
    length = kMaxCleanSamples;
  }
  m.clean.samples.assign(full.begin() + std::ptrdiff_t(m.clean_offset),
                         full.begin() + std::ptrdiff_t(m.clean_offset + length));

  bool found = false;
  for (int attempt = 0; attempt < kNoiseRetries && !found; ++attempt) {
    m.noise_index = rng.uniform_index(corpus_->noise.size());
    found = corpus_->noise[m.noise_index].samples.size() >= length;
  }
  if (!found) {
    throw DataError("no noise recording long enough for clean " + corpus_->clean_ids[m.clean_index] + " after " +
                    std::to_string(kNoiseRetries) + " draws");
  }
  const auto& noise = corpus_->noise[m.noise_index].samples;
  m.noise_offset = rng.uniform_index(noise.size() - length + 1);
  dsp::AudioSignal section;
  section.samples.assign(noise.begin() + std::ptrdiff_t(m.noise_offset),
                         noise.begin() + std::ptrdiff_t(m.noise_offset + length));
  m.snr_db = int(rng.uniform_int(kMinSnrDb, kMaxSnrDb));
  auto mixture = dsp::mix_at_snr(m.clean, section, double(m.snr_db));
  m.noisy = std::move(mixture.noisy);
  m.scaled_noise = std::move(mixture.scaled_noise);
  m.alpha = mixture.alpha;
  return m;
}

TrainingExample MixtureGenerator::example(std::uint64_t index, const xi::XiStatistics& stats) const {
  const Mixed m = mix(index);
  const auto noisy = dsp::analyze(m.noisy);
  const auto clean = dsp::analyze(m.clean);
  const auto noise = dsp::analyze(m.scaled_noise);
  TrainingExample ex;
  ex.noisy = noisy.magnitude_tensor();
  ex.target = xi::map_targets(xi::instantaneous_xi(clean.magnitude, noise.magnitude), clean.frames, stats);
  ex.snr_db = m.snr_db;
  ex.clean_index = m.clean_index;
  ex.noise_index = m.noise_index;
  ex.noise_offset = m.noise_offset;
  return ex;
}

std::vector<TrainingExample> make_minibatch(const MixtureGenerator& gen, const xi::XiStatistics& stats,
                                            std::size_t batch_size, std::uint64_t batch_index) {
  std::vector<TrainingExample> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(gen.example(batch_index * batch_size + i, stats));
  return batch;
}

std::vector<TrainingExample> make_validation_set(const MixtureGenerator& gen, const xi::XiStatistics& stats) {
  // Re-pin each example to one pool entry so every validation recording is used once.
  std::vector<TrainingExample> out;
  out.reserve(gen.pool().size());
  for (std::size_t i = 0; i < gen.pool().size(); ++i) {
    MixtureGenerator single(gen.corpus(), {gen.pool()[i]}, gen.seed());
    out.push_back(single.example(i, stats));
  }
  return out;
}

xi::XiStatistics sample_statistics(const MixtureGenerator& gen, std::size_t min_frames) {
  std::vector<double> db;
  std::size_t frames = 0;
  for (std::uint64_t i = 0; frames < min_frames; ++i) {
    const Mixed m = gen.mix(i);
    const auto clean = dsp::analyze(m.clean);
    const auto noise = dsp::analyze(m.scaled_noise);
    for (double x : xi::instantaneous_xi(clean.magnitude, noise.magnitude)) db.push_back(xi::xi_to_db(x));
    frames += clean.frames;
  }
  return xi::compute_stats(db, frames, dsp::kBins);
}

}  // namespace rdl::data
