#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "rdl/analysis.hpp"
#include "rdl/checkpoint.hpp"
#include "rdl/data.hpp"
#include "rdl/dsp.hpp"
#include "rdl/errors.hpp"
#include "rdl/file_util.hpp"
#include "rdl/gain.hpp"
#include "rdl/random.hpp"
#include "rdl/training.hpp"
#include "rdl/wav.hpp"
#include "rdl/xi.hpp"

namespace fs = std::filesystem;

namespace rdl::cli {
namespace {

constexpr const char* kLogHeader = "epoch,train_error,validation_error,wall_seconds";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

std::string join(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

void print_config(std::ostream& out, const std::string& command,
                  const std::vector<std::pair<std::string, std::string>>& fields) {
  out << "# " << command << "\n";
  for (const auto& [k, v] : fields) out << k << "=" << v << "\n";
}

void print_network(std::ostream& out, const NetworkConfig& cfg) {
  std::istringstream is(cfg.to_text());
  std::string line;
  while (std::getline(is, line)) out << "model." << line << "\n";
}

// Keeps the header and rows whose epoch is <= `epoch`.
std::string truncate_log(const std::string& text, std::uint64_t epoch) {
  std::istringstream is(text);
  std::string line;
  std::string out = std::string(kLogHeader) + "\n";
  bool first = true;
  while (std::getline(is, line)) {
    if (first) {
      first = false;
      continue;
    }
    if (line.empty()) continue;
    const auto row_epoch = std::stoull(line.substr(0, line.find(',')));
    if (row_epoch <= epoch) out += line + "\n";
  }
  return out;
}

std::string spectra_csv(const dsp::SpectrogramFrames& s) {
  std::string out = "frame,bin,value\n";
  char buf[96];
  for (std::size_t t = 0; t < s.frames; ++t) {
    for (std::size_t k = 0; k < dsp::kBins; ++k) {
      std::snprintf(buf, sizeof buf, "%zu,%zu,%.9g\n", t, k, s.mag(t, k));
      out += buf;
    }
  }
  return out;
}

}  // namespace

NetworkConfig ModelOptions::to_config(std::uint64_t seed) const {
  NetworkConfig cfg;
  cfg.family = parse_family(family);
  cfg.blocks = blocks;
  cfg.lattice_units = n;
  cfg.m1 = m1;
  cfg.local_residual = local_residual;
  cfg.global_dense = global_dense;
  cfg.init_seed = seed;
  cfg.validate();
  return cfg;
}

int run_analyze(const AnalyzeOptions& opt, std::ostream& out) {
  const NetworkConfig cfg = opt.model.to_config(1);
  print_config(out, "analyze", {{"out_dir", opt.out_dir}});
  print_network(out, cfg);
  const NetworkModel model = build_network(cfg);
  const AnalysisReport report = analyze(model);
  out << report.to_text();
  if (!opt.out_dir.empty()) {
    make_dir(opt.out_dir);
    write_file_atomic(join(opt.out_dir, "analysis.txt"), report.to_text());
    write_file_atomic(join(opt.out_dir, "analysis.csv"), report.to_csv());
  }
  return kExitOk;
}

int run_train(const TrainOptions& opt, std::ostream& out, std::ostream& err) {
  if (opt.out_dir.empty()) throw ConfigError("train: --out-dir is required");
  if (opt.epochs < 0) throw ConfigError("train: --epochs must be >= 0");
  if (opt.batch_size == 0) throw ConfigError("train: --batch-size must be >= 1");
  if (!(opt.learning_rate >= 0.0)) throw ConfigError("train: --learning-rate must be >= 0");
  data::CorpusManifest manifest = data::read_manifest(opt.manifest);
  if (manifest.clean.empty() || manifest.noise.empty()) {
    throw ConfigError("train: manifest " + opt.manifest + " lists no clean or no noise recordings");
  }
  manifest.validation_fraction = opt.validation_fraction;
  manifest.seed = opt.seed;

  const std::string ckpt_path = join(opt.out_dir, "model.ckpt");
  const std::string best_path = join(opt.out_dir, "model-best.ckpt");
  const std::string log_path = join(opt.out_dir, "train_log.csv");
  const std::string stats_path = join(opt.out_dir, "xi.stats");

  train::TrainConfig tc;
  tc.adam.learning_rate = Real(opt.learning_rate);
  tc.batch_size = opt.batch_size;
  tc.batches_per_epoch = opt.batches_per_epoch;
  tc.seed = opt.seed;

  std::optional<train::Trainer> trainer;
  std::string log;
  if (opt.resume && fs::exists(ckpt_path)) {
    trainer.emplace(load_checkpoint(ckpt_path), tc);
    if (trainer->state().seed != opt.seed) {
      throw ConfigError("train: checkpoint was trained with seed " + std::to_string(trainer->state().seed) +
                        ", --seed is " + std::to_string(opt.seed));
    }
    log = truncate_log(fs::exists(log_path) ? read_file_text(log_path) : std::string(), trainer->state().epoch);
  } else {
    trainer.emplace(build_network(opt.model.to_config(mix_seed(opt.seed, 0x1a17))), tc);
    log = std::string(kLogHeader) + "\n";
  }

  print_config(out, "train",
               {{"manifest", opt.manifest},
                {"out_dir", opt.out_dir},
                {"stats", opt.stats},
                {"epochs", std::to_string(opt.epochs)},
                {"seed", std::to_string(opt.seed)},
                {"batch_size", std::to_string(opt.batch_size)},
                {"batches_per_epoch", std::to_string(opt.batches_per_epoch)},
                {"learning_rate", fmt(opt.learning_rate)},
                {"validation_fraction", fmt(opt.validation_fraction)},
                {"resume", opt.resume ? "1" : "0"},
                {"start_epoch", std::to_string(trainer->state().epoch)}});
  print_network(out, trainer->model().config());

  make_dir(opt.out_dir);
  const data::Corpus corpus = data::load_corpus(manifest);
  for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";
  if (!corpus.warnings.empty()) err << "skipped " << corpus.warnings.size() << " file(s)\n";
  if (corpus.clean.empty() || corpus.noise.empty()) throw DataError("train: no usable clean or noise recordings");

  const data::Split split = data::validation_split(corpus.clean.size(), opt.validation_fraction, opt.seed);
  if (split.train.empty()) throw DataError("train: validation split leaves no training recordings");
  const data::MixtureGenerator train_gen(corpus, split.train, mix_seed(opt.seed, 1));

  xi::XiStatistics stats;
  if (!opt.stats.empty()) {
    stats = xi::read_stats(opt.stats);
  } else {
    stats = data::sample_statistics(data::MixtureGenerator(corpus, split.train, mix_seed(opt.seed, 3)));
  }
  if (stats.bins() != dsp::kBins) throw DataError("train: statistics cover " + std::to_string(stats.bins()) + " bins");
  xi::write_stats(stats_path, stats);

  std::vector<data::TrainingExample> validation;
  if (!split.validation.empty()) {
    validation = data::make_validation_set(data::MixtureGenerator(corpus, split.validation, mix_seed(opt.seed, 2)),
                                           stats);
  }
  out << "train_recordings=" << split.train.size() << "\nvalidation_recordings=" << split.validation.size() << "\n";

  while (trainer->state().epoch < std::uint64_t(opt.epochs)) {
    const auto start = std::chrono::steady_clock::now();
    const double train_error = trainer->train_epoch(train_gen, stats);
    const double val_error = trainer->validate(validation);
    const double seconds =
        opt.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
    const bool improved = val_error < trainer->state().best_validation;
    if (improved) trainer->state().best_validation = val_error;
    const auto epoch = trainer->state().epoch;
    log += std::to_string(epoch) + "," + fmt(train_error) + "," + fmt(val_error) + "," + fmt(seconds) + "\n";
    write_file_atomic(log_path, log);
    const auto bytes = trainer->checkpoint_bytes();
    write_file_atomic(ckpt_path, bytes);
    if (improved) write_file_atomic(best_path, bytes);
    out << "epoch " << epoch << " train " << fmt(train_error) << " validation " << fmt(val_error) << "\n";
  }
  if (!fs::exists(log_path)) write_file_atomic(log_path, log);
  if (!fs::exists(ckpt_path)) trainer->save(ckpt_path);
  return kExitOk;
}

int run_enhance(const EnhanceOptions& opt, std::ostream& out) {
  const gain::GainKind kind = gain::parse_gain(opt.gain);
  print_config(out, "enhance",
               {{"checkpoint", opt.checkpoint},
                {"stats", opt.stats},
                {"input", opt.input},
                {"output", opt.output},
                {"gain", gain::gain_name(kind)},
                {"dump_spectra", opt.dump_spectra}});
  const Checkpoint ck = load_checkpoint(opt.checkpoint);
  const xi::XiStatistics stats = xi::read_stats(opt.stats);
  if (stats.bins() != dsp::kBins) throw DataError("enhance: statistics cover " + std::to_string(stats.bins()) + " bins");
  if (ck.model.config().input_bins != int(dsp::kBins)) {
    throw ConfigError("enhance: model expects " + std::to_string(ck.model.config().input_bins) + " bins");
  }
  const dsp::AudioSignal input = dsp::read_wav(opt.input);
  const dsp::SpectrogramFrames noisy = dsp::analyze(input);
  const Tensor estimate = ck.model.predict(noisy.magnitude_tensor());
  const std::vector<double> xi_hat = xi::unmap_estimates(estimate, stats);
  const dsp::SpectrogramFrames enhanced = gain::apply_gain(noisy, xi_hat, kind);
  const dsp::AudioSignal output = dsp::synthesize(enhanced);
  dsp::write_wav(opt.output, output);
  if (!opt.dump_spectra.empty()) {
    make_dir(opt.dump_spectra);
    write_file_atomic(join(opt.dump_spectra, "noisy.csv"), spectra_csv(noisy));
    write_file_atomic(join(opt.dump_spectra, "enhanced.csv"), spectra_csv(enhanced));
  }
  out << "frames=" << noisy.frames << "\nsamples=" << output.samples.size() << "\n";
  return kExitOk;
}

int run_mix(const MixOptions& opt, std::ostream& out) {
  print_config(out, "mix",
               {{"clean", opt.clean},
                {"noise", opt.noise},
                {"snr_db", fmt(opt.snr_db)},
                {"output", opt.output},
                {"noise_output", opt.noise_output},
                {"seed", std::to_string(opt.seed)}});
  if (!std::isfinite(opt.snr_db)) throw ConfigError("mix: --snr must be finite");
  const dsp::AudioSignal clean = dsp::read_wav(opt.clean);
  const dsp::AudioSignal noise = dsp::read_wav(opt.noise);
  if (noise.samples.size() < clean.samples.size()) {
    throw DataError("mix: noise (" + std::to_string(noise.samples.size()) + " samples) is shorter than clean (" +
                    std::to_string(clean.samples.size()) + ")");
  }
  if (dsp::mean_power(clean.samples) <= 0.0) throw ConfigError("mix: clean input has zero power");
  Rng rng(mix_seed(opt.seed, 0x313c));
  const std::size_t offset = rng.uniform_index(noise.samples.size() - clean.samples.size() + 1);
  dsp::AudioSignal section;
  section.samples.assign(noise.samples.begin() + std::ptrdiff_t(offset),
                         noise.samples.begin() + std::ptrdiff_t(offset + clean.samples.size()));
  if (dsp::mean_power(section.samples) <= 0.0) throw ConfigError("mix: noise section has zero power");
  const dsp::Mixture m = dsp::mix_at_snr(clean, section, opt.snr_db);
  dsp::write_wav(opt.output, m.noisy);
  if (!opt.noise_output.empty()) dsp::write_wav(opt.noise_output, m.scaled_noise);
  out << "noise_offset=" << offset << "\nalpha=" << fmt(m.alpha)
      << "\nachieved_snr_db=" << fmt(dsp::measured_snr_db(clean, m.scaled_noise)) << "\n";
  return kExitOk;
}

int run_stats(const StatsOptions& opt, std::ostream& out, std::ostream& err) {
  print_config(out, "stats",
               {{"manifest", opt.manifest},
                {"output", opt.output},
                {"seed", std::to_string(opt.seed)},
                {"validation_fraction", fmt(opt.validation_fraction)},
                {"min_frames", std::to_string(opt.min_frames)}});
  if (opt.min_frames < xi::kMinStatFrames) {
    throw ConfigError("stats: --min-frames must be at least " + std::to_string(xi::kMinStatFrames));
  }
  const data::CorpusManifest manifest = data::read_manifest(opt.manifest);
  if (manifest.clean.empty() || manifest.noise.empty()) {
    throw ConfigError("stats: manifest " + opt.manifest + " lists no clean or no noise recordings");
  }
  const data::Corpus corpus = data::load_corpus(manifest);
  for (const auto& w : corpus.warnings) err << "warning: " << w << "\n";
  if (corpus.clean.empty() || corpus.noise.empty()) throw DataError("stats: no usable clean or noise recordings");
  const data::Split split = data::validation_split(corpus.clean.size(), opt.validation_fraction, opt.seed);
  if (split.train.empty()) throw DataError("stats: validation split leaves no training recordings");
  const xi::XiStatistics stats =
      data::sample_statistics(data::MixtureGenerator(corpus, split.train, mix_seed(opt.seed, 3)), opt.min_frames);
  xi::write_stats(opt.output, stats);
  out << "sample_count=" << stats.sample_count << "\nfloored_bins=" << stats.floored_bins.size() << "\n";
  return kExitOk;
}

}  // namespace rdl::cli
