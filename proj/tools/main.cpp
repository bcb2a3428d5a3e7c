#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "rdl/errors.hpp"
#include "rdl/wav.hpp"

namespace {

std::uint64_t default_seed() {
  const char* env = std::getenv("RDL_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw rdl::ConfigError(std::string("RDL_SEED is not an unsigned integer: ") + env);
  }
}

void add_model_flags(CLI::App* cmd, rdl::cli::ModelOptions& m) {
  cmd->add_option("--family", m.family, "rdl | resnet | densenet | densernet")->capture_default_str();
  cmd->add_option("--blocks", m.blocks, "number of blocks")->capture_default_str();
  cmd->add_option("--n", m.n, "RDL units per block (perfect square)")->capture_default_str();
  cmd->add_option("--m1", m.m1, "RDL output channels at height 1")->capture_default_str();
  cmd->add_flag("--lr,!--no-lr", m.local_residual, "local residual links");
  cmd->add_flag("--gd,!--no-gd", m.global_dense, "global dense links");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rdl::cli;
  std::uint64_t seed = 0;
  try {
    seed = default_seed();
  } catch (const rdl::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  CLI::App app{"rdl: residual-dense lattice network tools for a priori SNR estimation"};
  app.require_subcommand(1);

  AnalyzeOptions analyze;
  auto* a = app.add_subcommand("analyze", "parameter, FLOP and receptive-field report");
  add_model_flags(a, analyze.model);
  a->add_option("--out-dir", analyze.out_dir, "write analysis.txt and analysis.csv here");

  TrainOptions train;
  train.seed = seed;
  auto* t = app.add_subcommand("train", "train a model on a manifest corpus");
  add_model_flags(t, train.model);
  t->add_option("--manifest", train.manifest)->required();
  t->add_option("--out-dir", train.out_dir)->required();
  t->add_option("--stats", train.stats, "precomputed xi statistics (default: sampled from the training split)");
  t->add_option("--epochs", train.epochs)->capture_default_str();
  t->add_option("--seed", train.seed, "default: $RDL_SEED or 0")->capture_default_str();
  t->add_option("--batch-size", train.batch_size)->capture_default_str();
  t->add_option("--batches-per-epoch", train.batches_per_epoch, "0 = one pass over the training recordings")
      ->capture_default_str();
  t->add_option("--learning-rate", train.learning_rate)->capture_default_str();
  t->add_option("--val-fraction", train.validation_fraction)->capture_default_str();
  t->add_flag("--resume", train.resume, "continue from out-dir/model.ckpt");
  t->add_flag("!--no-timing", train.timing, "write 0 in the wall_seconds column");

  EnhanceOptions enhance;
  auto* e = app.add_subcommand("enhance", "enhance a noisy 16 kHz WAV file");
  e->add_option("--checkpoint", enhance.checkpoint)->required();
  e->add_option("--stats", enhance.stats)->required();
  e->add_option("--input", enhance.input)->required();
  e->add_option("--output", enhance.output)->required();
  e->add_option("--gain", enhance.gain, "mmse-lsa | srwf")->capture_default_str();
  e->add_option("--dump-spectra", enhance.dump_spectra, "write noisy.csv and enhanced.csv magnitudes here");

  MixOptions mix;
  mix.seed = seed;
  auto* m = app.add_subcommand("mix", "add noise to clean speech at a given SNR");
  m->add_option("--clean", mix.clean)->required();
  m->add_option("--noise", mix.noise)->required();
  m->add_option("--snr", mix.snr_db, "dB")->required();
  m->add_option("--output", mix.output)->required();
  m->add_option("--noise-output", mix.noise_output, "also write the scaled noise");
  m->add_option("--seed", mix.seed, "picks the noise offset")->capture_default_str();

  StatsOptions stats;
  stats.seed = seed;
  auto* s = app.add_subcommand("stats", "estimate per-bin xi statistics from a corpus");
  s->add_option("--manifest", stats.manifest)->required();
  s->add_option("--output", stats.output)->required();
  s->add_option("--seed", stats.seed)->capture_default_str();
  s->add_option("--val-fraction", stats.validation_fraction)->capture_default_str();
  s->add_option("--min-frames", stats.min_frames)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*a) return run_analyze(analyze, std::cout);
    if (*t) return run_train(train, std::cout, std::cerr);
    if (*e) return run_enhance(enhance, std::cout);
    if (*m) return run_mix(mix, std::cout);
    if (*s) return run_stats(stats, std::cout, std::cerr);
  } catch (const rdl::ConfigError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const rdl::dsp::SampleRateMismatch& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
