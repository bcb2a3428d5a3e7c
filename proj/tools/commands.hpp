#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rdl/network.hpp"

namespace rdl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

struct ModelOptions {
  std::string family = "rdl";
  int blocks = 3;
  int n = 16;
  int m1 = 64;
  bool local_residual = true;
  bool global_dense = true;

  NetworkConfig to_config(std::uint64_t seed) const;
};

struct AnalyzeOptions {
  ModelOptions model;
  std::string out_dir;  // empty: stdout only
};

struct TrainOptions {
  ModelOptions model;
  std::string manifest;
  std::string out_dir;
  std::string stats;  // empty: computed from the training split
  int epochs = 100;
  std::uint64_t seed = 0;
  std::size_t batch_size = 10;
  std::size_t batches_per_epoch = 0;
  double learning_rate = 1e-3;
  double validation_fraction = 0.05;
  bool resume = false;
  bool timing = true;
};

struct EnhanceOptions {
  std::string checkpoint;
  std::string stats;
  std::string input;
  std::string output;
  std::string gain = "mmse-lsa";
  std::string dump_spectra;  // directory; empty disables
};

struct MixOptions {
  std::string clean;
  std::string noise;
  double snr_db = 0.0;
  std::string output;
  std::string noise_output;
  std::uint64_t seed = 0;
};

struct StatsOptions {
  std::string manifest;
  std::string output;
  std::uint64_t seed = 0;
  double validation_fraction = 0.05;
  std::size_t min_frames = 1000;
};

// Each command prints its resolved configuration first and returns an exit
// code; ConfigError and DataError propagate to the caller.
int run_analyze(const AnalyzeOptions& opt, std::ostream& out);
int run_train(const TrainOptions& opt, std::ostream& out, std::ostream& err);
int run_enhance(const EnhanceOptions& opt, std::ostream& out);
int run_mix(const MixOptions& opt, std::ostream& out);
int run_stats(const StatsOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace rdl::cli
