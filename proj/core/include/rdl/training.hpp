#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rdl/adam.hpp"
#include "rdl/checkpoint.hpp"
#include "rdl/data.hpp"
#include "rdl/network.hpp"

namespace rdl::train {

struct TrainConfig {
  AdamConfig adam;
  std::size_t batch_size = 10;
  Real clip_norm = Real(5.0);
  std::uint64_t seed = 0;
  // 0 means one pass over the training clean list: ceil(pool / batch_size).
  std::size_t batches_per_epoch = 0;
};

// Cross-entropy summed over bins, averaged over frames.
double loss_value(const Tensor& output, const Tensor& target);

struct TrainState {
  std::uint64_t epoch = 0;
  std::uint64_t batches = 0;  // global batch counter; drives the data stream
  double best_validation = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  std::string to_text() const;
  static TrainState from_text(const std::string& text);
};

class Trainer {
 public:
  Trainer(NetworkModel model, TrainConfig config);
  // Resumes from a checkpoint holding optimizer moments and train state.
  Trainer(Checkpoint checkpoint, TrainConfig config);

  // One Adam step on the batch; returns the mean loss before the update.
  double train_step(std::span<const data::TrainingExample> batch);

  // Runs one epoch of mini-batches drawn from `gen`; returns the mean
  // training loss. Non-finite losses abort with the batch provenance.
  double train_epoch(const data::MixtureGenerator& gen, const xi::XiStatistics& stats);

  double validate(std::span<const data::TrainingExample> validation) const;

  NetworkModel& model() { return model_; }
  const NetworkModel& model() const { return model_; }
  AdamOptimizer& optimizer() { return optimizer_; }
  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  const TrainConfig& config() const { return config_; }

  std::vector<std::uint8_t> checkpoint_bytes() const;
  void save(const std::string& path) const;

 private:
  NetworkModel model_;
  TrainConfig config_;
  AdamOptimizer optimizer_;
  TrainState state_;
};

}  // namespace rdl::train
