#include "rdl/training.hpp"

#include <cmath>
#include <sstream>

#include "rdl/errors.hpp"

namespace rdl::train {

double loss_value(const Tensor& output, const Tensor& target) {
  Tape tape;
  return double(ops::binary_cross_entropy(tape.constant(output), target).value()[0]);
}

std::string TrainState::to_text() const {
  char best[64];
  std::snprintf(best, sizeof best, "%.17g", best_validation);
  std::ostringstream os;
  os << "epoch=" << epoch << "\nbatches=" << batches << "\nbest_validation=" << best << "\nseed=" << seed << "\n";
  return os.str();
}

TrainState TrainState::from_text(const std::string& text) {
  TrainState s;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "epoch") s.epoch = std::stoull(value);
    else if (key == "batches") s.batches = std::stoull(value);
    else if (key == "best_validation") s.best_validation = std::stod(value);
    else if (key == "seed") s.seed = std::stoull(value);
  }
  return s;
}

Trainer::Trainer(NetworkModel model, TrainConfig config)
    : model_(std::move(model)), config_(config), optimizer_(model_.parameters(), config.adam) {
  state_.seed = config.seed;
}

Trainer::Trainer(Checkpoint checkpoint, TrainConfig config)
    : model_(std::move(checkpoint.model)), config_(config), optimizer_(model_.parameters(), config.adam) {
  if (checkpoint.optimizer) {
    optimizer_ = std::move(*checkpoint.optimizer);
    optimizer_.set_learning_rate(config.adam.learning_rate);
  }
  state_ = checkpoint.train_state.empty() ? TrainState{} : TrainState::from_text(checkpoint.train_state);
  if (checkpoint.train_state.empty()) state_.seed = config.seed;
}

double Trainer::train_step(std::span<const data::TrainingExample> batch) {
  if (batch.empty()) throw ConfigError("train_step: empty batch");
  auto& params = model_.parameters();
  params.zero_grad();
  double total = 0.0;
  for (const auto& ex : batch) {
    Tape tape;
    const Var out = model_.forward(tape, tape.constant(ex.noisy));
    const Var loss = ops::binary_cross_entropy(out, ex.target);
    total += double(loss.value()[0]);
    tape.backward(loss);
  }
  const Real scale = Real(1) / Real(batch.size());
  for (auto& p : params) {
    for (auto& g : p->grad.values()) g *= scale;
  }
  clip_grad_norm(params, config_.clip_norm);
  optimizer_.step(params);
  return total / double(batch.size());
}

double Trainer::train_epoch(const data::MixtureGenerator& gen, const xi::XiStatistics& stats) {
  const std::size_t batches = config_.batches_per_epoch != 0
                                  ? config_.batches_per_epoch
                                  : (gen.pool().size() + config_.batch_size - 1) / config_.batch_size;
  double total = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto batch = data::make_minibatch(gen, stats, config_.batch_size, state_.batches);
    double loss = 0.0;
    try {
      loss = train_step(batch);
    } catch (const NumericError& e) {
      std::string where;
      for (const auto& ex : batch) where += "\n  " + ex.provenance(gen.corpus());
      throw NumericError(std::string(e.what()) + " in batch " + std::to_string(state_.batches) + ":" + where);
    }
    if (!std::isfinite(loss)) {
      std::string where;
      for (const auto& ex : batch) where += "\n  " + ex.provenance(gen.corpus());
      throw NumericError("non-finite loss in batch " + std::to_string(state_.batches) + ":" + where);
    }
    total += loss;
    ++state_.batches;
  }
  ++state_.epoch;
  return total / double(batches);
}

double Trainer::validate(std::span<const data::TrainingExample> validation) const {
  if (validation.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : validation) total += loss_value(model_.predict(ex.noisy), ex.target);
  return total / double(validation.size());
}

std::vector<std::uint8_t> Trainer::checkpoint_bytes() const {
  return serialize_checkpoint(model_, &optimizer_, state_.to_text());
}

void Trainer::save(const std::string& path) const { save_checkpoint(path, model_, &optimizer_, state_.to_text()); }

}  // namespace rdl::train
