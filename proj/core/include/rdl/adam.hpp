#pragma once

#include <cstdint>
#include <vector>

#include "rdl/tensor.hpp"

namespace rdl {

struct AdamConfig {
  Real learning_rate = Real(1e-3);
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real epsilon = Real(1e-8);
};

// Adam with bias-corrected moments. Moment tensors are kept in registry
// order so they can be checkpointed alongside the parameters.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(const ParameterRegistry& params, AdamConfig config);

  void step(ParameterRegistry& params);

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(Real lr) { config_.learning_rate = lr; }
  std::uint64_t step_count() const { return step_count_; }

  // Raw state, exposed for checkpointing.
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }
  void set_step_count(std::uint64_t n) { step_count_ = n; }

 private:
  AdamConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

// Scales every gradient so the global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
Real clip_grad_norm(ParameterRegistry& params, Real max_norm);

}  // namespace rdl
