#include "rdl/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace rdl {

AdamOptimizer::AdamOptimizer(const ParameterRegistry& params, AdamConfig config) : config_(config) {
  m_.reserve(params.count());
  v_.reserve(params.count());
  for (const auto& p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamOptimizer::step(ParameterRegistry& params) {
  if (params.count() != m_.size()) throw std::logic_error("optimizer state does not match parameter registry");
  ++step_count_;
  const double t = double(step_count_);
  const Real bias1 = Real(1 - std::pow(double(config_.beta1), t));
  const Real bias2 = Real(1 - std::pow(double(config_.beta2), t));
  for (std::size_t i = 0; i < params.count(); ++i) {
    Parameter& p = params[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      const Real g = p.grad[j];
      m[j] = config_.beta1 * m[j] + (Real(1) - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (Real(1) - config_.beta2) * g * g;
      const Real m_hat = m[j] / bias1;
      const Real v_hat = v[j] / bias2;
      p.value[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

Real clip_grad_norm(ParameterRegistry& params, Real max_norm) {
  double sq = 0;
  for (const auto& p : params) {
    for (Real g : p->grad.values()) sq += double(g) * double(g);
  }
  const Real norm = Real(std::sqrt(sq));
  if (norm > max_norm && norm > 0) {
    const Real scale = max_norm / norm;
    for (auto& p : params) {
      for (auto& g : p->grad.values()) g *= scale;
    }
  }
  return norm;
}

}  // namespace rdl
