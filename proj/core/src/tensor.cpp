#include "rdl/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rdl/errors.hpp"

namespace rdl {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, Real fill) : shape_(std::move(shape)) {
  for (auto d : shape_) {
    if (d == 0) throw ConfigError("tensor dimensions must be positive, got " + shape_string(shape_));
  }
  data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_) {
    if (d == 0) throw ConfigError("tensor dimensions must be positive, got " + shape_string(shape_));
  }
  if (shape_size(shape_) != data_.size()) {
    throw ConfigError("tensor shape " + shape_string(shape_) + " does not match " +
                      std::to_string(data_.size()) + " values");
  }
}

void Tensor::fill(Real value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real v) { return std::isfinite(v); });
}

Parameter& ParameterRegistry::add(std::string name, Shape shape) {
  if (find(name) != nullptr) throw ConfigError("duplicate parameter name: " + name);
  auto p = std::make_unique<Parameter>();
  p->name = std::move(name);
  p->value = Tensor(shape);
  p->grad = Tensor(std::move(shape));
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter* ParameterRegistry::find(std::string_view name) {
  for (auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

const Parameter* ParameterRegistry::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p->name == name) return p.get();
  }
  return nullptr;
}

void ParameterRegistry::zero_grad() {
  for (auto& p : params_) p->grad.fill(Real(0));
}

std::size_t ParameterRegistry::total_size() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

}  // namespace rdl
