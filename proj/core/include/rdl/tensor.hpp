#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rdl {

#if defined(RDL_FLOAT32)
using Real = float;
#else
using Real = double;
#endif

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major N-dimensional array. Time-major activations are rank 2
// with shape {frames, channels}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, Real fill = Real(0));
  Tensor(Shape shape, std::vector<Real> data);

  static Tensor scalar(Real value) { return Tensor({1}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }

  // Rank-2 helpers.
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }
  Real& at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  Real at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  Real& operator[](std::size_t i) { return data_[i]; }
  Real operator[](std::size_t i) const { return data_[i]; }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }
  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }

  void fill(Real value);
  bool all_finite() const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

// Owns every trainable tensor of a model. Insertion order is the canonical
// order used by checkpoints and the optimizer.
class ParameterRegistry {
 public:
  Parameter& add(std::string name, Shape shape);

  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  std::size_t count() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return *params_[i]; }
  const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.cbegin(); }
  auto end() const { return params_.cend(); }

  void zero_grad();
  std::size_t total_size() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

}  // namespace rdl
