#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rdl/tensor.hpp"

namespace rdl {

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Tensor& grad() const;
  const Shape& shape() const { return value().shape(); }
  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode tape. Nodes are appended in evaluation order, so the node
// vector is already a topological order of the forward graph. A tape is
// single-use: record, call backward() once, discard.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Var& self)>;

  Var constant(Tensor value);
  Var parameter(Parameter& param);

  // Records an op result. `inputs` decides whether the node needs a
  // gradient; `backward` runs once this node's gradient is complete and
  // receives the node itself as `self`. Throws NumericError on NaN/Inf.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op);

  const Tensor& value(const Var& v) const { return nodes_.at(v.id_).value; }
  const Tensor& grad(const Var& v) const;
  bool requires_grad(const Var& v) const { return nodes_.at(v.id_).requires_grad; }

  // Gradient buffer of an input, allocated on first use. Only valid during
  // backward().
  Tensor& grad_buffer(const Var& v);

  // Seeds d(loss)/d(loss) = 1, runs every recorded backward function in
  // reverse order and adds parameter-node gradients into Parameter::grad.
  void backward(const Var& loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

namespace ops {

// out[t,co] = bias[co] + sum_i sum_ci x[t - i*dilation, ci] * kernel[k-1-i, ci, co]
// with zero contribution from t - i*dilation < 0. Kernel shape {k, Cin, Cout};
// bias may be an invalid Var for a bias-free convolution.
Var causal_conv1d(const Var& x, const Var& kernel, const Var& bias, int dilation);

// Per-frame normalization over the channel axis.
Var layer_norm(const Var& x, const Var& gain, const Var& shift, Real eps);

Var relu(const Var& x);
Var sigmoid(const Var& x);
Var add(const Var& a, const Var& b);
Var concat_channels(std::span<const Var> parts);

// Per-frame affine map, weights {Cin, Cout}, bias {Cout}.
Var dense(const Var& x, const Var& weights, const Var& bias);

Var sum(const Var& x);

// Binary cross-entropy summed over channels and averaged over frames.
// `output` is clamped to [eps, 1 - eps] before the logarithms.
Var binary_cross_entropy(const Var& output, const Tensor& target, Real eps = Real(1e-7));

}  // namespace ops
}  // namespace rdl
