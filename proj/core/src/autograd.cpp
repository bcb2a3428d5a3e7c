#include "rdl/autograd.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "rdl/errors.hpp"

namespace rdl {
namespace {

using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using RowVector = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

ConstMatrixMap as_matrix(const Tensor& t) {
  return ConstMatrixMap(t.data(), Eigen::Index(t.rows()), Eigen::Index(t.cols()));
}

MatrixMap as_matrix(Tensor& t) { return MatrixMap(t.data(), Eigen::Index(t.rows()), Eigen::Index(t.cols())); }

void require_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) {
    throw ConfigError(std::string(op) + ": expected a rank-2 {frames, channels} tensor, got " +
                      shape_string(t.shape()));
  }
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(*this); }
const Tensor& Var::grad() const { return tape_->grad(*this); }

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& param) {
  Node node;
  node.value = param.value;
  node.requires_grad = true;
  node.param = &param;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward, const char* op) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  Node node;
  node.value = std::move(value);
  for (const auto& in : inputs) {
    if (in.valid() && nodes_.at(in.id_).requires_grad) node.requires_grad = true;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::grad(const Var& v) const {
  const Node& node = nodes_.at(v.id_);
  if (!node.has_grad) throw std::logic_error("gradient requested for a node that received none");
  return node.grad;
}

Tensor& Tape::grad_buffer(const Var& v) {
  Node& node = nodes_.at(v.id_);
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape());
    node.has_grad = true;
  }
  return node.grad;
}

void Tape::backward(const Var& loss) {
  if (backward_done_) throw std::logic_error("backward() called twice on the same tape");
  if (loss.tape_ != this) throw std::logic_error("loss was recorded on a different tape");
  if (value(loss).size() != 1) {
    throw ConfigError("backward() needs a scalar loss, got shape " + shape_string(value(loss).shape()));
  }
  backward_done_ = true;
  grad_buffer(loss)[0] = Real(1);
  for (std::size_t i = loss.id_ + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    if (node.backward) node.backward(*this, Var(this, i));
    if (node.param != nullptr) {
      Tensor& dst = node.param->grad;
      const Tensor& src = nodes_[i].grad;
      for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
    }
  }
}

namespace ops {

Var causal_conv1d(const Var& x, const Var& kernel, const Var& bias, int dilation) {
  const Tensor& xv = x.value();
  const Tensor& kv = kernel.value();
  require_rank2(xv, "causal_conv1d");
  if (kv.rank() != 3) throw ConfigError("causal_conv1d: kernel must be {k, Cin, Cout}");
  if (dilation < 1) throw ConfigError("causal_conv1d: dilation must be >= 1");
  const std::size_t frames = xv.rows();
  const std::size_t cin = xv.cols();
  const std::size_t taps = kv.dim(0);
  const std::size_t cout = kv.dim(2);
  if (kv.dim(1) != cin) {
    throw ConfigError("causal_conv1d: kernel expects " + std::to_string(kv.dim(1)) + " input channels, input has " +
                      std::to_string(cin));
  }
  if (bias.valid() && bias.value().size() != cout) throw ConfigError("causal_conv1d: bias size mismatch");

  Tensor out({frames, cout});
  auto y = as_matrix(out);
  auto xm = as_matrix(xv);
  if (bias.valid()) {
    Eigen::Map<const RowVector> b(bias.value().data(), Eigen::Index(cout));
    y.rowwise() = b;
  }
  // Tap i looks i*dilation frames into the past and uses kernel slice k-1-i.
  for (std::size_t i = 0; i < taps; ++i) {
    const std::size_t shift = i * std::size_t(dilation);
    if (shift >= frames) break;
    const auto span = Eigen::Index(frames - shift);
    ConstMatrixMap w(kv.data() + (taps - 1 - i) * cin * cout, Eigen::Index(cin), Eigen::Index(cout));
    y.bottomRows(span).noalias() += xm.topRows(span) * w;
  }

  const Var inputs[] = {x, kernel, bias};
  return x.tape()->record(
      std::move(out), inputs,
      [x, kernel, bias, dilation, frames, cin, taps, cout](Tape& tape, const Var& self) {
        auto dy = as_matrix(tape.grad(self));
        const Tensor& kv = tape.value(kernel);
        if (tape.requires_grad(x)) {
          auto dx = as_matrix(tape.grad_buffer(x));
          for (std::size_t i = 0; i < taps; ++i) {
            const std::size_t shift = i * std::size_t(dilation);
            if (shift >= frames) break;
            const auto span = Eigen::Index(frames - shift);
            ConstMatrixMap w(kv.data() + (taps - 1 - i) * cin * cout, Eigen::Index(cin), Eigen::Index(cout));
            dx.topRows(span).noalias() += dy.bottomRows(span) * w.transpose();
          }
        }
        if (tape.requires_grad(kernel)) {
          Tensor& dk = tape.grad_buffer(kernel);
          auto xm = as_matrix(tape.value(x));
          for (std::size_t i = 0; i < taps; ++i) {
            const std::size_t shift = i * std::size_t(dilation);
            if (shift >= frames) break;
            const auto span = Eigen::Index(frames - shift);
            MatrixMap dw(dk.data() + (taps - 1 - i) * cin * cout, Eigen::Index(cin), Eigen::Index(cout));
            dw.noalias() += xm.topRows(span).transpose() * dy.bottomRows(span);
          }
        }
        if (bias.valid() && tape.requires_grad(bias)) {
          Eigen::Map<RowVector> db(tape.grad_buffer(bias).data(), Eigen::Index(cout));
          db += dy.colwise().sum();
        }
      },
      "causal_conv1d");
}

Var layer_norm(const Var& x, const Var& gain, const Var& shift, Real eps) {
  const Tensor& xv = x.value();
  require_rank2(xv, "layer_norm");
  const std::size_t frames = xv.rows();
  const std::size_t channels = xv.cols();
  if (gain.value().size() != channels || shift.value().size() != channels) {
    throw ConfigError("layer_norm: gain/shift size does not match channel count");
  }
  Tensor normalized({frames, channels});
  std::vector<Real> inv_std(frames);
  Tensor out({frames, channels});
  const Tensor& g = gain.value();
  const Tensor& s = shift.value();
  for (std::size_t t = 0; t < frames; ++t) {
    const Real* row = xv.data() + t * channels;
    Real mean = 0;
    for (std::size_t c = 0; c < channels; ++c) mean += row[c];
    mean /= Real(channels);
    Real var = 0;
    for (std::size_t c = 0; c < channels; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= Real(channels);
    const Real inv = Real(1) / std::sqrt(var + eps);
    inv_std[t] = inv;
    for (std::size_t c = 0; c < channels; ++c) {
      const Real n = (row[c] - mean) * inv;
      normalized.at(t, c) = n;
      out.at(t, c) = g[c] * n + s[c];
    }
  }

  const Var inputs[] = {x, gain, shift};
  return x.tape()->record(
      std::move(out), inputs,
      [x, gain, shift, normalized = std::move(normalized), inv_std = std::move(inv_std), frames,
       channels](Tape& tape, const Var& self) {
        const Tensor& dy = tape.grad(self);
        const Tensor& g = tape.value(gain);
        if (tape.requires_grad(gain)) {
          Tensor& dg = tape.grad_buffer(gain);
          for (std::size_t t = 0; t < frames; ++t)
            for (std::size_t c = 0; c < channels; ++c) dg[c] += dy.at(t, c) * normalized.at(t, c);
        }
        if (tape.requires_grad(shift)) {
          Tensor& ds = tape.grad_buffer(shift);
          for (std::size_t t = 0; t < frames; ++t)
            for (std::size_t c = 0; c < channels; ++c) ds[c] += dy.at(t, c);
        }
        if (tape.requires_grad(x)) {
          Tensor& dx = tape.grad_buffer(x);
          std::vector<Real> dn(channels);
          for (std::size_t t = 0; t < frames; ++t) {
            Real mean_dn = 0;
            Real mean_dn_n = 0;
            for (std::size_t c = 0; c < channels; ++c) {
              dn[c] = dy.at(t, c) * g[c];
              mean_dn += dn[c];
              mean_dn_n += dn[c] * normalized.at(t, c);
            }
            mean_dn /= Real(channels);
            mean_dn_n /= Real(channels);
            for (std::size_t c = 0; c < channels; ++c) {
              dx.at(t, c) += inv_std[t] * (dn[c] - mean_dn - normalized.at(t, c) * mean_dn_n);
            }
          }
        }
      },
      "layer_norm");
}

Var relu(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.values()) v = std::max(v, Real(0));
  const Var inputs[] = {x};
  return x.tape()->record(
      std::move(out), inputs,
      [x](Tape& tape, const Var& self) {
        const Tensor& dy = tape.grad(self);
        const Tensor& xv = tape.value(x);
        Tensor& dx = tape.grad_buffer(x);
        for (std::size_t i = 0; i < dx.size(); ++i) {
          if (xv[i] > 0) dx[i] += dy[i];
        }
      },
      "relu");
}

Var sigmoid(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.values()) v = Real(1) / (Real(1) + std::exp(-v));
  const Var inputs[] = {x};
  return x.tape()->record(
      std::move(out), inputs,
      [x](Tape& tape, const Var& self) {
        const Tensor& dy = tape.grad(self);
        const Tensor& y = tape.value(self);
        Tensor& dx = tape.grad_buffer(x);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += dy[i] * y[i] * (Real(1) - y[i]);
      },
      "sigmoid");
}

Var add(const Var& a, const Var& b) {
  if (a.shape() != b.shape()) {
    throw ConfigError("add: shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  const Var inputs[] = {a, b};
  return a.tape()->record(
      std::move(out), inputs,
      [a, b](Tape& tape, const Var& self) {
        const Tensor& dy = tape.grad(self);
        for (const Var& v : {a, b}) {
          if (!tape.requires_grad(v)) continue;
          Tensor& dv = tape.grad_buffer(v);
          for (std::size_t i = 0; i < dv.size(); ++i) dv[i] += dy[i];
        }
      },
      "add");
}

Var concat_channels(std::span<const Var> parts) {
  if (parts.empty()) throw ConfigError("concat_channels: no operands");
  if (parts.size() == 1) return parts[0];
  const std::size_t frames = parts[0].value().rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_rank2(p.value(), "concat_channels");
    if (p.value().rows() != frames) throw ConfigError("concat_channels: operands disagree on frame count");
    total += p.value().cols();
  }
  Tensor out({frames, total});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    const std::size_t c = v.cols();
    for (std::size_t t = 0; t < frames; ++t) {
      std::copy_n(v.data() + t * c, c, out.data() + t * total + offset);
    }
    offset += c;
  }
  std::vector<Var> operands(parts.begin(), parts.end());
  return parts[0].tape()->record(
      std::move(out), parts,
      [operands, frames, total](Tape& tape, const Var& self) {
        const Tensor& dy = tape.grad(self);
        std::size_t offset = 0;
        for (const auto& p : operands) {
          const std::size_t c = tape.value(p).cols();
          if (tape.requires_grad(p)) {
            Tensor& dp = tape.grad_buffer(p);
            for (std::size_t t = 0; t < frames; ++t) {
              const Real* src = dy.data() + t * total + offset;
              Real* dst = dp.data() + t * c;
              for (std::size_t j = 0; j < c; ++j) dst[j] += src[j];
            }
          }
          offset += c;
        }
      },
      "concat_channels");
}

Var dense(const Var& x, const Var& weights, const Var& bias) {
  const Tensor& xv = x.value();
  const Tensor& wv = weights.value();
  require_rank2(xv, "dense");
  if (wv.rank() != 2 || wv.rows() != xv.cols()) {
    throw ConfigError("dense: weights " + shape_string(wv.shape()) + " incompatible with input " +
                      shape_string(xv.shape()));
  }
  const std::size_t cout = wv.cols();
  if (bias.valid() && bias.value().size() != cout) throw ConfigError("dense: bias size mismatch");
  Tensor out({xv.rows(), cout});
  auto y = as_matrix(out);
  if (bias.valid()) y.rowwise() = Eigen::Map<const RowVector>(bias.value().data(), Eigen::Index(cout));
  y.noalias() += as_matrix(xv) * as_matrix(wv);

  const Var inputs[] = {x, weights, bias};
  return x.tape()->record(
      std::move(out), inputs,
      [x, weights, bias, cout](Tape& tape, const Var& self) {
        auto dy = as_matrix(tape.grad(self));
        if (tape.requires_grad(x)) {
          as_matrix(tape.grad_buffer(x)).noalias() += dy * as_matrix(tape.value(weights)).transpose();
        }
        if (tape.requires_grad(weights)) {
          as_matrix(tape.grad_buffer(weights)).noalias() += as_matrix(tape.value(x)).transpose() * dy;
        }
        if (bias.valid() && tape.requires_grad(bias)) {
          Eigen::Map<RowVector>(tape.grad_buffer(bias).data(), Eigen::Index(cout)) += dy.colwise().sum();
        }
      },
      "dense");
}

Var sum(const Var& x) {
  Real total = 0;
  for (Real v : x.value().values()) total += v;
  const Var inputs[] = {x};
  return x.tape()->record(
      Tensor::scalar(total), inputs,
      [x](Tape& tape, const Var& self) {
        const Real g = tape.grad(self)[0];
        Tensor& dx = tape.grad_buffer(x);
        for (auto& v : dx.values()) v += g;
      },
      "sum");
}

Var binary_cross_entropy(const Var& output, const Tensor& target, Real eps) {
  const Tensor& o = output.value();
  require_rank2(o, "binary_cross_entropy");
  if (o.shape() != target.shape()) {
    throw ConfigError("binary_cross_entropy: output " + shape_string(o.shape()) + " vs target " +
                      shape_string(target.shape()));
  }
  const Real frames = Real(o.rows());
  Real total = 0;
  for (std::size_t i = 0; i < o.size(); ++i) {
    const Real p = std::clamp(o[i], eps, Real(1) - eps);
    total -= target[i] * std::log(p) + (Real(1) - target[i]) * std::log(Real(1) - p);
  }
  const Var inputs[] = {output};
  return output.tape()->record(
      Tensor::scalar(total / frames), inputs,
      [output, target, eps, frames](Tape& tape, const Var& self) {
        const Real g = tape.grad(self)[0] / frames;
        const Tensor& o = tape.value(output);
        Tensor& d = tape.grad_buffer(output);
        for (std::size_t i = 0; i < o.size(); ++i) {
          if (o[i] < eps || o[i] > Real(1) - eps) continue;  // clamped: flat
          d[i] += g * ((o[i] - target[i]) / (o[i] * (Real(1) - o[i])));
        }
      },
      "binary_cross_entropy");
}

}  // namespace ops
}  // namespace rdl
