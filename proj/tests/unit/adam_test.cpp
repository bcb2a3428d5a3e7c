#include <gtest/gtest.h>

#include <cmath>

#include "rdl/adam.hpp"
#include "rdl/random.hpp"

using namespace rdl;

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterRegistry reg;
  Parameter& p = reg.add("w", {1});
  p.value[0] = Real(0.25);
  AdamOptimizer opt(reg, {});
  p.grad[0] = 1;
  opt.step(reg);
  // Exact up to the epsilon in the denominator.
  EXPECT_NEAR(double(p.value[0]), 0.25 - 0.001, 1e-10);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(Adam, MatchesHandRecurrence) {
  ParameterRegistry reg;
  Parameter& p = reg.add("w", {2});
  AdamOptimizer opt(reg, {});
  const double grads[][2] = {{1.0, -0.5}, {0.3, 0.2}, {-2.0, 0.0}};
  double m[2] = {0, 0}, v[2] = {0, 0}, x[2] = {0, 0};
  for (int t = 1; t <= 3; ++t) {
    for (int i = 0; i < 2; ++i) {
      p.grad[i] = Real(grads[t - 1][i]);
      m[i] = 0.9 * m[i] + 0.1 * grads[t - 1][i];
      v[i] = 0.999 * v[i] + 0.001 * grads[t - 1][i] * grads[t - 1][i];
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      x[i] -= 0.001 * mh / (std::sqrt(vh) + 1e-8);
    }
    opt.step(reg);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(double(p.value[i]), x[i], 1e-15);
  }
}

TEST(Adam, ZeroGradientLeavesValue) {
  ParameterRegistry reg;
  Parameter& p = reg.add("w", {3});
  p.value.fill(Real(0.7));
  AdamOptimizer opt(reg, {});
  for (int i = 0; i < 5; ++i) opt.step(reg);
  for (auto v : p.value.values()) EXPECT_EQ(v, Real(0.7));
}

TEST(ClipGradNorm, ScalesToMaximum) {
  ParameterRegistry reg;
  Parameter& a = reg.add("a", {2});
  Parameter& b = reg.add("b", {1});
  a.grad[0] = 3;
  a.grad[1] = 0;
  b.grad[0] = 4;
  EXPECT_NEAR(double(clip_grad_norm(reg, 1)), 5.0, 1e-12);
  EXPECT_NEAR(double(a.grad[0]), 0.6, 1e-12);
  EXPECT_NEAR(double(b.grad[0]), 0.8, 1e-12);
  clip_grad_norm(reg, 5);
  EXPECT_NEAR(double(b.grad[0]), 0.8, 1e-12);
}

TEST(Rng, ReproducibleAndStateRoundTrip) {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  const std::string state = a.save_state();
  const double x = a.uniform01();
  Rng c;
  c.load_state(state);
  EXPECT_EQ(c.uniform01(), x);
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  for (int i = 0; i < 1000; ++i) {
    const auto v = a.uniform_int(-10, 20);
    EXPECT_GE(v, -10);
    EXPECT_LE(v, 20);
  }
}
