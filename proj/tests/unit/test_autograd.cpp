#include <gtest/gtest.h>

#include <cmath>

#include "igkit/autograd.hpp"
#include "igkit/error.hpp"
#include "igkit/functional.hpp"
#include "igkit/optim.hpp"
#include "igkit/rng.hpp"
#include "verify.hpp"

namespace igkit {
namespace {

using ag::Var;

TEST(Backward, QuadraticGradientIsInput) {
  Rng rng(1);
  const Tensor x0 = rng.normal(Shape{3, 4});
  const Var x(x0, true);
  ag::backward(fn::scale(fn::sum(fn::mul(x, x)), 0.5));
  EXPECT_LE(max_abs_diff(x.grad(), x0), 1e-15);
}

TEST(Backward, ConvSumMatchesFiniteDifferences) {
  Rng rng(2);
  const auto r = verify::gradcheck(
      "conv sum", [](const std::vector<Var>& v) { return fn::sum(fn::conv2d(v[0], v[1])); },
      {rng.normal(Shape{1, 2, 5, 5}), rng.normal(Shape{3, 2, 3, 3})}, 3, 64, 1e-5, 1e-6);
  EXPECT_TRUE(r.passed) << r.metric;
}

TEST(Backward, SpectralL1MatchesFiniteDifferences) {
  Rng rng(3);
  const Tensor y = rng.normal(Shape{1, 1, 4, 4});
  const auto r = verify::gradcheck(
      "dft l1",
      [y](const std::vector<Var>& v) { return fn::sum(fn::abs(fn::sub(fn::dft2_stacked(v[0]), fn::dft2_stacked(Var(y))))); },
      {rng.normal(Shape{1, 1, 4, 4})}, 4, 16, 1e-6, 1e-5);
  EXPECT_TRUE(r.passed) << r.metric;
}

TEST(Backward, RepeatedPassesDoNotAccumulate) {
  const Var x(Tensor(Shape{2}, 3.0), true);
  const Var loss = fn::sum(fn::scale(x, 2.0));
  ag::backward(loss);
  ag::backward(loss);
  EXPECT_EQ(x.grad(), Tensor(Shape{2}, 2.0));
}

TEST(Backward, NonScalarLossThrows) {
  const Var x(Tensor(Shape{2}, 1.0), true);
  EXPECT_THROW(ag::backward(fn::scale(x, 2.0)), ContractError);
}

TEST(Backward, NoGradGuardRecordsNothing) {
  const Var x(Tensor(Shape{2}, 1.0), true);
  ag::NoGradGuard guard;
  EXPECT_FALSE(fn::mul(x, x).requires_grad());
}

TEST(Backward, SharedSubexpressionAccumulates) {
  const Var x(Tensor(Shape{1}, 2.0), true);
  const Var y = fn::mul(x, x);
  ag::backward(fn::sum(fn::add(y, y)));  // d/dx 2x^2 = 4x
  EXPECT_DOUBLE_EQ(x.grad()[0], 8.0);
}

TEST(ParameterSet, DuplicateNameThrows) {
  ag::ParameterSet ps;
  ps.add("w", Tensor(Shape{1}));
  EXPECT_THROW(ps.add("w", Tensor(Shape{1})), ContractError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ag::ParameterSet ps;
  ps.add("w", Tensor(Shape{1}, 0.0));
  optim::Adam adam(optim::AdamConfig{0.9, 0.999, 1e-8});
  adam.step(ps, {{"w", Tensor(Shape{1}, 1.0)}}, 0.1);
  EXPECT_NEAR(ps.get("w").value()[0], -0.1, 1e-9);
}

TEST(Adam, ZeroGradientLeavesParameter) {
  ag::ParameterSet ps;
  ps.add("w", Tensor(Shape{3}, 0.7));
  optim::Adam adam;
  adam.step(ps, {{"w", Tensor(Shape{3}, 0.0)}}, 0.1);
  EXPECT_EQ(ps.get("w").value(), Tensor(Shape{3}, 0.7));
}

TEST(Adam, IdenticalStateGivesIdenticalSteps) {
  Rng rng(5);
  const Tensor g = rng.normal(Shape{4});
  ag::ParameterSet a, b;
  a.add("w", Tensor(Shape{4}, 1.0));
  b.add("w", Tensor(Shape{4}, 1.0));
  optim::Adam oa, ob;
  for (int i = 0; i < 3; ++i) {
    oa.step(a, {{"w", g}}, 0.01);
    ob.step(b, {{"w", g}}, 0.01);
  }
  EXPECT_EQ(a.get("w").value(), b.get("w").value());
}

TEST(Adam, NonPositiveLearningRateThrows) {
  ag::ParameterSet ps;
  ps.add("w", Tensor(Shape{1}));
  optim::Adam adam;
  EXPECT_THROW(adam.step(ps, {}, 0.0), ConfigError);
}

TEST(Ema, BlendsTowardParameters) {
  ag::ParameterSet ps;
  Var w = ps.add("w", Tensor(Shape{1}, 1.0));
  optim::Ema ema(0.9);
  ema.update(ps);
  w.mutable_value()[0] = 2.0;
  ema.update(ps);
  EXPECT_DOUBLE_EQ(ema.shadow().at("w")[0], 0.9 * 1.0 + 0.1 * 2.0);
}

TEST(Ema, ConvergesGeometricallyOnFrozenParameters) {
  ag::ParameterSet ps;
  Var w = ps.add("w", Tensor(Shape{1}, 0.0));
  optim::Ema ema(0.9);
  ema.update(ps);
  w.mutable_value()[0] = 1.0;
  for (int n = 1; n <= 50; ++n) {
    ema.update(ps);
    EXPECT_NEAR(ema.shadow().at("w")[0], 1.0 - std::pow(0.9, n), 1e-12);
  }
}

TEST(CosineLr, Endpoints) {
  EXPECT_DOUBLE_EQ(optim::cosine_lr(1e-3, 0, 100), 1e-3);
  EXPECT_NEAR(optim::cosine_lr(1e-3, 100, 100), 1e-5, 1e-15);
}

}  // namespace
}  // namespace igkit
