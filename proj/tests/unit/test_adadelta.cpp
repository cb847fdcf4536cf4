#include <gtest/gtest.h>

#include <cmath>

#include "anatprior/autodiff/adadelta.hpp"
#include "anatprior/errors.hpp"

namespace anatprior {
namespace {

using ad::AdadeltaConfig;
using ad::AdadeltaState;
using ad::Parameter;

TEST(Adadelta, ZeroGradientLeavesParametersAndDecaysAccumulators) {
  Parameter p(Grid({3}, std::vector<double>{1.0, -2.0, 0.5}));
  const Grid before = p.value;
  std::vector<Parameter*> params{&p};
  AdadeltaState opt({}, params);
  p.grad.fill(2.0);
  opt.step(params);
  const Grid eg1 = opt.squared_gradients()[0];
  const Grid ex1 = opt.squared_updates()[0];
  const Grid after_first = p.value;
  EXPECT_NE(after_first, before);

  opt.step(params);  // gradient was zeroed by the previous step
  EXPECT_EQ(p.value, after_first);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(opt.squared_gradients()[0][i], 0.95 * eg1[i]);
    EXPECT_DOUBLE_EQ(opt.squared_updates()[0][i], 0.95 * ex1[i]);
  }
}

TEST(Adadelta, FirstStepMagnitude) {
  const double rho = 0.95, eps = 1e-6;
  for (double g : {1e-4, 0.3, -2.0, 50.0}) {
    Parameter p(Grid({1}, 0.0));
    std::vector<Parameter*> params{&p};
    AdadeltaState opt({rho, eps, 1.0}, params);
    p.grad[0] = g;
    opt.step(params);
    const double expected = std::sqrt(eps) / std::sqrt(eps + (1 - rho) * g * g) * std::abs(g);
    EXPECT_NEAR(std::abs(p.value[0]), expected, 1e-15 + 1e-12 * expected);
    EXPECT_EQ(std::signbit(p.value[0]), g > 0.0);
  }
}

TEST(Adadelta, QuadraticDecreasesMonotonically) {
  Parameter p(Grid({1}, 1.0));
  std::vector<Parameter*> params{&p};
  AdadeltaState opt({}, params);
  double prev = 1.0;
  for (int i = 0; i < 100; ++i) {
    p.grad[0] = 2.0 * p.value[0];
    opt.step(params);
    const double f = p.value[0] * p.value[0];
    EXPECT_LE(f, prev) << "step " << i;
    prev = f;
  }
  EXPECT_LT(prev, 1.0);
}

TEST(Adadelta, ZeroLearningRateFreezesParameters) {
  Parameter p(Grid({2}, std::vector<double>{0.3, -0.7}));
  const Grid before = p.value;
  std::vector<Parameter*> params{&p};
  AdadeltaState opt({0.95, 1e-6, 0.0}, params);
  for (int i = 0; i < 10; ++i) {
    p.grad.fill(1.0 + i);
    opt.step(params);
  }
  EXPECT_EQ(p.value, before);
  EXPECT_GT(opt.squared_gradients()[0][0], 0.0);
}

TEST(Adadelta, FrozenParameterSkipped) {
  Parameter p(Grid({1}, 1.0), false);
  std::vector<Parameter*> params{&p};
  AdadeltaState opt({}, params);
  p.grad[0] = 5.0;
  opt.step(params);
  EXPECT_EQ(p.value[0], 1.0);
  EXPECT_EQ(p.grad[0], 0.0);
}

TEST(Adadelta, InvalidConfigRejected) {
  std::vector<Parameter*> none;
  EXPECT_THROW(AdadeltaState({1.0, 1e-6, 1.0}, none), ConfigError);
  EXPECT_THROW(AdadeltaState({0.0, 1e-6, 1.0}, none), ConfigError);
  EXPECT_THROW(AdadeltaState({0.9, 0.0, 1.0}, none), ConfigError);
  EXPECT_THROW(AdadeltaState({0.9, 1e-6, -1.0}, none), ConfigError);
}

TEST(Adadelta, ParameterListChangeRejected) {
  Parameter a(Grid({1})), b(Grid({1}));
  std::vector<Parameter*> params{&a};
  AdadeltaState opt({}, params);
  params.push_back(&b);
  EXPECT_THROW(opt.step(params), ContractError);
}

}  // namespace
}  // namespace anatprior
