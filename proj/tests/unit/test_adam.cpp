#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "groundbridge/adam.hpp"
#include "groundbridge/error.hpp"

using namespace groundbridge;

TEST(Adam, ZeroGradsLeaveParamsButAdvanceStep) {
  AdamState st(3, AdamConfig{});
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  adam_step(st, p, g);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(st.step, 1u);
}

// With bias correction the first update is lr * g / (|g| + eps') ~ lr * sign(g).
TEST(Adam, FirstStepMovesByLearningRate) {
  AdamConfig cfg;
  cfg.lr = 1e-3;
  AdamState st(3, cfg);
  std::vector<double> p{0.0, 0.0, 0.0};
  const std::vector<double> g{0.5, -3.0, 1e-2};
  adam_step(st, p, g);
  EXPECT_NEAR(p[0], -1e-3, 1e-10);
  EXPECT_NEAR(p[1], 1e-3, 1e-10);
  EXPECT_NEAR(p[2], -1e-3, 1e-8);
}

TEST(Adam, ConvergesOnScalarQuadratic) {
  AdamConfig cfg;
  cfg.lr = 1e-2;
  AdamState st(1, cfg);
  std::vector<double> x{0.0};
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> g{2.0 * (x[0] - 3.0)};
    adam_step(st, x, g);
  }
  EXPECT_LT(std::abs(x[0] - 3.0), 1e-3);
}

TEST(Adam, MomentsMatchHandRecursion) {
  AdamConfig cfg;
  AdamState st(1, cfg);
  std::vector<double> p{1.0};
  double m = 0, v = 0, ref = 1.0;
  for (int t = 1; t <= 5; ++t) {
    const double g = 0.3 * t - 1.0;
    adam_step(st, p, std::vector<double>{g});
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    ref -= cfg.lr * mh / (std::sqrt(vh) + cfg.eps);
    EXPECT_NEAR(p[0], ref, 1e-15);
  }
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  AdamState st(2, AdamConfig{});
  std::vector<double> p{1.0, 2.0};
  adam_step(st, p, std::vector<double>{0.1, 0.1});
  const auto before = st;
  const auto params_before = p;
  try {
    adam_step(st, p, std::vector<double>{0.1, std::numeric_limits<double>::infinity()});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
  EXPECT_EQ(st.step, before.step);
  EXPECT_EQ(st.m, before.m);
  EXPECT_EQ(st.v, before.v);
  EXPECT_EQ(p, params_before);
}

TEST(Adam, ShapeMismatchIsShapeError) {
  AdamState st(2, AdamConfig{});
  std::vector<double> p{1.0, 2.0, 3.0};
  try {
    adam_step(st, p, std::vector<double>{0.0, 0.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}
