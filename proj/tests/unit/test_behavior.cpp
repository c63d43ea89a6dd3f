#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "great/behavior.hpp"
#include "great/simgen.hpp"
#include "great/tracker.hpp"

namespace great {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

StateSpaceMatrices random_stable(Index k, Index m, Index p, Rng& rng) {
  StateSpaceMatrices s{rng.normal_matrix(k, k), rng.normal_matrix(k, m), rng.normal_matrix(p, k),
                       rng.normal_matrix(p, m)};
  const double radius = Eigen::EigenSolver<Matrix>(s.a).eigenvalues().cwiseAbs().maxCoeff();
  s.a *= 0.9 / radius;
  return s;
}

std::vector<Vector> random_inputs(Index m, long len, Rng& rng) {
  std::vector<Vector> v;
  for (long i = 0; i < len; ++i) v.push_back(rng.normal_vector(m));
  return v;
}

std::vector<Vector> slice(const std::vector<Vector>& xs, long from, long len) {
  return {xs.begin() + from, xs.begin() + from + len};
}

TEST(Hankel, ScalarExample) {
  const std::vector<Vector> s{vec({1}), vec({2}), vec({3}), vec({4})};
  Matrix expect(2, 3);
  expect << 1, 2, 3, 2, 3, 4;
  EXPECT_EQ(hankel(s, 2), expect);
}

TEST(Hankel, FullDepthIsStackedSignal) {
  const std::vector<Vector> s{vec({1, 2}), vec({3, 4}), vec({5, 6})};
  const Matrix h = hankel(s, 3);
  ASSERT_EQ(h.cols(), 1);
  EXPECT_EQ(Vector(h.col(0)), vec({1, 2, 3, 4, 5, 6}));
}

TEST(Hankel, TooShortThrows) {
  const std::vector<Vector> s{vec({1}), vec({2})};
  try {
    hankel(s, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooShort);
  }
  EXPECT_THROW(hankel(s, 0), Error);
}

TEST(LtvSimulate, ZeroInputZeroState) {
  Rng rng(1);
  const auto sys = LtvSystem::constant(random_stable(3, 1, 2, rng));
  const auto y = ltv_simulate(sys, Vector::Zero(3), std::vector<Vector>(5, Vector::Zero(1)));
  for (const auto& v : y) EXPECT_EQ(v.norm(), 0.0);
}

TEST(LtvSimulate, FeedthroughOnly) {
  std::vector<StateSpaceMatrices> steps;
  for (int t = 0; t < 4; ++t) {
    steps.push_back({Matrix::Zero(0, 0), Matrix::Zero(0, 2), Matrix::Zero(2, 0),
                     Matrix::Constant(2, 2, t + 1.0)});
  }
  const auto sys = LtvSystem::explicit_sequence(steps);
  Rng rng(2);
  const auto v = random_inputs(2, 4, rng);
  const auto y = ltv_simulate(sys, Vector::Zero(0), v);
  for (int t = 0; t < 4; ++t) {
    EXPECT_LT((y[static_cast<std::size_t>(t)] - steps[static_cast<std::size_t>(t)].d * v[static_cast<std::size_t>(t)]).norm(), 1e-15);
  }
}

TEST(LtvSimulate, ScalarHandRecursion) {
  StateSpaceMatrices s{Matrix::Constant(1, 1, 0.5), Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                       Matrix::Zero(1, 1)};
  Vector final_state;
  const auto y = ltv_simulate(LtvSystem::constant(s), Vector::Zero(1), {vec({1}), vec({0}), vec({0})},
                              0, &final_state);
  ASSERT_EQ(y.size(), 3u);
  EXPECT_DOUBLE_EQ(y[0](0), 0.0);
  EXPECT_DOUBLE_EQ(y[1](0), 1.0);
  EXPECT_DOUBLE_EQ(y[2](0), 0.5);
  EXPECT_DOUBLE_EQ(final_state(0), 0.25);
}

TEST(LtvSimulate, HorizonEnforced) {
  Rng rng(3);
  const auto sys = LtvSystem::constant(random_stable(2, 1, 1, rng), 5);
  EXPECT_THROW(ltv_simulate(sys, Vector::Zero(2), random_inputs(1, 6, rng)), Error);
  EXPECT_THROW(sys.at(5), Error);
  EXPECT_THROW(sys.at(-1), Error);
}

TEST(LtvSystem, InterpolationEndpointsAndMidpoint) {
  Rng rng(4);
  const auto a = random_stable(2, 1, 1, rng);
  const auto b = random_stable(2, 1, 1, rng);
  const auto sys = LtvSystem::interpolate(a, b, 11);
  EXPECT_LT((sys.at(0).a - a.a).norm(), 1e-15);
  EXPECT_LT((sys.at(10).b - b.b).norm(), 1e-15);
  EXPECT_LT((sys.at(5).c - 0.5 * (a.c + b.c)).norm(), 1e-15);
}

TEST(StackSample, ScalarLayout) {
  EXPECT_EQ(stack_sample({vec({2})}, {vec({3})}, 0), vec({2, 3}));
  EXPECT_EQ(stack_sample({vec({1}), vec({2})}, {vec({3, 4}), vec({5, 6})}, 1), vec({1, 2, 3, 4, 5, 6}));
  EXPECT_THROW(stack_sample({vec({1})}, {vec({3}), vec({4})}, 1), Error);
}

TEST(RestrictedBehavior, StaticMapIsGraphOfD) {
  StateSpaceMatrices s{Matrix::Zero(0, 0), Matrix::Zero(0, 1), Matrix::Zero(2, 0), Matrix::Zero(2, 1)};
  s.d << 2, -1;
  const auto beh = restricted_behavior(LtvSystem::constant(s), 0, 2);
  EXPECT_EQ(beh.dim(), 3);
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Vector> v, y;
    for (int i = 0; i < 3; ++i) {
      v.push_back(rng.normal_vector(1));
      y.push_back(s.d * v.back());
    }
    EXPECT_LT(complement_project(beh, stack_sample(v, y, 2)).norm(), 1e-12);
  }
}

TEST(RestrictedBehavior, TimeInvariantSystemGivesSameSubspace) {
  Rng rng(6);
  const auto sys = LtvSystem::constant(random_stable(3, 1, 2, rng));
  const auto beh0 = restricted_behavior(sys, 0, 4);
  EXPECT_EQ(beh0.dim(), 3 + 1 * 5);
  for (long t : {1L, 7L, 100L}) EXPECT_LT(chordal_distance(beh0, restricted_behavior(sys, t, 4)), 1e-10);
}

TEST(RestrictedBehavior, SimulatedWindowsLieInside) {
  Rng rng(7);
  const Index k = 3, m = 1, p = 3, L = 9;
  const auto sys = LtvSystem::interpolate(random_stable(k, m, p, rng), random_stable(k, m, p, rng), 200);
  const auto v = random_inputs(m, 200, rng);
  const auto y = ltv_simulate(sys, rng.normal_vector(k), v);
  for (long t = 0; t + L < 200; t += 7) {
    const Subspace beh = restricted_behavior(sys, t, L);
    EXPECT_EQ(beh.dim(), k + m * (L + 1));
    const Vector w = stack_sample(slice(v, t, L + 1), slice(y, t, L + 1), L);
    EXPECT_LT(complement_project(beh, w).norm(), 1e-8 * std::max(1.0, w.norm()));
  }
}

TEST(RestrictedBehavior, NoisyWindowsWithinEnvelope) {
  Rng rng(8);
  const Index k = 2, m = 1, p = 2, L = 4;
  const auto sys = LtvSystem::constant(random_stable(k, m, p, rng));
  const Subspace beh = restricted_behavior(sys, 0, L);
  const double eps = 1e-3;
  const auto v = random_inputs(m, 100, rng);
  const auto y = ltv_simulate(sys, rng.normal_vector(k), v);
  for (long t = 0; t + L < 100; ++t) {
    const Vector clean = stack_sample(slice(v, t, L + 1), slice(y, t, L + 1), L);
    Vector e = rng.normal_vector(clean.size());
    e *= eps / e.norm();
    EXPECT_LE(complement_project(beh, Vector(clean + e)).norm(), eps + 1e-12);
  }
}

TEST(RestrictedBehavior, UnobservableThrows) {
  StateSpaceMatrices s{Matrix::Identity(2, 2) * 0.5, Matrix::Ones(2, 1), Matrix::Zero(1, 2),
                       Matrix::Zero(1, 1)};
  s.c(0, 0) = 1.0;
  try {
    restricted_behavior(LtvSystem::constant(s), 0, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnobservable);
  }
}

TEST(Hankel, SpansBehaviorOfObservableSystem) {
  Rng rng(9);
  const Index k = 3, m = 1, p = 3, L = 9;
  const auto sys = LtvSystem::constant(random_stable(k, m, p, rng));
  const long len = 200;
  const auto v = random_inputs(m, len, rng);
  const auto y = ltv_simulate(sys, rng.normal_vector(k), v);
  Matrix h(( m + p) * (L + 1), len - L);
  h << hankel(v, L + 1), hankel(y, L + 1);
  const Vector s = Eigen::JacobiSVD<Matrix>(h).singularValues();
  const Index r = k + m * (L + 1);
  EXPECT_GT(s(r - 1), 1e-8 * s(0));
  EXPECT_LT(s(r), 1e-10 * s(0));
  EXPECT_LT(chordal_distance(initialize(h, r), restricted_behavior(sys, 0, L)), 1e-8);
}

TEST(Predictor, ExactOnTrueBehavior) {
  Rng rng(10);
  const Index k = 3, m = 1, p = 3, ti = 5, tf = 5;
  const auto sys = LtvSystem::constant(random_stable(k, m, p, rng));
  const auto pred = predictor_from_subspace(restricted_behavior(sys, 0, ti + tf - 1), m, p, ti, tf);
  EXPECT_EQ(pred.m.rows(), p * tf);
  EXPECT_EQ(pred.m.cols(), m * ti + p * ti + m * tf);
  std::vector<Vector> yhat, yref;
  for (int rep = 0; rep < 20; ++rep) {
    const auto v = random_inputs(m, ti + tf, rng);
    const auto y = ltv_simulate(sys, rng.normal_vector(k), v);
    Vector vi(m * ti), yi(p * ti), vf(m * tf), yf(p * tf);
    for (Index i = 0; i < ti; ++i) {
      vi.segment(i * m, m) = v[static_cast<std::size_t>(i)];
      yi.segment(i * p, p) = y[static_cast<std::size_t>(i)];
    }
    for (Index i = 0; i < tf; ++i) {
      vf.segment(i * m, m) = v[static_cast<std::size_t>(ti + i)];
      yf.segment(i * p, p) = y[static_cast<std::size_t>(ti + i)];
    }
    const Vector est = pred.predict(vi, yi, vf);
    EXPECT_LT((est - yf).norm(), 1e-8 * std::max(1.0, yf.norm()));
    yhat.push_back(est);
    yref.push_back(yf);
  }
  EXPECT_LT(relative_prediction_error(yhat, yref), 1e-7);
}

TEST(Predictor, MemorylessSystemIgnoresPast) {
  StateSpaceMatrices s{Matrix::Zero(0, 0), Matrix::Zero(0, 1), Matrix::Zero(2, 0), Matrix::Zero(2, 1)};
  s.d << 1.5, -0.5;
  const Index ti = 2, tf = 3;
  const auto pred = predictor_from_subspace(restricted_behavior(LtvSystem::constant(s), 0, ti + tf - 1),
                                            1, 2, ti, tf);
  const Matrix ini = pred.m.leftCols(ti + 2 * ti);
  EXPECT_LT(ini.norm(), 1e-10);
  Matrix expect = Matrix::Zero(2 * tf, tf);
  for (Index i = 0; i < tf; ++i) expect.block(2 * i, i, 2, 1) = s.d;
  EXPECT_LT((pred.m.rightCols(tf) - expect).norm(), 1e-10);
}

TEST(Predictor, DegenerateEstimateStillDefined) {
  const Subspace est = Subspace::coordinate(8, 2);
  const auto pred = predictor_from_subspace(est, 1, 1, 2, 2);
  EXPECT_TRUE(pred.m.allFinite());
  EXPECT_THROW(predictor_from_subspace(est, 1, 1, 2, 3), Error);
}

TEST(RelativePredictionError, HandValues) {
  const std::vector<Vector> y{vec({1, 2}), vec({3})};
  EXPECT_EQ(relative_prediction_error(y, y), 0.0);
  EXPECT_DOUBLE_EQ(relative_prediction_error({vec({0, 0}), vec({0})}, y), 1.0);
  EXPECT_DOUBLE_EQ(relative_prediction_error({vec({2, 4}), vec({6})}, y), 1.0);
  EXPECT_THROW(relative_prediction_error({vec({1})}, y), Error);
  try {
    relative_prediction_error({vec({1})}, {vec({0})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroReference);
  }
}

TEST(ParseLtv, ConstantInterpolatedAndErrors) {
  std::istringstream constant(
      "ltv 1\n# comment\ndims 1 1 1\nhorizon 10\nconstant\nstep A 0.5 B 1 C 1 D 0\n");
  const auto sys = parse_ltv(constant);
  EXPECT_EQ(sys.horizon(), 10);
  EXPECT_DOUBLE_EQ(sys.at(9).a(0, 0), 0.5);

  std::istringstream interp(
      "ltv 1\ndims 2 1 1\nhorizon 3\ninterpolate\n"
      "step A 1 2\n 3 4 B 1 1 C 1 0 D 0\n"
      "step A 3 4 5 6 B 1 1 C 1 0 D 0\n");
  const auto sys2 = parse_ltv(interp);
  EXPECT_DOUBLE_EQ(sys2.at(1).a(0, 1), 3.0);
  EXPECT_DOUBLE_EQ(sys2.at(1).a(1, 0), 4.0);

  std::istringstream bad("ltv 1\ndims 1 1 1\nhorizon 2\nstep A 1 B 1 C 1\n");
  try {
    parse_ltv(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
  }
  EXPECT_THROW(load_ltv("/nonexistent/plant.ltv"), Error);
}

}  // namespace
}  // namespace great
