#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "great/simgen.hpp"

namespace great {
namespace {

TEST(Rng, DeterministicAndStreamsDiffer) {
  Rng a(42), b(42), c(42, 1);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
  }
  Rng d(42);
  EXPECT_NE(d.next_u64(), c.next_u64());
  Rng s1 = Rng(7).split(3), s2 = Rng(7).split(3), s3 = Rng(7).split(4);
  const double v1 = s1.normal();
  EXPECT_EQ(v1, s2.normal());
  EXPECT_NE(v1, s3.normal());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(1);
  double sum = 0.0, sum_sq = 0.0, usum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    usum += u;
    const double z = rng.normal();
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(usum / n, 0.5, 5e-3);
  EXPECT_NEAR(sum / n, 0.0, 1e-2);
  EXPECT_NEAR(sum_sq / n, 1.0, 2e-2);
}

TEST(Splitmix64, KnownValue) {
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
}

TEST(RandomTangent, TangentUnitAndReproducible) {
  const Subspace u = orthonormalize(Rng(3).normal_matrix(6, 2));
  Rng a(5), b(5);
  const TangentVector x = random_tangent(u, a);
  const TangentVector y = random_tangent(u, b);
  EXPECT_LT((u.basis().transpose() * x.direction()).norm(), 1e-10);
  EXPECT_NEAR(x.norm(), 1.0, 1e-12);
  EXPECT_EQ(x.direction(), y.direction());
}

TEST(ScaleForDistance, HitsTargetAndRejectsUnreachable) {
  Rng rng(6);
  const Subspace u = orthonormalize(rng.normal_matrix(5, 3));
  const TangentVector v = random_tangent(u, rng);
  for (double target : {0.0, 1e-5, 0.1, 0.7}) {
    const double s = scale_for_distance(v, target);
    EXPECT_NEAR(chordal_distance(u, exp_map(v, s)), target, 1e-12);
  }
  try {
    scale_for_distance(v, 10.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
  }
}

TEST(GeodesicSequence, ZeroDriftIsConstant) {
  Rng rng(7);
  const Subspace u = Subspace::coordinate(5, 3);
  const auto seq = geodesic_sequence({u, rng.normal_matrix(5, 3), 0.0, 10});
  ASSERT_EQ(seq.size(), 11u);
  for (const auto& s : seq) EXPECT_LT(chordal_distance(s, u), 1e-15);
}

TEST(GeodesicSequence, SingleAngleStep) {
  const Subspace u = Subspace::coordinate(2, 1);
  Matrix dir(2, 1);
  dir << 0, 1;
  const double c = 0.3;
  const auto seq = geodesic_sequence({u, dir, c, 1});
  EXPECT_NEAR(chordal_distance(seq[0], seq[1]), c, 1e-12);
  EXPECT_NEAR(std::abs(seq[1].basis()(1, 0)), std::sin(std::asin(c)), 1e-12);
}

TEST(GeodesicSequence, ExampleSpacingExact) {
  SyntheticSpec spec;
  spec.drift = 5e-5;
  spec.noise = 1e-3;
  spec.seed = 13;
  const auto data = generate_synthetic(spec);
  ASSERT_EQ(data.truths.size(), 151u);
  double worst = 0.0;
  for (long t = 0; t < 150; ++t) {
    worst = std::max(worst, std::abs(chordal_distance(data.truth(t), data.truth(t + 1)) - 5e-5));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(NoisySample, NoiseNormExactAndOffSubspacePart) {
  Rng rng(8);
  const Subspace u = orthonormalize(rng.normal_matrix(5, 3));
  for (int rep = 0; rep < 100; ++rep) {
    const Vector xi = rng.normal_vector(3);
    Rng noise_a(rep), noise_b(rep);
    const Vector clean = noisy_sample(u, xi, 0.0, noise_a);
    EXPECT_LT(complement_project(u, clean).norm(), 1e-12);
    const Vector noisy = noisy_sample(u, xi, 1e-3, noise_b);
    EXPECT_NEAR((noisy - u.basis() * xi).norm(), 1e-3, 1e-12);
    EXPECT_LE(complement_project(u, noisy).norm(), 1e-3 + 1e-15);
  }
}

TEST(PerturbedInitialEstimate, DistanceAndDeterminism) {
  const Subspace truth = Subspace::coordinate(5, 3);
  Rng zero(1);
  EXPECT_LT(chordal_distance(perturbed_initial_estimate(truth, 0.0, zero), truth), 1e-15);
  Rng a(9), b(9);
  const Subspace x = perturbed_initial_estimate(truth, 0.1, a);
  const Subspace y = perturbed_initial_estimate(truth, 0.1, b);
  EXPECT_NEAR(chordal_distance(x, truth), 0.1, 1e-8);
  EXPECT_EQ(x.basis(), y.basis());
  Rng c(10);
  EXPECT_NEAR(chordal_distance(perturbed_initial_estimate(truth, 1.2, c), truth), 1.2, 1e-8);
  Rng d(11);
  try {
    perturbed_initial_estimate(truth, std::sqrt(2.0), d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnreachable);
  }
}

TEST(GenerateSynthetic, ReproducibleAndSatisfiesNoiseAssumption) {
  SyntheticSpec spec;
  spec.drift = 5e-5;
  spec.noise = 1e-3;
  spec.seed = 21;
  const auto a = generate_synthetic(spec);
  const auto b = generate_synthetic(spec);
  ASSERT_EQ(a.samples.size(), 150u);
  for (long t = 1; t <= 150; ++t) {
    EXPECT_EQ(a.sample(t), b.sample(t));
    EXPECT_LE(complement_project(a.truth(t), a.sample(t)).norm(), 1e-3 + 1e-15);
  }
  EXPECT_LT(chordal_distance(a.truth(0), Subspace::coordinate(5, 3)), 1e-15);
  const Matrix w = a.window(100, 100);
  EXPECT_EQ(w.cols(), 100);
  EXPECT_EQ(Vector(w.col(99)), a.sample(100));
  EXPECT_EQ(Vector(w.col(0)), a.sample(1));
  spec.seed = 22;
  EXPECT_NE(generate_synthetic(spec).sample(1), a.sample(1));
}

TEST(GenerateSynthetic, CyclicCoefficients) {
  SyntheticSpec spec;
  spec.ambient_dim = 6;
  spec.dim = 3;
  spec.horizon = 9;
  spec.coefficients = CoefficientMode::kCyclic;
  const auto data = generate_synthetic(spec);
  for (long t = 1; t <= 9; ++t) {
    const Vector xi = data.truth(t).basis().transpose() * data.sample(t);
    EXPECT_NEAR(xi.norm(), std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(std::abs(xi(t % 3)), std::sqrt(3.0), 1e-12);
  }
}

TEST(CoefficientMode, RoundTrip) {
  EXPECT_EQ(coefficient_mode_from_string(to_string(CoefficientMode::kGaussian)), CoefficientMode::kGaussian);
  EXPECT_EQ(coefficient_mode_from_string(to_string(CoefficientMode::kCyclic)), CoefficientMode::kCyclic);
  EXPECT_THROW(coefficient_mode_from_string("uniform"), Error);
}

}  // namespace
}  // namespace great
