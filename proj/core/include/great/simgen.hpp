#pragma once

// Seeded generators for synthetic tracking experiments: random tangents,
// fixed-spacing geodesic subspace sequences, bounded-noise samples and
// perturbed initial estimates.
//
// Random numbers come from std::mt19937_64 seeded through splitmix64, with
// uniforms taken from the top 53 bits and normals from Box-Muller, so a
// (seed, stream) pair yields the same values on every platform.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "great/grassmann.hpp"

namespace great {

class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for sub-stream `stream` of this generator's seed.
  Rng split(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x100000001b3ULL + stream + 1); }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Gaussian n x d draw projected onto the tangent space at `base`, normalized
/// to unit Frobenius norm.
TangentVector random_tangent(const Subspace& base, Rng& rng);

/// Step scale s >= 0 with d2(base, Exp_base(s V)) = distance, found by
/// bisection on [0, pi / (2 |V|_2)]. Throws kUnreachable if the distance
/// exceeds what that interval attains.
double scale_for_distance(const TangentVector& v, double distance);

struct GeodesicSpec {
  Subspace start;
  /// Ambient direction; re-projected onto each new tangent space and
  /// re-normalized before every step.
  Matrix direction;
  double step_distance = 0.0;  // c
  long steps = 0;              // N
};

/// U_0 = start, U_{t+1} = Exp_{U_t}(s_t P_t V / |P_t V|) with s_t chosen so that
/// d2(U_t, U_{t+1}) = c. Returns N + 1 subspaces.
std::vector<Subspace> geodesic_sequence(const GeodesicSpec& spec);

enum class CoefficientMode {
  /// xi_t ~ N(0, I_d).
  kGaussian,
  /// xi_t = sqrt(d) e_{t mod d}: deterministic, perfectly balanced excitation.
  kCyclic,
};

/// U xi + e with e uniform on the sphere of radius `noise_norm`.
Vector noisy_sample(const Subspace& u, const Vector& xi, double noise_norm, Rng& rng);

/// Û with d2(Û, truth) = r, reached along a random unit tangent. Throws
/// kUnreachable if r >= sqrt(min(d, n - d)) or r cannot be attained.
Subspace perturbed_initial_estimate(const Subspace& truth, double r, Rng& rng);

struct SyntheticSpec {
  Index ambient_dim = 5;
  Index dim = 3;
  long horizon = 150;
  double drift = 0.0;   // c
  double noise = 0.0;   // eps
  CoefficientMode coefficients = CoefficientMode::kGaussian;
  std::uint64_t seed = 0;
};

struct SyntheticDataset {
  SyntheticSpec spec;
  /// truths[t] = U_t for t = 0..horizon.
  std::vector<Subspace> truths;
  /// samples[t - 1] = u_t for t = 1..horizon.
  std::vector<Vector> samples;

  const Vector& sample(long t) const { return samples.at(static_cast<std::size_t>(t - 1)); }
  const Subspace& truth(long t) const { return truths.at(static_cast<std::size_t>(t)); }
  /// n x T matrix [u_{t-T+1} ... u_t].
  Matrix window(long t, Index length) const;
};

/// Uses streams 1 (drift direction), 2 (coefficients) and 3 (noise) of `seed`.
/// U_0 spans the first d coordinate vectors.
SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

/// Name used in dataset manifests for the tangent transport rule.
inline constexpr const char* kTransportRule = "reprojection";

std::string to_string(CoefficientMode mode);
CoefficientMode coefficient_mode_from_string(const std::string& name);

}  // namespace great
