#include "great/simgen.hpp"

#include <cmath>
#include <numbers>

namespace great {
namespace {

double geodesic_distance(const Vector& sigmas, double s) {
  double acc = 0.0;
  for (Index i = 0; i < sigmas.size(); ++i) {
    const double x = std::sin(s * sigmas(i));
    acc += x * x;
  }
  return std::sqrt(acc);
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream))) {}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector Rng::normal_vector(Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = normal();
  return v;
}

Matrix Rng::normal_matrix(Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal();
  return m;
}

TangentVector random_tangent(const Subspace& base, Rng& rng) {
  for (;;) {
    const TangentVector t =
        tangent_project(base, rng.normal_matrix(base.ambient_dim(), base.dim()));
    const double norm = t.norm();
    if (norm > 1e-12) return t.scaled(1.0 / norm);
    if (base.ambient_dim() == base.dim()) return t;
  }
}

double scale_for_distance(const TangentVector& v, double distance) {
  if (!(distance >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "distance must be >= 0");
  if (distance == 0.0) return 0.0;
  const Vector sigmas = Eigen::JacobiSVD<Matrix>(v.direction()).singularValues();
  if (sigmas.size() == 0 || !(sigmas(0) > 0.0)) {
    throw Error(ErrorCode::kUnreachable, "zero tangent cannot move the subspace");
  }
  double lo = 0.0;
  double hi = std::numbers::pi / (2.0 * sigmas(0));
  if (geodesic_distance(sigmas, hi) < distance) {
    throw Error(ErrorCode::kUnreachable,
                "distance " + std::to_string(distance) + " not attainable along this tangent");
  }
  // Bisection down to floating-point resolution (well below 1e-12 in s).
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (geodesic_distance(sigmas, mid) < distance) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<Subspace> geodesic_sequence(const GeodesicSpec& spec) {
  if (spec.steps < 0) throw Error(ErrorCode::kInvalidArgument, "steps must be >= 0");
  if (!(spec.step_distance >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "c must be >= 0");
  std::vector<Subspace> out;
  out.reserve(static_cast<std::size_t>(spec.steps) + 1);
  out.push_back(spec.start);
  for (long t = 0; t < spec.steps; ++t) {
    const Subspace& current = out.back();
    if (spec.step_distance == 0.0) {
      out.push_back(current);
      continue;
    }
    TangentVector v = tangent_project(current, spec.direction);
    const double norm = v.norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::kUnreachable, "drift direction left the tangent space");
    v = v.scaled(1.0 / norm);
    out.push_back(exp_map(v, scale_for_distance(v, spec.step_distance)));
  }
  return out;
}

Vector noisy_sample(const Subspace& u, const Vector& xi, double noise_norm, Rng& rng) {
  if (xi.size() != u.dim()) throw Error(ErrorCode::kDimensionMismatch, "coefficient length != d");
  if (!(noise_norm >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "noise norm must be >= 0");
  Vector out = u.basis() * xi;
  if (noise_norm > 0.0) {
    Vector e = rng.normal_vector(u.ambient_dim());
    double norm = e.norm();
    while (!(norm > 0.0)) {
      e = rng.normal_vector(u.ambient_dim());
      norm = e.norm();
    }
    out += (noise_norm / norm) * e;
  }
  return out;
}

Subspace perturbed_initial_estimate(const Subspace& truth, double r, Rng& rng) {
  if (!(r >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "radius must be >= 0");
  const Index reach = std::min(truth.dim(), truth.ambient_dim() - truth.dim());
  if (!(r < std::sqrt(static_cast<double>(reach)))) {
    throw Error(ErrorCode::kUnreachable,
                "radius " + std::to_string(r) + " >= sqrt(min(d, n - d))");
  }
  if (r == 0.0) return truth;
  const TangentVector v = random_tangent(truth, rng);
  try {
    return exp_map(v, scale_for_distance(v, r));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnreachable) throw;
  }
  // Large radii: switch to a tangent with equal singular values, which
  // reaches every distance below sqrt(min(d, n - d)).
  const Index d = truth.dim();
  const Subspace q = orthonormalize(v.direction().leftCols(std::min(d, reach)));
  Matrix flat = Matrix::Zero(truth.ambient_dim(), d);
  flat.leftCols(q.dim()) = q.basis();
  const TangentVector even = tangent_project(truth, flat / flat.norm());
  return exp_map(even, scale_for_distance(even, r));
}

Matrix SyntheticDataset::window(long t, Index length) const {
  if (length < 1 || t - length + 1 < 1 || t > static_cast<long>(samples.size())) {
    throw Error(ErrorCode::kInvalidArgument, "window [" + std::to_string(t - length + 1) + ", " +
                                                 std::to_string(t) + "] outside dataset");
  }
  Matrix w(spec.ambient_dim, length);
  for (Index j = 0; j < length; ++j) w.col(j) = sample(t - length + 1 + j);
  return w;
}

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  Rng root(spec.seed);
  Rng drift_rng = root.split(1);
  Rng coeff_rng = root.split(2);
  Rng noise_rng = root.split(3);

  SyntheticDataset out;
  out.spec = spec;
  const Subspace start = Subspace::coordinate(spec.ambient_dim, spec.dim);
  const TangentVector direction = random_tangent(start, drift_rng);
  out.truths = geodesic_sequence({start, direction.direction(), spec.drift, spec.horizon});

  const double scale = std::sqrt(static_cast<double>(spec.dim));
  out.samples.reserve(static_cast<std::size_t>(spec.horizon));
  for (long t = 1; t <= spec.horizon; ++t) {
    Vector xi;
    if (spec.coefficients == CoefficientMode::kGaussian) {
      xi = coeff_rng.normal_vector(spec.dim);
    } else {
      xi = Vector::Zero(spec.dim);
      xi(t % spec.dim) = scale;
    }
    out.samples.push_back(noisy_sample(out.truth(t), xi, spec.noise, noise_rng));
  }
  return out;
}

std::string to_string(CoefficientMode mode) {
  return mode == CoefficientMode::kGaussian ? "gaussian" : "cyclic";
}

CoefficientMode coefficient_mode_from_string(const std::string& name) {
  if (name == "gaussian") return CoefficientMode::kGaussian;
  if (name == "cyclic") return CoefficientMode::kCyclic;
  throw Error(ErrorCode::kConfig, "unknown coefficient mode '" + name + "'");
}

}  // namespace great
