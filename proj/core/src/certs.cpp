#include "great/certs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace great {
namespace {

double ipow(double x, long k) {
  double out = 1.0;
  double base = x;
  while (k > 0) {
    if (k & 1) out *= base;
    base *= base;
    k >>= 1;
  }
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
}

// Ultimate bound without the feasibility gate; +inf outside rho_tilde in [0, 1).
double raw_ultimate(double alpha, double delta_sup, const CertificateParams& p) {
  const double rt = rho_tilde(alpha, p.sigma_lower, p.sigma_upper, p.tube_radius);
  if (!(rt >= 0.0 && rt < 1.0)) return std::numeric_limits<double>::infinity();
  const double rtk = ipow(rt, p.inner_iters);
  const double c = p.drift_bound;
  return gamma(p.tube_radius, delta_sup, alpha, p.sigma_upper) / (1.0 - rt) +
         rtk / (1.0 - rtk) * (2.0 * p.tube_radius - c) * c;
}

bool feasible(double alpha, double delta_sup, CertificateParams p) {
  p.step_size = alpha;
  const double rt = rho_tilde(alpha, p.sigma_lower, p.sigma_upper, p.tube_radius);
  if (!(rt >= 0.0 && rt < 1.0)) return false;
  return assumption4_check(p, delta_sup).holds;
}

Assumption4Report require_assumption4(const CertificateParams& p, double delta_sup) {
  const Assumption4Report report = assumption4_check(p, delta_sup);
  if (!report.holds) {
    throw Error(ErrorCode::kAssumptionViolated,
                "sufficient decrease condition fails: slack " + std::to_string(report.slack) +
                    " (lhs " + std::to_string(report.lhs) + ", rhs " +
                    std::to_string(report.rhs) + ")");
  }
  return report;
}

}  // namespace

void CertificateParams::validate(bool require_step_size) const {
  require(noise_bound >= 0.0, "noise bound must be >= 0");
  require(drift_bound >= 0.0, "drift bound must be >= 0");
  require(sigma_lower > 0.0 && sigma_lower <= sigma_upper,
          "signal bounds must satisfy 0 < sigma_lower <= sigma_upper");
  require(drift_bound <= tube_radius && tube_radius < 1.0,
          "tube radius must satisfy c <= r_b < 1");
  require(dim >= 1 && window_length >= dim, "need T >= d >= 1");
  require(inner_iters >= 1, "K must be >= 1");
  if (require_step_size) require(step_size > 0.0, "step size must be > 0");
}

double delta_bound(const Matrix& w, const CertificateParams& p) {
  const Index t_len = p.window_length;
  if (w.cols() != t_len) {
    throw Error(ErrorCode::kDimensionMismatch,
                "delta_bound: window has " + std::to_string(w.cols()) + " columns, T = " +
                    std::to_string(t_len));
  }
  double weighted = 0.0;
  for (Index j = 0; j < t_len; ++j) {
    const double age = static_cast<double>(t_len - 1 - j);
    weighted += age * age * w.col(j).squaredNorm();
  }
  const double t = static_cast<double>(t_len);
  return p.drift_bound * std::sqrt(weighted) +
         p.noise_bound * std::sqrt(t) * (p.drift_bound * (t - 1.0) + 1.0);
}

double gamma(double r, double delta, double alpha, double sigma_upper) {
  const double a = alpha;
  const double s = sigma_upper;
  const double d2 = delta * delta;
  return 8.0 * a * r * s * (1.0 + 4.0 * a * s * s) * delta +
         (4.0 * a * r + 16.0 * a * a * s * s * (r + 2.0)) * d2 +
         32.0 * a * a * s * d2 * delta + 8.0 * a * a * d2 * d2;
}

double rho(double alpha, double sigma_lower, double sigma_upper) {
  const double s2 = sigma_upper * sigma_upper;
  return alpha * sigma_lower * sigma_lower - 2.0 * alpha * alpha * s2 * s2;
}

double rho_tilde(double alpha, double sigma_lower, double sigma_upper, double tube_radius) {
  return 1.0 - 4.0 * (1.0 - tube_radius * tube_radius) * rho(alpha, sigma_lower, sigma_upper);
}

double max_rate_step(double sigma_lower, double sigma_upper) {
  const double s2 = sigma_upper * sigma_upper;
  return sigma_lower * sigma_lower / (4.0 * s2 * s2);
}

double max_stable_step(double sigma_lower, double sigma_upper) {
  return 2.0 * max_rate_step(sigma_lower, sigma_upper);
}

Assumption4Report assumption4_check(const CertificateParams& p, double delta_sup) {
  p.validate();
  if (!(delta_sup >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "delta_sup must be >= 0");
  Assumption4Report out;
  out.rho_tilde = rho_tilde(p.step_size, p.sigma_lower, p.sigma_upper, p.tube_radius);
  if (!(out.rho_tilde >= 0.0 && out.rho_tilde < 1.0)) {
    throw Error(ErrorCode::kInvalidRho,
                "rho_tilde = " + std::to_string(out.rho_tilde) + " outside [0, 1)");
  }
  const double rt = out.rho_tilde;
  const double rb = p.tube_radius;
  const double c = p.drift_bound;
  out.lhs = gamma(rb, delta_sup, p.step_size, p.sigma_upper);
  out.rhs = (1.0 - rt) * rb * rb +
            (1.0 - rt) * (c * c - 2.0 * c * rb) / (1.0 - ipow(rt, p.inner_iters));
  out.slack = out.rhs - out.lhs;
  out.holds = out.lhs <= out.rhs;
  return out;
}

double single_step_bound(double d_sq, double delta, const CertificateParams& p,
                         double grad_norm_sq) {
  return d_sq - rho(p.step_size, p.sigma_lower, p.sigma_upper) * grad_norm_sq +
         gamma(p.tube_radius, delta, p.step_size, p.sigma_upper);
}

double theorem1_bound(long steps, double d0_sq, double delta_sup, const CertificateParams& p) {
  if (steps < 0) throw Error(ErrorCode::kInvalidArgument, "step count must be >= 0");
  const Assumption4Report report = require_assumption4(p, delta_sup);
  const double rt = report.rho_tilde;
  const double rtk = ipow(rt, p.inner_iters);
  const double decay = ipow(rt, static_cast<long>(p.inner_iters) * steps);
  const double c = p.drift_bound;
  return decay * d0_sq +
         (1.0 - decay) / (1.0 - rt) * gamma(p.tube_radius, delta_sup, p.step_size, p.sigma_upper) +
         (1.0 - decay) / (1.0 - rtk) * rtk * (2.0 * p.tube_radius - c) * c;
}

double ultimate_bound(double delta_sup, const CertificateParams& p) {
  require_assumption4(p, delta_sup);
  return raw_ultimate(p.step_size, delta_sup, p);
}

TubeBound tube_bound(long steps, double d0_sq, double delta_sup, const CertificateParams& p) {
  if (steps < 0) throw Error(ErrorCode::kInvalidArgument, "step count must be >= 0");
  TubeBound out;
  out.rho_tilde = require_assumption4(p, delta_sup).rho_tilde;
  out.ultimate = ultimate_bound(delta_sup, p);
  out.per_step.reserve(static_cast<std::size_t>(steps) + 1);
  for (long s = 0; s <= steps; ++s) out.per_step.push_back(theorem1_bound(s, d0_sq, delta_sup, p));
  return out;
}

StepSizeResult optimize_step_size(StepObjective objective, double delta_sup,
                                  const CertificateParams& p, double rel_width) {
  p.validate(false);
  if (objective == StepObjective::kMaxRate) {
    return {max_rate_step(p.sigma_lower, p.sigma_upper), 0, 0.0};
  }
  if (!(rel_width > 0.0)) throw Error(ErrorCode::kInvalidArgument, "rel_width must be > 0");

  const double hi = max_stable_step(p.sigma_lower, p.sigma_upper);
  auto objective_at = [&](double a) {
    return feasible(a, delta_sup, p) ? raw_ultimate(a, delta_sup, p)
                                     : std::numeric_limits<double>::infinity();
  };

  // Coarse scan locates the feasible basin; golden section refines inside the
  // bracket around the best grid point.
  constexpr int kGrid = 512;
  int best = -1;
  double best_value = std::numeric_limits<double>::infinity();
  for (int i = 1; i < kGrid; ++i) {
    const double v = objective_at(hi * i / kGrid);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best < 0) {
    throw Error(ErrorCode::kInfeasible,
                "no step size in (0, sigma_lower^2 / (2 sigma_upper^4)) satisfies the "
                "sufficient decrease condition");
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double a = hi * (best - 1) / kGrid;
  double b = hi * (best + 1) / kGrid;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = objective_at(x1);
  double f2 = objective_at(x2);
  int iterations = 0;
  while ((b - a) > rel_width * 0.5 * (a + b) && iterations < 200) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = objective_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = objective_at(x2);
    }
    ++iterations;
  }
  double alpha = 0.5 * (a + b);
  double value = objective_at(alpha);
  if (!(value <= best_value)) {
    alpha = hi * best / kGrid;
    value = best_value;
  }
  return {alpha, iterations, value};
}

SignalBounds signal_bounds(const Matrix& w, const Subspace& truth) {
  if (w.rows() != truth.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "signal_bounds: row count != n");
  }
  const Matrix coords = truth.basis().transpose() * w;
  const Vector s = Eigen::JacobiSVD<Matrix>(coords).singularValues();
  SignalBounds out;
  out.upper = s.size() > 0 ? s(0) : 0.0;
  out.lower = (w.cols() >= truth.dim()) ? s(truth.dim() - 1) : 0.0;
  return out;
}

}  // namespace great
