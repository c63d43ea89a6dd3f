#pragma once

// Closed-form certificates for the GREAT tracker: window noise bound, the
// single-step decay function gamma, contraction factors, the sufficient
// decrease condition, the invariant tube and its ultimate level, and step-size
// tuning.

#include <vector>

#include "great/grassmann.hpp"

namespace great {

struct CertificateParams {
  double noise_bound = 0.0;   // eps
  double drift_bound = 0.0;   // c
  double sigma_lower = 0.0;
  double sigma_upper = 0.0;
  double tube_radius = 0.0;   // r_b
  double step_size = 0.0;     // alpha
  Index window_length = 0;    // T
  int inner_iters = 1;        // K
  Index dim = 0;              // d

  /// Throws kInvalidArgument unless eps >= 0, c >= 0, 0 < sigma_lower <=
  /// sigma_upper, c <= r_b < 1, T >= d >= 1, K >= 1 and (if required) alpha > 0.
  void validate(bool require_step_size = true) const;
};

/// delta = c ||W D||_F + eps sqrt(T) (c (T-1) + 1) with D weighting the oldest
/// column of W by T-1 and the newest by 0. W must have exactly T columns.
double delta_bound(const Matrix& w, const CertificateParams& p);

/// gamma_r(delta) = 8 a r s (1 + 4 a s^2) delta + (4 a r + 16 a^2 s^2 (r + 2)) delta^2
///                + 32 a^2 s delta^3 + 8 a^2 delta^4, with a = alpha, s = sigma_upper.
double gamma(double r, double delta, double alpha, double sigma_upper);

/// rho = alpha sigma_lower^2 - 2 alpha^2 sigma_upper^4.
double rho(double alpha, double sigma_lower, double sigma_upper);

/// rho_tilde = 1 - 4 (1 - r_b^2) rho.
double rho_tilde(double alpha, double sigma_lower, double sigma_upper, double tube_radius);

/// alpha^cvg = sigma_lower^2 / (4 sigma_upper^4), the maximizer of rho.
double max_rate_step(double sigma_lower, double sigma_upper);

/// Upper end sigma_lower^2 / (2 sigma_upper^4) of the step sizes with rho > 0.
double max_stable_step(double sigma_lower, double sigma_upper);

struct Assumption4Report {
  bool holds = false;
  double lhs = 0.0;   // gamma_{r_b}(delta_sup)
  double rhs = 0.0;
  double slack = 0.0; // rhs - lhs
  double rho_tilde = 0.0;
};

/// Sufficient decrease condition
///   gamma_{r_b}(delta_sup) <= (1 - rt) r_b^2 + (1 - rt)(c^2 - 2 c r_b) / (1 - rt^K).
/// Throws kInvalidRho unless rho_tilde lies in [0, 1).
Assumption4Report assumption4_check(const CertificateParams& p, double delta_sup);

/// Right-hand side d_sq - rho |grad d2^2|_F^2 + gamma_r(delta) of the one-step
/// decay inequality, with r = p.tube_radius.
double single_step_bound(double d_sq, double delta, const CertificateParams& p,
                         double grad_norm_sq);

/// Squared-distance bound after `steps` outer steps counted from the initial
/// estimate:
///   rt^{Ks} d0^2 + (1 - rt^{Ks}) / (1 - rt) gamma + (1 - rt^{Ks}) / (1 - rt^K) rt^K (2 r_b - c) c.
/// Throws kAssumptionViolated if the sufficient decrease condition fails.
double theorem1_bound(long steps, double d0_sq, double delta_sup, const CertificateParams& p);

/// gamma_{r_b}(delta_sup) / (1 - rt) + rt^K / (1 - rt^K) (2 r_b - c) c.
/// Throws kAssumptionViolated if the sufficient decrease condition fails.
double ultimate_bound(double delta_sup, const CertificateParams& p);

struct TubeBound {
  /// per_step[s] bounds the squared distance s outer steps after initialization.
  std::vector<double> per_step;
  double ultimate = 0.0;
  double rho_tilde = 0.0;
};

/// theorem1_bound for s = 0..steps plus the ultimate level.
TubeBound tube_bound(long steps, double d0_sq, double delta_sup, const CertificateParams& p);

enum class StepObjective { kMaxRate, kMinUltimate };

struct StepSizeResult {
  double alpha = 0.0;
  int iterations = 0;
  /// Ultimate bound at alpha (kMinUltimate only; 0 when not evaluated).
  double ultimate = 0.0;
};

/// kMaxRate returns alpha^cvg. kMinUltimate minimizes ultimate_bound over the
/// feasible part of (0, sigma_lower^2 / (2 sigma_upper^4)) by golden-section
/// search to `rel_width` relative interval width. p.step_size is ignored.
/// Throws kInfeasible if no step size satisfies the sufficient decrease
/// condition.
StepSizeResult optimize_step_size(StepObjective objective, double delta_sup,
                                  const CertificateParams& p, double rel_width = 1e-8);

struct SignalBounds {
  double lower = 0.0;  // sigma_d(P_U W)
  double upper = 0.0;  // sigma_1(P_U W)
};

/// Extreme singular values of U^T W (equal to those of P_U W).
SignalBounds signal_bounds(const Matrix& w, const Subspace& truth);

}  // namespace great
