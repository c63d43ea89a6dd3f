#pragma once

// Reference trackers: GROUSE (single-sample exp-map step) and PAST
// (projection-approximation recursive least squares).

#include <memory>

#include "great/tracker.hpp"

namespace great {

/// Exp_U(-alpha grad) for the single-sample cost |P^perp u|^2, using the
/// rank-one structure of the gradient -2 P^perp u (U^T u)^T. Equivalent to
/// gd_step with covariance u u^T.
Subspace grouse_step(const Subspace& estimate, const Vector& u, double step,
                     double min_gradient_norm = 1e-14);

struct PastState {
  Matrix w;        // n x d, not orthonormal in general
  Matrix p;        // d x d inverse correlation
  double forget = 0.985;

  /// W = initial basis, P = p_scale I.
  static PastState from_subspace(const Subspace& initial, double forget = 0.985,
                                 double p_scale = 1e3);
};

/// y = W^T u, h = P y, g = h / (beta + y^T h), P <- (P - g h^T) / beta
/// (symmetrized), W <- W + (u - W y) g^T.
PastState past_step(PastState state, const Vector& u);

/// orthonormalize(W). Throws kRankDeficient if W lost column rank.
Subspace past_subspace(const PastState& state);

class GrouseTracker final : public SubspaceTracker {
 public:
  GrouseTracker(double step, Subspace initial);

  void observe(const Vector& sample) override;
  void prime(const Vector&) override {}
  Subspace estimate() const override { return estimate_; }
  std::unique_ptr<SubspaceTracker> clone() const override {
    return std::make_unique<GrouseTracker>(*this);
  }

 private:
  double step_;
  Subspace estimate_;
};

class PastTracker final : public SubspaceTracker {
 public:
  explicit PastTracker(PastState state);

  void observe(const Vector& sample) override;
  void prime(const Vector&) override {}
  Subspace estimate() const override { return past_subspace(state_); }
  std::unique_ptr<SubspaceTracker> clone() const override {
    return std::make_unique<PastTracker>(*this);
  }

  const PastState& state() const noexcept { return state_; }

 private:
  PastState state_;
};

}  // namespace great
