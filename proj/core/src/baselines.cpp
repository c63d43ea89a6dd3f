#include "great/baselines.hpp"

#include <cmath>

namespace great {

Subspace grouse_step(const Subspace& estimate, const Vector& u, double step,
                     double min_gradient_norm) {
  if (u.size() != estimate.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "grouse_step: sample length != n");
  }
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be > 0");
  const Matrix& basis = estimate.basis();
  const Vector w = basis.transpose() * u;
  Vector r = u - basis * w;
  r -= basis * (basis.transpose() * r);
  const double rn = r.norm();
  const double wn = w.norm();
  if (2.0 * rn * wn < min_gradient_norm) return estimate;

  const double sigma = 2.0 * step * rn * wn;
  const Vector q1 = r / rn;
  const Vector q2 = w / wn;
  Matrix moved = basis;
  moved += (-2.0 * std::pow(std::sin(0.5 * sigma), 2)) * (basis * q2) * q2.transpose();
  moved += std::sin(sigma) * q1 * q2.transpose();
  return orthonormalize(moved);
}

PastState PastState::from_subspace(const Subspace& initial, double forget, double p_scale) {
  if (!(forget > 0.0 && forget <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "PAST forgetting factor must lie in (0, 1]");
  }
  if (!(p_scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "PAST P scale must be > 0");
  return {initial.basis(), p_scale * Matrix::Identity(initial.dim(), initial.dim()), forget};
}

PastState past_step(PastState state, const Vector& u) {
  if (u.size() != state.w.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "past_step: sample length != n");
  }
  const Vector y = state.w.transpose() * u;
  const Vector h = state.p * y;
  const Vector g = h / (state.forget + y.dot(h));
  state.p = (state.p - g * h.transpose()) / state.forget;
  state.p = 0.5 * (state.p + state.p.transpose()).eval();
  state.w += (u - state.w * y) * g.transpose();
  return state;
}

Subspace past_subspace(const PastState& state) {
  return orthonormalize(state.w);
}

GrouseTracker::GrouseTracker(double step, Subspace initial)
    : step_(step), estimate_(std::move(initial)) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be > 0");
}

void GrouseTracker::observe(const Vector& sample) {
  estimate_ = grouse_step(estimate_, sample, step_);
}

PastTracker::PastTracker(PastState state) : state_(std::move(state)) {}

void PastTracker::observe(const Vector& sample) {
  state_ = past_step(std::move(state_), sample);
}

}  // namespace great
