#include "great/tracker.hpp"

#include <string>

namespace great {
namespace {

void require_covariance(const Subspace& u, const Matrix& covariance) {
  if (covariance.rows() != u.ambient_dim() || covariance.cols() != u.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "covariance must be n x n with n = " + std::to_string(u.ambient_dim()));
  }
}

}  // namespace

void TrackerConfig::validate() const {
  if (ambient_dim < 1 || dim < 1 || dim > ambient_dim) {
    throw Error(ErrorCode::kInvalidArgument, "tracker needs 1 <= d <= n");
  }
  if (window_length < dim) {
    throw Error(ErrorCode::kInvalidArgument, "window length T must be >= d");
  }
  if (inner_iters < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (!(step_size > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be > 0");
}

double cost(const Subspace& estimate, const Matrix& covariance, double trace_ww) {
  require_covariance(estimate, covariance);
  const Matrix& u = estimate.basis();
  return trace_ww - (u.transpose() * covariance * u).trace();
}

TangentVector riemannian_gradient(const Subspace& estimate, const Matrix& covariance) {
  require_covariance(estimate, covariance);
  const Matrix& u = estimate.basis();
  const Matrix cu = covariance * u;
  return tangent_project(estimate, -2.0 * cu);
}

Subspace gd_step(const Subspace& estimate, const Matrix& covariance, double step,
                 double min_gradient_norm) {
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be > 0");
  const TangentVector grad = riemannian_gradient(estimate, covariance);
  if (grad.norm() < min_gradient_norm) return estimate;
  return exp_map(grad, -step);
}

Subspace inner_loop(const Subspace& estimate, const Matrix& covariance, double step,
                    int iterations, double min_gradient_norm) {
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  Subspace current = estimate;
  for (int k = 0; k < iterations; ++k) {
    current = gd_step(current, covariance, step, min_gradient_norm);
  }
  return current;
}

Subspace inner_loop_line_search(const Subspace& estimate, const Matrix& covariance,
                                double trace_ww, double initial_step, int iterations,
                                const LineSearchOptions& options,
                                double min_gradient_norm) {
  if (iterations < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (!(initial_step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step size must be > 0");
  Subspace current = estimate;
  for (int k = 0; k < iterations; ++k) {
    const TangentVector grad = riemannian_gradient(current, covariance);
    const double grad_sq = grad.direction().squaredNorm();
    if (std::sqrt(grad_sq) < min_gradient_norm) break;
    const double f0 = cost(current, covariance, trace_ww);
    double step = initial_step;
    for (int b = 0; b <= options.max_backtracks; ++b) {
      Subspace candidate = exp_map(grad, -step);
      if (cost(candidate, covariance, trace_ww) <=
          f0 - options.sufficient_decrease * step * grad_sq) {
        current = std::move(candidate);
        break;
      }
      step *= options.shrink;
    }
  }
  return current;
}

Subspace initialize(const Matrix& w_ini, Index dim, double rank_tol) {
  if (dim < 1 || dim > w_ini.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "initialize: need 1 <= d <= n");
  }
  if (w_ini.cols() < dim) {
    throw Error(ErrorCode::kRankDeficient, "initialize: fewer than d columns");
  }
  Eigen::BDCSVD<Matrix> svd(w_ini, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  if (!(s(dim - 1) > rank_tol * s(0))) {
    throw Error(ErrorCode::kRankDeficient,
                "initialize: sigma_d(W_ini) = " + std::to_string(s(dim - 1)) +
                    " is numerically zero");
  }
  return orthonormalize(svd.matrixU().leftCols(dim));
}

TrackerState track(TrackerState state, const Vector& sample, const TrackerConfig& config) {
  if (state.estimate.dim() != config.dim || state.estimate.ambient_dim() != config.ambient_dim ||
      state.window.capacity() != config.window_length) {
    throw Error(ErrorCode::kDimensionMismatch, "tracker state does not match config");
  }
  state.window.push(sample);
  ++state.time;
  if (!state.window.full()) return state;

  const Matrix& cov = state.window.covariance();
  if (config.step_rule == StepRule::kFixed) {
    state.estimate = inner_loop(state.estimate, cov, config.step_size, config.inner_iters,
                                config.min_gradient_norm);
  } else {
    state.estimate = inner_loop_line_search(state.estimate, cov, state.window.trace(),
                                            config.step_size, config.inner_iters,
                                            config.line_search, config.min_gradient_norm);
  }
  return state;
}

GreatTracker::GreatTracker(TrackerConfig config, Subspace initial)
    : config_(config),
      state_{std::move(initial), DataWindow(config.ambient_dim, std::max<Index>(config.window_length, 1)), 0} {
  config_.validate();
  if (state_.estimate.dim() != config_.dim ||
      state_.estimate.ambient_dim() != config_.ambient_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "initial estimate is not in Gr(n, d)");
  }
}

void GreatTracker::observe(const Vector& sample) {
  state_ = track(std::move(state_), sample, config_);
}

void GreatTracker::prime(const Vector& sample) {
  state_.window.push(sample);
}

}  // namespace great
