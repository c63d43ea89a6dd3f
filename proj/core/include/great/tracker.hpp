#pragma once

// Windowed Grassmannian gradient descent tracker: K exp-map gradient steps on
// the projection error of the last T samples, warm-started from the previous
// estimate at every sample.

#include <memory>

#include "great/grassmann.hpp"
#include "great/window.hpp"

namespace great {

enum class StepRule {
  kFixed,
  /// Armijo backtracking from the configured step size.
  kLineSearch,
};

struct LineSearchOptions {
  double sufficient_decrease = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 20;
};

struct TrackerConfig {
  Index ambient_dim = 0;
  Index dim = 0;
  Index window_length = 0;
  double step_size = 0.0;
  int inner_iters = 1;
  StepRule step_rule = StepRule::kFixed;
  LineSearchOptions line_search{};
  /// Steps whose gradient norm falls below this are skipped.
  double min_gradient_norm = 1e-14;

  /// Throws kInvalidArgument unless 1 <= d <= min(n, T), K >= 1, step > 0.
  void validate() const;
};

/// F(U) = ||P_U^perp W||_F^2 = tr(W W^T) - tr(U^T W W^T U).
double cost(const Subspace& estimate, const Matrix& covariance, double trace_ww);

/// grad F(U) = -2 (I - U U^T) W W^T U.
TangentVector riemannian_gradient(const Subspace& estimate, const Matrix& covariance);

/// One fixed-step update Exp_U(-step * grad F(U)).
Subspace gd_step(const Subspace& estimate, const Matrix& covariance, double step,
                 double min_gradient_norm = 1e-14);

/// K fixed-step updates on a frozen covariance.
Subspace inner_loop(const Subspace& estimate, const Matrix& covariance, double step,
                    int iterations, double min_gradient_norm = 1e-14);

/// K updates, each with Armijo backtracking starting from `initial_step`. A
/// step that finds no sufficient decrease within the backtrack budget leaves
/// the estimate where it is.
Subspace inner_loop_line_search(const Subspace& estimate, const Matrix& covariance,
                                double trace_ww, double initial_step, int iterations,
                                const LineSearchOptions& options = {},
                                double min_gradient_norm = 1e-14);

/// Span of the d dominant left singular vectors of W_ini, the minimizer of
/// ||P^perp W_ini||_F^2. Throws kRankDeficient if sigma_d(W_ini) is below the
/// relative rank tolerance or W_ini has fewer than d columns.
Subspace initialize(const Matrix& w_ini, Index dim,
                    double rank_tol = kDefaultGrassmannTolerances.rank_tol);

struct TrackerState {
  Subspace estimate;
  DataWindow window;
  long time = 0;
};

/// Pushes `sample` into the window and, once the window is full, runs the
/// inner loop warm-started from the current estimate.
TrackerState track(TrackerState state, const Vector& sample, const TrackerConfig& config);

/// Interface shared by the GREAT tracker and the baselines in baselines.hpp.
class SubspaceTracker {
 public:
  virtual ~SubspaceTracker() = default;

  /// Consumes one sample.
  virtual void observe(const Vector& sample) = 0;
  /// Adds a sample to the tracker's memory without updating the estimate.
  virtual void prime(const Vector& sample) = 0;
  virtual Subspace estimate() const = 0;
  virtual std::unique_ptr<SubspaceTracker> clone() const = 0;
};

class GreatTracker final : public SubspaceTracker {
 public:
  GreatTracker(TrackerConfig config, Subspace initial);

  void observe(const Vector& sample) override;
  void prime(const Vector& sample) override;
  Subspace estimate() const override { return state_.estimate; }
  std::unique_ptr<SubspaceTracker> clone() const override {
    return std::make_unique<GreatTracker>(*this);
  }

  const TrackerState& state() const noexcept { return state_; }
  const TrackerConfig& config() const noexcept { return config_; }

 private:
  TrackerConfig config_;
  TrackerState state_;
};

}  // namespace great
