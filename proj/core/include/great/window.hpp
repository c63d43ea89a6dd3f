#pragma once

// Sliding and discounted data windows that maintain the n x n covariance W W^T
// incrementally, so a tracker step never touches the raw samples.

#include <cstddef>
#include <vector>

#include "great/grassmann.hpp"

namespace great {

class DataWindow {
 public:
  static constexpr std::size_t kDefaultRefreshInterval = 10'000;

  /// Window over the last `capacity` samples of R^n. The covariance is rebuilt
  /// from the stored samples every `refresh_interval` pushes (0 disables).
  DataWindow(Index ambient_dim, Index capacity,
             std::size_t refresh_interval = kDefaultRefreshInterval);

  /// Appends `u`, evicting the oldest sample when full. Rank-1 update while
  /// filling, rank-2 afterwards.
  void push(const Vector& u);

  Index ambient_dim() const noexcept { return covariance_.rows(); }
  Index capacity() const noexcept { return capacity_; }
  Index count() const noexcept { return count_; }
  bool full() const noexcept { return count_ == capacity_; }

  const Matrix& covariance() const noexcept { return covariance_; }
  double trace() const { return covariance_.trace(); }

  /// i-th held sample, 0 = oldest.
  const Vector& sample(Index i) const;

  /// n x count matrix [oldest ... newest]. Throws kEmpty when nothing is held.
  Matrix data_matrix() const;

  /// Rebuilds the covariance from the held samples.
  void refresh();

 private:
  Index capacity_;
  Index count_ = 0;
  Index head_ = 0;  // slot that receives the next sample
  std::size_t refresh_interval_;
  std::size_t pushes_since_refresh_ = 0;
  std::vector<Vector> ring_;
  Matrix covariance_;
};

/// Exponentially discounted covariance C <- forget^2 C + u u^T.
class DiscountedWindow {
 public:
  DiscountedWindow(Index ambient_dim, double forget);

  void push(const Vector& u);

  Index ambient_dim() const noexcept { return covariance_.rows(); }
  double forget() const noexcept { return forget_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  double trace() const { return covariance_.trace(); }

 private:
  double forget_;
  Matrix covariance_;
};

}  // namespace great
