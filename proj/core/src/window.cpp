#include "great/window.hpp"

#include <string>

namespace great {
namespace {

void symmetrize(Matrix& c) {
  c = 0.5 * (c + c.transpose()).eval();
}

}  // namespace

DataWindow::DataWindow(Index ambient_dim, Index capacity, std::size_t refresh_interval)
    : capacity_(capacity),
      refresh_interval_(refresh_interval),
      covariance_(Matrix::Zero(ambient_dim, ambient_dim)) {
  if (ambient_dim < 1 || capacity < 1) {
    throw Error(ErrorCode::kInvalidArgument, "window needs n >= 1 and capacity >= 1");
  }
  ring_.assign(static_cast<std::size_t>(capacity), Vector::Zero(ambient_dim));
}

void DataWindow::push(const Vector& u) {
  if (u.size() != ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "sample length " + std::to_string(u.size()) + " != n = " +
                    std::to_string(ambient_dim()));
  }
  Vector& slot = ring_[static_cast<std::size_t>(head_)];
  if (full()) {
    covariance_.noalias() -= slot * slot.transpose();
  } else {
    ++count_;
  }
  covariance_.noalias() += u * u.transpose();
  slot = u;
  head_ = (head_ + 1) % capacity_;

  if (refresh_interval_ != 0 && ++pushes_since_refresh_ >= refresh_interval_) {
    refresh();
  } else {
    symmetrize(covariance_);
  }
}

const Vector& DataWindow::sample(Index i) const {
  if (i < 0 || i >= count_) {
    throw Error(ErrorCode::kInvalidArgument, "sample index out of range");
  }
  const Index oldest = full() ? head_ : 0;
  return ring_[static_cast<std::size_t>((oldest + i) % capacity_)];
}

Matrix DataWindow::data_matrix() const {
  if (count_ == 0) throw Error(ErrorCode::kEmpty, "data window holds no samples");
  Matrix w(ambient_dim(), count_);
  for (Index i = 0; i < count_; ++i) w.col(i) = sample(i);
  return w;
}

void DataWindow::refresh() {
  covariance_.setZero();
  for (Index i = 0; i < count_; ++i) {
    const Vector& u = sample(i);
    covariance_.noalias() += u * u.transpose();
  }
  symmetrize(covariance_);
  pushes_since_refresh_ = 0;
}

DiscountedWindow::DiscountedWindow(Index ambient_dim, double forget)
    : forget_(forget), covariance_(Matrix::Zero(ambient_dim, ambient_dim)) {
  if (ambient_dim < 1) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  if (!(forget >= 0.0 && forget <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "forgetting factor must lie in [0, 1]");
  }
}

void DiscountedWindow::push(const Vector& u) {
  if (u.size() != ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "sample length != n");
  }
  covariance_ *= forget_ * forget_;
  covariance_.noalias() += u * u.transpose();
  symmetrize(covariance_);
}

}  // namespace great
