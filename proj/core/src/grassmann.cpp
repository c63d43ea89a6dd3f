#include "great/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace great {
namespace {

void require_same_shape(const Subspace& u, const Subspace& v, const char* who) {
  if (u.ambient_dim() != v.ambient_dim() || u.dim() != v.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(who) + ": Gr(" + std::to_string(u.ambient_dim()) +
                    "," + std::to_string(u.dim()) + ") vs Gr(" +
                    std::to_string(v.ambient_dim()) + "," +
                    std::to_string(v.dim()) + ")");
  }
}

// Thin Householder Q with columns flipped so that R has a positive diagonal.
Matrix thin_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const auto& r = qr.matrixQR();
  for (Index j = 0; j < m.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace

Subspace Subspace::from_basis(Matrix basis, double tol) {
  if (basis.cols() < 1 || basis.cols() > basis.rows()) {
    throw Error(ErrorCode::kInvalidArgument,
                "subspace basis must satisfy 1 <= d <= n, got " +
                    std::to_string(basis.rows()) + "x" +
                    std::to_string(basis.cols()));
  }
  const double defect =
      (basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols()))
          .norm();
  if (!(defect < tol)) {
    throw Error(ErrorCode::kInvalidArgument,
                "basis is not orthonormal (defect " + std::to_string(defect) + ")");
  }
  return Subspace(std::move(basis));
}

Subspace Subspace::coordinate(Index n, Index d) {
  return from_basis(Matrix::Identity(n, d));
}

TangentVector::TangentVector(Subspace base, Matrix direction, double tol)
    : base_(std::move(base)), direction_(std::move(direction)) {
  if (direction_.rows() != base_.ambient_dim() || direction_.cols() != base_.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "tangent direction shape does not match base");
  }
  const double leak = (base_.basis().transpose() * direction_).norm();
  if (!(leak <= tol * std::max(1.0, direction_.norm()))) {
    throw Error(ErrorCode::kInvalidArgument,
                "direction is not tangent (|U^T V| = " + std::to_string(leak) + ")");
  }
}

TangentVector TangentVector::scaled(double factor) const {
  TangentVector out = *this;
  out.direction_ *= factor;
  return out;
}

Subspace orthonormalize(const Matrix& m, double rank_tol) {
  if (m.cols() < 1 || m.cols() > m.rows()) {
    throw Error(ErrorCode::kRankDeficient, "matrix has more columns than rows");
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > rank_tol * s(0))) {
    throw Error(ErrorCode::kRankDeficient,
                "sigma_d = " + std::to_string(s(s.size() - 1)) +
                    " below relative tolerance of sigma_1 = " + std::to_string(s(0)));
  }
  return Subspace::from_basis(thin_q(m));
}

PrincipalAngles principal_angles(const Subspace& u, const Subspace& v) {
  require_same_shape(u, v, "principal_angles");
  const Matrix cross = u.basis().transpose() * v.basis();
  const Matrix residual = v.basis() - u.basis() * cross;

  // Cosines from U^T V lose resolution near zero angle, sines from P_U^perp V
  // lose it near pi/2; pair them and take whichever is well conditioned.
  const Vector cosines = Eigen::JacobiSVD<Matrix>(cross).singularValues();   // descending
  const Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();  // descending
  const Index d = u.dim();

  PrincipalAngles out;
  out.angles.resize(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(d - 1 - i), 0.0, 1.0);
    const double theta = (c * c >= 0.5) ? std::asin(s) : std::acos(c);
    out.angles[static_cast<std::size_t>(i)] =
        std::clamp(theta, 0.0, std::numbers::pi / 2.0);
  }
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

double chordal_distance_squared(const Subspace& u, const Subspace& v) {
  require_same_shape(u, v, "chordal_distance");
  const Matrix residual = v.basis() - u.basis() * (u.basis().transpose() * v.basis());
  return std::min(residual.squaredNorm(), static_cast<double>(u.dim()));
}

double chordal_distance(const Subspace& u, const Subspace& v) {
  return std::sqrt(chordal_distance_squared(u, v));
}

double gap_distance(const Subspace& u, const Subspace& v) {
  require_same_shape(u, v, "gap_distance");
  const Matrix residual = v.basis() - u.basis() * (u.basis().transpose() * v.basis());
  const Vector sines = Eigen::JacobiSVD<Matrix>(residual).singularValues();
  return std::clamp(sines(0), 0.0, 1.0);
}

Vector project(const Subspace& u, const Vector& x) {
  if (x.size() != u.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "project: vector length != n");
  }
  return u.basis() * (u.basis().transpose() * x);
}

Vector complement_project(const Subspace& u, const Vector& x) {
  if (x.size() != u.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "complement_project: vector length != n");
  }
  return x - u.basis() * (u.basis().transpose() * x);
}

Matrix complement_project(const Subspace& u, const Matrix& m) {
  if (m.rows() != u.ambient_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "complement_project: row count != n");
  }
  return m - u.basis() * (u.basis().transpose() * m);
}

TangentVector tangent_project(const Subspace& u, const Matrix& m) {
  if (m.rows() != u.ambient_dim() || m.cols() != u.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "tangent_project: shape != n x d");
  }
  // Projecting twice removes the O(eps * |M|) leak a single pass leaves behind.
  Matrix direction = complement_project(u, m);
  direction = complement_project(u, direction);
  return TangentVector(u, std::move(direction));
}

Subspace exp_map(const TangentVector& v, double scale) {
  const Subspace& base = v.base();
  if (scale == 0.0 || v.direction().isZero(0.0)) return base;

  const Matrix step = scale * v.direction();
  Eigen::JacobiSVD<Matrix> svd(step, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = std::numeric_limits<double>::epsilon() * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff) ++rank;
  if (rank == 0) return base;

  const auto q1 = svd.matrixU().leftCols(rank);
  const auto q2 = svd.matrixV().leftCols(rank);
  const auto sr = s.head(rank).array();
  // cos(s) - 1 written as -2 sin^2(s/2) keeps small steps accurate.
  const Vector cos_minus_one = -2.0 * (0.5 * sr).sin().square();
  const Vector sines = sr.sin();

  Matrix moved = base.basis();
  moved += (base.basis() * q2) * cos_minus_one.asDiagonal() * q2.transpose();
  moved += q1 * sines.asDiagonal() * q2.transpose();
  return Subspace::from_basis(thin_q(moved));
}

TangentVector squared_chordal_gradient(const Subspace& u, const Subspace& v) {
  require_same_shape(u, v, "squared_chordal_gradient");
  const Matrix pv_u = v.basis() * (v.basis().transpose() * u.basis());
  return tangent_project(u, -2.0 * pv_u);
}

}  // namespace great
