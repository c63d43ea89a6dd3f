#pragma once

// Subspace arithmetic on the Grassmann manifold Gr(n, d).
//
// A point is stored as an orthonormal n x d basis; every quantity exposed here
// (projectors, principal angles, distances) depends on the span only, so any
// two bases related by a d x d orthogonal factor give identical results up to
// rounding.

#include <Eigen/Dense>

#include <vector>

#include "great/errors.hpp"

namespace great {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Numerical thresholds used across the manifold layer. The defaults are the
/// ones every module is tested with; experiments may override them.
struct GrassmannTolerances {
  /// Relative cutoff sigma_d(M) > rank_tol * sigma_1(M) for full column rank.
  double rank_tol = 1e-10;
  /// Frobenius bound on basis^T basis - I accepted by Subspace::from_basis.
  double orthonormality = 1e-10;
  /// Bound on ||U^T V||_F / max(1, ||V||_F) accepted for tangent vectors.
  double tangency = 1e-10;
};

inline const GrassmannTolerances kDefaultGrassmannTolerances{};

class Subspace {
 public:
  /// Wraps an already orthonormal basis. Throws kInvalidArgument if the
  /// columns are not orthonormal within `tol`, or if the shape is not
  /// 1 <= d <= n.
  static Subspace from_basis(Matrix basis,
                             double tol = kDefaultGrassmannTolerances.orthonormality);

  /// Span of the first d standard unit vectors of R^n.
  static Subspace coordinate(Index n, Index d);

  const Matrix& basis() const noexcept { return basis_; }
  Index ambient_dim() const noexcept { return basis_.rows(); }
  Index dim() const noexcept { return basis_.cols(); }

  /// Dense orthogonal projector U U^T (n x n).
  Matrix projector() const { return basis_ * basis_.transpose(); }

 private:
  explicit Subspace(Matrix basis) : basis_(std::move(basis)) {}

  Matrix basis_;
};

/// Tangent vector at `base`: an n x d matrix whose columns are orthogonal to the
/// base's span.
class TangentVector {
 public:
  /// Throws kDimensionMismatch on shape mismatch and kInvalidArgument if the
  /// direction is not tangent within tolerance.
  TangentVector(Subspace base, Matrix direction,
                double tol = kDefaultGrassmannTolerances.tangency);

  const Subspace& base() const noexcept { return base_; }
  const Matrix& direction() const noexcept { return direction_; }
  double norm() const { return direction_.norm(); }

  TangentVector scaled(double factor) const;

 private:
  Subspace base_;
  Matrix direction_;
};

struct PrincipalAngles {
  /// d angles in [0, pi/2], ascending.
  std::vector<double> angles;
};

/// Orthonormal basis of the column space of M via Householder QR, with the
/// column signs chosen so that diag(R) > 0 (an orthonormal M maps to itself).
/// Throws kRankDeficient if sigma_d(M) <= rank_tol * sigma_1(M).
Subspace orthonormalize(const Matrix& m,
                        double rank_tol = kDefaultGrassmannTolerances.rank_tol);

PrincipalAngles principal_angles(const Subspace& u, const Subspace& v);

double chordal_distance(const Subspace& u, const Subspace& v);
/// Squared chordal distance tr(P_U^perp P_V), computed without cancellation.
double chordal_distance_squared(const Subspace& u, const Subspace& v);
double gap_distance(const Subspace& u, const Subspace& v);

Vector project(const Subspace& u, const Vector& x);
Vector complement_project(const Subspace& u, const Vector& x);
/// (I - U U^T) M for an n x k matrix M.
Matrix complement_project(const Subspace& u, const Matrix& m);

/// Tangent-space projection (I - U U^T) M.
TangentVector tangent_project(const Subspace& u, const Matrix& m);

/// Geodesic step Exp_U(scale * V). Only the nonzero singular values of the
/// scaled direction move the base; the result is re-orthonormalized.
Subspace exp_map(const TangentVector& v, double scale = 1.0);

/// Riemannian gradient of U -> d_2(U, V)^2 at `u`: -2 P_U^perp P_V U.
TangentVector squared_chordal_gradient(const Subspace& u, const Subspace& v);

}  // namespace great
