#pragma once

// Behavioral view of linear time-varying systems: Hankel matrices, restricted
// behaviors as subspaces of stacked input/output windows, and the subspace
// predictor used to score an estimate.
//
// Sample layout: a length-(L+1) trajectory is stacked as
//   [v_{t-L}; ...; v_t; y_{t-L}; ...; y_t]
// i.e. the whole input block first, then the whole output block, each ordered
// oldest to newest.

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "great/grassmann.hpp"

namespace great {

struct StateSpaceMatrices {
  Matrix a;  // k x k
  Matrix b;  // k x m
  Matrix c;  // p x k
  Matrix d;  // p x m
};

class LtvSystem {
 public:
  static constexpr long kUnbounded = std::numeric_limits<long>::max();

  /// One matrix set per time step; horizon = steps.size().
  static LtvSystem explicit_sequence(std::vector<StateSpaceMatrices> steps);
  /// Element-wise linear interpolation from `first` at t = 0 to `last` at
  /// t = horizon - 1.
  static LtvSystem interpolate(StateSpaceMatrices first, StateSpaceMatrices last, long horizon);
  /// Time-invariant system, valid for every t >= 0 up to `horizon`.
  static LtvSystem constant(StateSpaceMatrices system, long horizon = kUnbounded);

  Index state_dim() const noexcept { return k_; }
  Index input_dim() const noexcept { return m_; }
  Index output_dim() const noexcept { return p_; }
  long horizon() const noexcept { return horizon_; }

  /// Matrices at time t. Throws kHorizonExceeded outside [0, horizon).
  StateSpaceMatrices at(long t) const;

 private:
  enum class Kind { kExplicit, kInterpolated, kConstant };

  LtvSystem(Kind kind, std::vector<StateSpaceMatrices> steps, long horizon);

  Kind kind_;
  std::vector<StateSpaceMatrices> steps_;
  long horizon_;
  Index k_ = 0, m_ = 0, p_ = 0;
};

/// Parses the text format
///   ltv 1
///   dims <k> <m> <p>
///   horizon <N>
///   [interpolate | constant]
///   step  A <k*k values> B <k*m> C <p*k> D <p*m>     (repeated)
/// Values are row-major and may span lines; '#' starts a comment. Explicit
/// files carry N step blocks, interpolated files two, constant files one.
/// Throws kConfig on malformed input.
LtvSystem parse_ltv(std::istream& in);
LtvSystem load_ltv(const std::string& path);

/// Block Hankel matrix with block (i, j) = signal[i + j], of size
/// (q * depth) x (len - depth + 1). Throws kTooShort unless len >= depth >= 1.
Matrix hankel(const std::vector<Vector>& signal, Index depth);

/// Extended observability matrix [C_t; C_{t+1} A_t; ...] over [t, t + L].
Matrix observability_matrix(const LtvSystem& sys, long t, Index L);

/// Block lower-triangular input-to-output map over [t, t + L].
Matrix toeplitz_matrix(const LtvSystem& sys, long t, Index L);

/// Orthonormal basis of the behavior restricted to [t, t + L], spanned by
/// [[0, I]; [O, T]] in the stacked sample layout; dim = k + m (L + 1).
/// Throws kUnobservable if sigma_k(O) <= 1e-8 sigma_1(O).
Subspace restricted_behavior(const LtvSystem& sys, long t, Index L);

/// Simulates x_{t+1} = A_t x_t + B_t v_t, y_t = C_t x_t + D_t v_t from time t0.
/// Throws kHorizonExceeded if t0 + inputs.size() exceeds the system horizon.
std::vector<Vector> ltv_simulate(const LtvSystem& sys, const Vector& x0,
                                 const std::vector<Vector>& inputs, long t0 = 0,
                                 Vector* final_state = nullptr);

/// [v_0; ...; v_L; y_0; ...; y_L]. Throws kLengthMismatch unless both windows
/// hold L + 1 entries.
Vector stack_sample(const std::vector<Vector>& v, const std::vector<Vector>& y, Index L);

struct Predictor {
  Matrix m;  // (p T_fut) x (m T_ini + p T_ini + m T_fut)
  Index input_dim = 0;
  Index output_dim = 0;
  Index t_ini = 0;
  Index t_fut = 0;

  /// y_fut estimate from stacked v_ini (m T_ini), y_ini (p T_ini) and v_fut (m T_fut).
  Vector predict(const Vector& v_ini, const Vector& y_ini, const Vector& v_fut) const;
};

/// M = U^{y_fut} pinv([U^{v_ini}; U^{y_ini}; U^{v_fut}]) with the pseudoinverse
/// truncated at relative singular value `pinv_tol`. Throws kPartitionMismatch
/// unless n = (m + p)(T_ini + T_fut).
Predictor predictor_from_subspace(const Subspace& est, Index input_dim, Index output_dim,
                                  Index t_ini, Index t_fut, double pinv_tol = 1e-10);

/// sqrt(sum |yhat - y|^2 / sum |y|^2). Throws kLengthMismatch or kZeroReference.
double relative_prediction_error(const std::vector<Vector>& predicted,
                                 const std::vector<Vector>& reference);

}  // namespace great
