#include "great/behavior.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace great {
namespace {

void check_shapes(const StateSpaceMatrices& s, Index k, Index m, Index p) {
  if (s.a.rows() != k || s.a.cols() != k || s.b.rows() != k || s.b.cols() != m ||
      s.c.rows() != p || s.c.cols() != k || s.d.rows() != p || s.d.cols() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "state-space matrices are not dimension-consistent");
  }
}

Matrix pinv(const Matrix& a, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  const double cutoff = s.size() > 0 ? rel_tol * s(0) : 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) inv(i) = 1.0 / s(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

class Tokens {
 public:
  explicit Tokens(std::istream& in) {
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens_.push_back(tok);
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }
  const std::string& peek() const {
    if (done()) fail("unexpected end of input");
    return tokens_[pos_];
  }
  std::string next() {
    const std::string& t = peek();
    ++pos_;
    return t;
  }
  void expect(const std::string& word) {
    const std::string t = next();
    if (t != word) fail("expected '" + word + "', got '" + t + "'");
  }
  long integer() {
    const std::string t = next();
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(t, &used);
    } catch (const std::exception&) {
      fail("expected integer, got '" + t + "'");
    }
    if (used != t.size()) fail("expected integer, got '" + t + "'");
    return v;
  }
  double real() {
    const std::string t = next();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      fail("expected number, got '" + t + "'");
    }
    if (used != t.size()) fail("expected number, got '" + t + "'");
    return v;
  }
  Matrix matrix(const std::string& name, Index rows, Index cols) {
    expect(name);
    Matrix out(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) out(i, j) = real();
    return out;
  }
  [[noreturn]] static void fail(const std::string& what) {
    throw Error(ErrorCode::kConfig, "ltv file: " + what);
  }

 private:
  std::vector<std::string> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

LtvSystem::LtvSystem(Kind kind, std::vector<StateSpaceMatrices> steps, long horizon)
    : kind_(kind), steps_(std::move(steps)), horizon_(horizon) {
  if (steps_.empty()) throw Error(ErrorCode::kInvalidArgument, "LTV system needs matrices");
  if (horizon_ < 1) throw Error(ErrorCode::kInvalidArgument, "LTV horizon must be >= 1");
  k_ = steps_.front().a.rows();
  m_ = steps_.front().b.cols();
  p_ = steps_.front().c.rows();
  for (const auto& s : steps_) check_shapes(s, k_, m_, p_);
}

LtvSystem LtvSystem::explicit_sequence(std::vector<StateSpaceMatrices> steps) {
  const long n = static_cast<long>(steps.size());
  return LtvSystem(Kind::kExplicit, std::move(steps), n);
}

LtvSystem LtvSystem::interpolate(StateSpaceMatrices first, StateSpaceMatrices last, long horizon) {
  return LtvSystem(Kind::kInterpolated, {std::move(first), std::move(last)}, horizon);
}

LtvSystem LtvSystem::constant(StateSpaceMatrices system, long horizon) {
  return LtvSystem(Kind::kConstant, {std::move(system)}, horizon);
}

StateSpaceMatrices LtvSystem::at(long t) const {
  if (t < 0 || t >= horizon_) {
    throw Error(ErrorCode::kHorizonExceeded,
                "time " + std::to_string(t) + " outside system horizon " + std::to_string(horizon_));
  }
  switch (kind_) {
    case Kind::kExplicit:
      return steps_[static_cast<std::size_t>(t)];
    case Kind::kConstant:
      return steps_.front();
    case Kind::kInterpolated: {
      const double w = horizon_ > 1 ? static_cast<double>(t) / static_cast<double>(horizon_ - 1) : 0.0;
      const auto& s0 = steps_[0];
      const auto& s1 = steps_[1];
      return {(1.0 - w) * s0.a + w * s1.a, (1.0 - w) * s0.b + w * s1.b,
              (1.0 - w) * s0.c + w * s1.c, (1.0 - w) * s0.d + w * s1.d};
    }
  }
  return steps_.front();
}

LtvSystem parse_ltv(std::istream& in) {
  Tokens tok(in);
  tok.expect("ltv");
  if (tok.integer() != 1) Tokens::fail("unsupported format version");
  tok.expect("dims");
  const long k = tok.integer();
  const long m = tok.integer();
  const long p = tok.integer();
  if (k < 0 || m < 1 || p < 1) Tokens::fail("dims need k >= 0, m >= 1, p >= 1");
  tok.expect("horizon");
  const long horizon = tok.integer();
  if (horizon < 1) Tokens::fail("horizon must be >= 1");

  std::string mode = "explicit";
  if (!tok.done() && (tok.peek() == "interpolate" || tok.peek() == "constant")) mode = tok.next();

  std::vector<StateSpaceMatrices> steps;
  while (!tok.done()) {
    tok.expect("step");
    StateSpaceMatrices s;
    s.a = tok.matrix("A", k, k);
    s.b = tok.matrix("B", k, m);
    s.c = tok.matrix("C", p, k);
    s.d = tok.matrix("D", p, m);
    steps.push_back(std::move(s));
  }

  if (mode == "interpolate") {
    if (steps.size() != 2) Tokens::fail("interpolated systems need exactly two step blocks");
    return LtvSystem::interpolate(std::move(steps[0]), std::move(steps[1]), horizon);
  }
  if (mode == "constant") {
    if (steps.size() != 1) Tokens::fail("constant systems need exactly one step block");
    return LtvSystem::constant(std::move(steps[0]), horizon);
  }
  if (static_cast<long>(steps.size()) != horizon) {
    Tokens::fail("expected " + std::to_string(horizon) + " step blocks, got " +
                 std::to_string(steps.size()));
  }
  return LtvSystem::explicit_sequence(std::move(steps));
}

LtvSystem load_ltv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open LTV file '" + path + "'");
  return parse_ltv(in);
}

Matrix hankel(const std::vector<Vector>& signal, Index depth) {
  const Index len = static_cast<Index>(signal.size());
  if (depth < 1 || len < depth) {
    throw Error(ErrorCode::kTooShort, "hankel: need len >= depth >= 1 (len " +
                                          std::to_string(len) + ", depth " +
                                          std::to_string(depth) + ")");
  }
  const Index q = signal.front().size();
  const Index cols = len - depth + 1;
  Matrix h(q * depth, cols);
  for (Index i = 0; i < depth; ++i) {
    for (Index j = 0; j < cols; ++j) {
      const Vector& s = signal[static_cast<std::size_t>(i + j)];
      if (s.size() != q) throw Error(ErrorCode::kDimensionMismatch, "hankel: ragged signal");
      h.block(i * q, j, q, 1) = s;
    }
  }
  return h;
}

Matrix observability_matrix(const LtvSystem& sys, long t, Index L) {
  const Index k = sys.state_dim();
  const Index p = sys.output_dim();
  Matrix o(p * (L + 1), k);
  Matrix phi = Matrix::Identity(k, k);  // A_{t+i-1} ... A_t
  for (Index i = 0; i <= L; ++i) {
    const StateSpaceMatrices s = sys.at(t + i);
    o.middleRows(i * p, p) = s.c * phi;
    phi = s.a * phi;
  }
  return o;
}

Matrix toeplitz_matrix(const LtvSystem& sys, long t, Index L) {
  const Index m = sys.input_dim();
  const Index p = sys.output_dim();
  Matrix tm = Matrix::Zero(p * (L + 1), m * (L + 1));
  // Column j: response to an impulse in v_{t+j}; state after the impulse is B_{t+j}.
  for (Index j = 0; j <= L; ++j) {
    const StateSpaceMatrices sj = sys.at(t + j);
    tm.block(j * p, j * m, p, m) = sj.d;
    Matrix x = sj.b;
    for (Index i = j + 1; i <= L; ++i) {
      const StateSpaceMatrices si = sys.at(t + i);
      tm.block(i * p, j * m, p, m) = si.c * x;
      x = si.a * x;
    }
  }
  return tm;
}

Subspace restricted_behavior(const LtvSystem& sys, long t, Index L) {
  if (L < 0) throw Error(ErrorCode::kInvalidArgument, "L must be >= 0");
  const Index k = sys.state_dim();
  const Index m = sys.input_dim();
  const Index p = sys.output_dim();
  const Matrix o = observability_matrix(sys, t, L);
  if (k > 0) {
    const Vector s = Eigen::JacobiSVD<Matrix>(o).singularValues();
    if (!(s(k - 1) > 1e-8 * s(0))) {
      throw Error(ErrorCode::kUnobservable,
                  "observability matrix over [" + std::to_string(t) + ", " +
                      std::to_string(t + L) + "] is rank deficient");
    }
  }
  const Index rv = m * (L + 1);
  const Index ry = p * (L + 1);
  Matrix lambda = Matrix::Zero(rv + ry, k + rv);
  lambda.block(0, k, rv, rv).setIdentity();
  lambda.block(rv, 0, ry, k) = o;
  lambda.block(rv, k, ry, rv) = toeplitz_matrix(sys, t, L);
  return orthonormalize(lambda);
}

std::vector<Vector> ltv_simulate(const LtvSystem& sys, const Vector& x0,
                                 const std::vector<Vector>& inputs, long t0,
                                 Vector* final_state) {
  if (x0.size() != sys.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial state length != k");
  }
  const long steps = static_cast<long>(inputs.size());
  if (t0 < 0 || (steps > 0 && t0 + steps > sys.horizon())) {
    throw Error(ErrorCode::kHorizonExceeded,
                "simulation over [" + std::to_string(t0) + ", " + std::to_string(t0 + steps) +
                    ") exceeds system horizon " + std::to_string(sys.horizon()));
  }
  std::vector<Vector> outputs;
  outputs.reserve(inputs.size());
  Vector x = x0;
  for (long i = 0; i < steps; ++i) {
    const Vector& v = inputs[static_cast<std::size_t>(i)];
    if (v.size() != sys.input_dim()) throw Error(ErrorCode::kDimensionMismatch, "input length != m");
    const StateSpaceMatrices s = sys.at(t0 + i);
    outputs.push_back(s.c * x + s.d * v);
    x = s.a * x + s.b * v;
  }
  if (final_state != nullptr) *final_state = x;
  return outputs;
}

Vector stack_sample(const std::vector<Vector>& v, const std::vector<Vector>& y, Index L) {
  const auto len = static_cast<std::size_t>(L + 1);
  if (L < 0 || v.size() != len || y.size() != len) {
    throw Error(ErrorCode::kLengthMismatch, "stack_sample: windows must hold L + 1 entries");
  }
  const Index m = v.front().size();
  const Index p = y.front().size();
  Vector u(static_cast<Index>(len) * (m + p));
  for (std::size_t i = 0; i < len; ++i) {
    if (v[i].size() != m || y[i].size() != p) {
      throw Error(ErrorCode::kDimensionMismatch, "stack_sample: ragged window");
    }
    u.segment(static_cast<Index>(i) * m, m) = v[i];
    u.segment(static_cast<Index>(len) * m + static_cast<Index>(i) * p, p) = y[i];
  }
  return u;
}

Vector Predictor::predict(const Vector& v_ini, const Vector& y_ini, const Vector& v_fut) const {
  if (v_ini.size() != input_dim * t_ini || y_ini.size() != output_dim * t_ini ||
      v_fut.size() != input_dim * t_fut) {
    throw Error(ErrorCode::kPartitionMismatch, "predictor input lengths do not match partition");
  }
  Vector z(m.cols());
  z << v_ini, y_ini, v_fut;
  return m * z;
}

Predictor predictor_from_subspace(const Subspace& est, Index input_dim, Index output_dim,
                                  Index t_ini, Index t_fut, double pinv_tol) {
  if (input_dim < 1 || output_dim < 1 || t_ini < 0 || t_fut < 1) {
    throw Error(ErrorCode::kPartitionMismatch, "predictor needs m, p, T_fut >= 1 and T_ini >= 0");
  }
  const Index len = t_ini + t_fut;
  if (est.ambient_dim() != (input_dim + output_dim) * len) {
    throw Error(ErrorCode::kPartitionMismatch,
                "subspace ambient dim " + std::to_string(est.ambient_dim()) +
                    " != (m + p)(T_ini + T_fut) = " +
                    std::to_string((input_dim + output_dim) * len));
  }
  const Matrix& u = est.basis();
  const Index d = est.dim();
  const Index mv_ini = input_dim * t_ini;
  const Index mv_fut = input_dim * t_fut;
  const Index py_ini = output_dim * t_ini;
  const Index py_fut = output_dim * t_fut;
  const Index y0 = input_dim * len;

  Matrix known(mv_ini + py_ini + mv_fut, d);
  known << u.middleRows(0, mv_ini), u.middleRows(y0, py_ini), u.middleRows(mv_ini, mv_fut);
  Predictor out;
  out.m = u.middleRows(y0 + py_ini, py_fut) * pinv(known, pinv_tol);
  out.input_dim = input_dim;
  out.output_dim = output_dim;
  out.t_ini = t_ini;
  out.t_fut = t_fut;
  return out;
}

double relative_prediction_error(const std::vector<Vector>& predicted,
                                 const std::vector<Vector>& reference) {
  if (predicted.size() != reference.size()) {
    throw Error(ErrorCode::kLengthMismatch, "prediction and reference lengths differ");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i].size() != reference[i].size()) {
      throw Error(ErrorCode::kLengthMismatch, "prediction and reference entries differ in size");
    }
    num += (predicted[i] - reference[i]).squaredNorm();
    den += reference[i].squaredNorm();
  }
  if (!(den > 0.0)) throw Error(ErrorCode::kZeroReference, "reference signal is identically zero");
  return std::sqrt(num / den);
}

}  // namespace great
