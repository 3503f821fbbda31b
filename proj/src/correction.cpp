#include "phikrylov/correction.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "phikrylov/errors.hpp"

namespace phikrylov {

namespace {

// Four-stage L-stable ESDIRK of order 3 with an embedded order-2 estimate (stiffly accurate).
const double kG = 1767732205903.0 / 4055673282236.0;
const double kA[4][4] = {
    {0.0, 0.0, 0.0, 0.0},
    {kG, kG, 0.0, 0.0},
    {2746238789719.0 / 10658868560708.0, -640167445237.0 / 6845629431997.0, kG, 0.0},
    {1471266399579.0 / 7840856788654.0, -4482444167858.0 / 7529755066697.0, 11266239266428.0 / 11593286722821.0, kG}};
const double kC[4] = {0.0, 2.0 * kG, 0.6, 1.0};
const double kBhat[4] = {2756255671327.0 / 12835298489170.0, -10771552573575.0 / 22201958757719.0,
                         9247589265047.0 / 10645013368117.0, 2193209047091.0 / 5459859503100.0};

struct Block {
  Index offset = 0;
  Index dim = 0;
  Matrix D;
  Vector f;
  Vector q;
  double a = 0.0;
  CMatrix U;
  CMatrix T;
  // For residual brackets of later cycles.
  Matrix hbar;
  Matrix xi;
  Vector chat;
  Vector n_vec;
};

class Stack {
 public:
  explicit Stack(const CorrectionSystem& sys) : ell_(sys.ell) {
    if (!(sys.t_end > 0.0)) throw Error(ErrorCode::InvalidArgument, "correction: t_end must be positive");
    if (sys.ell < 0) throw Error(ErrorCode::InvalidArgument, "correction: negative order");
    const Index k1 = sys.first.rows();
    if (k1 < 1 || sys.first.cols() != k1) throw Error(ErrorCode::DimensionMismatch, "correction: first block must be square");
    Block b1;
    b1.dim = k1;
    b1.D = sys.first;
    b1.f = Vector::Zero(k1);
    b1.q = Vector::Zero(k1);
    b1.q[k1 - 1] = -1.0;
    blocks_.push_back(std::move(b1));
    for (const CorrectionBlock& cb : sys.blocks) {
      const Index k = cb.hbar.cols();
      if (cb.hbar.rows() != k + 1 || cb.xi.rows() != k || cb.xi.cols() != k + 1 || cb.chat.size() != k + 1 ||
          cb.n_vec.size() != k + 1) {
        throw Error(ErrorCode::DimensionMismatch, "correction: inconsistent block shapes");
      }
      if (!cb.hbar.allFinite() || !cb.xi.allFinite()) throw Error(ErrorCode::InvalidArgument, "correction: non-finite block");
      Block b;
      b.dim = k;
      b.D = cb.xi * cb.hbar;
      b.f = cb.xi * cb.chat;
      const Matrix proj = Matrix::Identity(k + 1, k + 1) - Matrix::Identity(k + 1, k) * cb.xi;
      const Vector p = proj.transpose() * cb.n_vec / cb.n_vec.squaredNorm();
      b.a = p.dot(cb.chat);
      b.q = cb.hbar.transpose() * p;
      b.hbar = cb.hbar;
      b.xi = cb.xi;
      b.chat = cb.chat;
      b.n_vec = cb.n_vec;
      blocks_.push_back(std::move(b));
    }
    Index off = 0;
    for (Block& b : blocks_) {
      b.offset = off;
      off += b.dim;
      Eigen::ComplexSchur<Matrix> cs(b.D);
      if (cs.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "correction: Schur form failed");
      b.U = cs.matrixU();
      b.T = cs.matrixT();
    }
    dim_ = off;
    source_ = Vector::Zero(dim_);
    source_[0] = sys.beta;
  }

  Index dim() const { return dim_; }
  int ell() const { return ell_; }
  const Vector& source() const { return source_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  std::vector<double> rhos(const Vector& x) const {
    std::vector<double> rho(blocks_.size());
    double prev = 0.0;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const Block& b = blocks_[j];
      prev = b.a * prev - b.q.dot(x.segment(b.offset, b.dim));
      rho[j] = prev;
    }
    return rho;
  }

  void apply(const Vector& x, Vector& y) const {
    y.resize(dim_);
    double prev = 0.0;
    for (const Block& b : blocks_) {
      const auto xb = x.segment(b.offset, b.dim);
      y.segment(b.offset, b.dim) = b.D * xb - b.f * prev;
      prev = b.a * prev - b.q.dot(xb);
    }
  }

  // (alpha I + beta M) x = r by forward substitution over the blocks.
  void shifted_solve(double alpha, double beta, const Vector& r, Vector& x) const {
    x.resize(dim_);
    double prev = 0.0;
    for (const Block& b : blocks_) {
      const Vector rhs = r.segment(b.offset, b.dim) + beta * b.f * prev;
      CVector c = b.U.adjoint() * rhs.cast<Complex>();
      for (Index i = b.dim - 1; i >= 0; --i) {
        Complex s = c[i];
        for (Index j = i + 1; j < b.dim; ++j) s -= beta * b.T(i, j) * c[j];
        c[i] = s / (alpha + beta * b.T(i, i));
      }
      x.segment(b.offset, b.dim) = (b.U * c).real();
      prev = b.a * prev - b.q.dot(x.segment(b.offset, b.dim));
    }
  }

  double source_scale(double tau) const { return ell_ == 0 ? 0.0 : inv_factorial(ell_ - 1) / tau; }

  void rhs(double tau, const Vector& y, Vector& out) const {
    apply(y, out);
    out = -out;
    if (ell_ > 0) {
      out -= (static_cast<double>(ell_) / tau) * y;
      out += source_scale(tau) * source_;
    }
  }

 private:
  std::vector<Block> blocks_;
  Index dim_ = 0;
  int ell_ = 0;
  Vector source_;
};

CorrectionSolution finish(const Stack& st, const CorrectionSystem& sys, const Vector& y) {
  CorrectionSolution sol;
  Vector dy;
  st.rhs(sys.t_end, y, dy);
  const auto& blocks = st.blocks();
  sol.u = y.segment(0, blocks[0].dim);
  sol.rho = st.rhos(y);
  for (std::size_t j = 1; j < blocks.size(); ++j) {
    const Block& b = blocks[j];
    const Vector z = y.segment(b.offset, b.dim);
    sol.z.push_back(z);
    sol.dz.push_back(dy.segment(b.offset, b.dim));
    const Vector g = b.chat * sol.rho[j - 1] - b.hbar * z;
    Vector br = g;
    br.head(b.dim) -= b.xi * g;
    sol.brackets.push_back(br);
  }
  return sol;
}

}  // namespace

Index stacked_dimension(const CorrectionSystem& sys) {
  Index d = sys.first.rows();
  for (const auto& b : sys.blocks) d += b.hbar.cols();
  return d;
}

Matrix stacked_matrix(const CorrectionSystem& sys) {
  const Stack st(sys);
  Matrix M(st.dim(), st.dim());
  Vector e = Vector::Zero(st.dim()), y;
  for (Index j = 0; j < st.dim(); ++j) {
    e[j] = 1.0;
    st.apply(e, y);
    M.col(j) = y;
    e[j] = 0.0;
  }
  return M;
}

Vector singular_start(const CorrectionSystem& sys, double t0) {
  const Stack st(sys);
  const int ell = sys.ell;
  Vector y = Vector::Zero(st.dim());
  if (ell == 0) return st.source();
  const auto& blocks = st.blocks();
  const Index k1 = blocks[0].dim;
  Vector e1 = Vector::Zero(k1);
  e1[0] = sys.beta;
  y.head(k1) = e1 * inv_factorial(ell) - t0 * (blocks[0].D * e1) * inv_factorial(ell + 1);
  double rho0 = k1 == 1 ? sys.beta * inv_factorial(ell) : 0.0;
  for (std::size_t j = 1; j < blocks.size(); ++j) {
    const Block& b = blocks[j];
    y.segment(b.offset, b.dim) = t0 * b.f * rho0 / static_cast<double>(ell + 1);
    rho0 = b.a * rho0;
  }
  if (!y.allFinite()) throw Error(ErrorCode::SingularStart, "series start produced non-finite values");
  return y;
}

CorrectionSolution solve_correction(const CorrectionSystem& sys) {
  const Stack st(sys);
  const double t_end = sys.t_end;
  const int ell = sys.ell;
  double tau = ell == 0 ? 0.0 : 1e-8 * t_end;
  Vector y = singular_start(sys, tau);
  double h = ell == 0 ? 1e-6 * t_end : tau;
  Vector K[4], Y, base, err, ferr;
  st.rhs(tau, y, K[0]);
  double err_total = 0.0;
  long steps = 0, rejected = 0;
  while (tau < t_end) {
    const bool last = tau + h >= t_end || t_end - (tau + h) < 1e-12 * t_end;
    if (last) h = t_end - tau;
    if (h < 1e-15 * t_end) throw Error(ErrorCode::StiffFailure, "step size underflow in correction integrator");
    if (steps + rejected > 2000000) throw Error(ErrorCode::StiffFailure, "step limit reached in correction integrator");
    const double gh = kG * h;
    double alpha = 1.0;
    for (int i = 1; i < 4; ++i) {
      const double ti = i == 3 && last ? t_end : tau + kC[i] * h;
      base = y;
      for (int j = 0; j < i; ++j) base += (h * kA[i][j]) * K[j];
      Vector rhs = base;
      if (ell > 0) rhs += gh * st.source_scale(ti) * st.source();
      alpha = 1.0 + gh * ell / ti;
      st.shifted_solve(alpha, gh, rhs, Y);
      K[i] = (Y - base) / gh;
    }
    err.setZero(y.size());
    for (int j = 0; j < 4; ++j) err += (h * (kA[3][j] - kBhat[j])) * K[j];
    st.shifted_solve(alpha, gh, err, ferr);
    double en = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      const double sc = sys.atol + sys.rtol * std::max(std::abs(y[i]), std::abs(Y[i]));
      en = std::max(en, std::abs(ferr[i]) / sc);
    }
    if (!std::isfinite(en)) en = 1e10;
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -1.0 / 3.0), 0.2, 5.0);
    if (en <= 1.0) {
      tau = last ? t_end : tau + h;
      y = Y;
      K[0] = K[3];
      err_total += ferr.lpNorm<Eigen::Infinity>();
      ++steps;
      h *= fac;
    } else {
      ++rejected;
      h *= std::min(fac, 0.9);
    }
  }
  CorrectionSolution sol = finish(st, sys, y);
  sol.error_estimate = err_total;
  sol.steps = steps;
  sol.rejected = rejected;
  return sol;
}

CorrectionSolution solve_correction_exact(const CorrectionSystem& sys) {
  const Stack st(sys);
  const Matrix M = stacked_matrix(sys);
  const auto cols = phi_col(-sys.t_end * M, st.source(), sys.ell);
  return finish(st, sys, cols[static_cast<std::size_t>(sys.ell)]);
}

}  // namespace phikrylov
