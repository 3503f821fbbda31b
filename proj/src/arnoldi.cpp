#include "phikrylov/arnoldi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "phikrylov/errors.hpp"

namespace phikrylov {

namespace {

using ApplyStep = std::function<Vector(const Vector&)>;

ArnoldiDecomp extend_core(const ApplyStep& apply, ArnoldiDecomp D, Index target_k, double fixed_norm) {
  const Index n = D.V.rows();
  if (target_k > n) throw Error(ErrorCode::InvalidArgument, "arnoldi_extend: target_k exceeds n");
  if (D.V.cols() < 1) throw Error(ErrorCode::InvalidArgument, "arnoldi_extend: decomposition has no columns");
  if (D.breakdown || target_k <= D.k) return D;
  D.V.conservativeResizeLike(Matrix::Zero(n, target_k + 1));
  D.Hbar.conservativeResizeLike(Matrix::Zero(target_k + 1, target_k));
  if (fixed_norm > 0) D.norm_estimate = fixed_norm;
  for (Index j = D.k; j < target_k; ++j) {
    Vector w = apply(D.V.col(j));
    if (fixed_norm <= 0) D.norm_estimate = std::max(D.norm_estimate, w.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i <= j; ++i) {
        const double h = D.V.col(i).dot(w);
        D.Hbar(i, j) += h;
        w -= h * D.V.col(i);
      }
    }
    const double hn = w.norm();
    if (hn <= 1e-12 * D.norm_estimate) {
      D.k = j + 1;
      D.breakdown = true;
      D.breakdown_step = j + 1;
      D.V.conservativeResize(n, D.k + 1);
      D.V.col(D.k).setZero();
      D.Hbar.conservativeResize(D.k + 1, D.k);
      D.Hbar.row(D.k).setZero();
      return D;
    }
    D.Hbar(j + 1, j) = hn;
    D.V.col(j + 1) = w / hn;
  }
  D.k = target_k;
  return D;
}

}  // namespace

ArnoldiDecomp arnoldi_start(const Vector& v) {
  ArnoldiDecomp D;
  D.beta = v.norm();
  if (!(D.beta > 0.0) || !std::isfinite(D.beta)) throw Error(ErrorCode::InvalidArgument, "starting vector must be nonzero and finite");
  D.V = v / D.beta;
  D.Hbar = Matrix::Zero(1, 0);
  return D;
}

ArnoldiDecomp arnoldi_from_restart(const RestartBasis& rb) {
  ArnoldiDecomp D;
  D.V = rb.V;
  D.Hbar = rb.Hbar;
  D.k = rb.q;
  D.beta = 0.0;
  return D;
}

ArnoldiDecomp arnoldi_extend(const Operator& A, ArnoldiDecomp D, Index target_k, MatvecCounter* counter) {
  if (D.V.rows() != A.n()) throw Error(ErrorCode::DimensionMismatch, "arnoldi_extend: basis rows differ from n");
  const double norm = A.csr() ? A.norm1_estimate() : 0.0;
  return extend_core([&](const Vector& x) { return matvec(A, x, counter); }, std::move(D), target_k, norm);
}

ArnoldiDecomp si_arnoldi(const ShiftedSolver& S, const Vector& v, Index k, MatvecCounter* counter) {
  ArnoldiDecomp D = arnoldi_start(v);
  D.shift = S.gamma();
  return extend_core([&](const Vector& x) { return S.solve(x, counter); }, std::move(D), k, 0.0);
}

Vector residual_direction(const Matrix& Hbar, double gamma) {
  const Index k = Hbar.cols();
  if (k < 1 || Hbar.rows() != k + 1) throw Error(ErrorCode::DimensionMismatch, "residual_direction: Hbar must be (k+1) x k");
  const double h = Hbar(k, k - 1);
  Vector w(k + 1);
  if (gamma == 0.0) {
    w.head(k).setZero();
  } else {
    const Matrix M = Matrix::Identity(k, k) + gamma * Hbar.topRows(k);
    Vector ek = Vector::Zero(k);
    ek[k - 1] = 1.0;
    try {
      w.head(k) = gamma * h * h * lu_solve(M.transpose(), ek);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
      throw Error(ErrorCode::SingularShift, "I + gamma H_k is singular");
    }
  }
  w[k] = -h;
  return w;
}

Vector null_direction(const Matrix& Hbar, double gamma) {
  const Index k = Hbar.cols();
  if (Hbar.rows() != k + 1) throw Error(ErrorCode::DimensionMismatch, "null_direction: Hbar must be (k+1) x k");
  Matrix B = gamma * Hbar;
  B.topRows(k) += Matrix::Identity(k, k);
  Eigen::HouseholderQR<Matrix> qr(B);
  const Matrix Q = qr.householderQ();
  Vector nv = Q.col(k);
  if (nv[k] > 0) nv = -nv;
  return nv;
}

RitzSelection select_ritz(const EigenDecomp& ed, Index q, Index q_cap) {
  const Index m = ed.values.size();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double ma = std::abs(ed.values[a]), mb = std::abs(ed.values[b]);
    if (ma != mb) return ma < mb;
    return std::abs(ed.values[a].imag()) < std::abs(ed.values[b].imag());
  });
  RitzSelection sel;
  std::vector<Vector> cols;
  std::vector<bool> used(static_cast<std::size_t>(m), false);
  Index want = std::min(q, m);
  for (Index idx : order) {
    if (static_cast<Index>(cols.size()) >= want) break;
    if (used[idx]) continue;
    used[idx] = true;
    const Index p = ed.partner[idx];
    if (p < 0) {
      cols.push_back(ed.vectors.col(idx).real());
      sel.values.push_back(ed.values[idx]);
      continue;
    }
    used[p] = true;
    if (static_cast<Index>(cols.size()) + 2 > want) {
      if (want + 1 <= q_cap) {
        ++want;
      } else {
        want = static_cast<Index>(cols.size());
        break;
      }
    }
    cols.push_back(ed.vectors.col(idx).real());
    cols.push_back(ed.vectors.col(idx).imag());
    sel.values.push_back(ed.values[idx]);
    sel.values.push_back(ed.values[p]);
  }
  const Index rows = ed.vectors.rows();
  sel.vectors.resize(rows, static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) sel.vectors.col(static_cast<Index>(j)) = cols[j];
  sel.q = sel.vectors.cols();
  return sel;
}

RestartBasis compress_restart(const ArnoldiDecomp& D, const Matrix& ritz_vectors, const Vector& n_vec) {
  const Index k = D.k;
  if (ritz_vectors.rows() != k || n_vec.size() != k + 1) throw Error(ErrorCode::DimensionMismatch, "compress_restart: shapes");
  if (ritz_vectors.cols() + 1 > k) throw Error(ErrorCode::InvalidArgument, "compress_restart: q+1 must not exceed k");
  RestartBasis rb;
  rb.n_vec = n_vec;
  std::vector<Vector> basis;
  for (Index j = 0; j < ritz_vectors.cols(); ++j) {
    Vector x = ritz_vectors.col(j);
    const double orig = x.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const Vector& b : basis) x -= b.dot(x) * b;
    const double nrm = x.norm();
    if (!(orig > 0.0) || nrm <= 1e-12 * orig) {
      rb.warnings.push_back("RankDeficient: retained vector " + std::to_string(j) + " dropped");
      continue;
    }
    basis.push_back(x / nrm);
  }
  const Index q = static_cast<Index>(basis.size());
  rb.q = q;
  rb.W = Matrix::Zero(k + 1, q + 1);
  for (Index j = 0; j < q; ++j) rb.W.col(j).head(k) = basis[static_cast<std::size_t>(j)];
  Vector last = n_vec / n_vec.norm();
  for (int pass = 0; pass < 2; ++pass) last -= rb.W.leftCols(q) * (rb.W.leftCols(q).transpose() * last);
  const double ln = last.norm();
  if (!(ln > 1e-12)) throw Error(ErrorCode::BasisMismatch, "compress_restart: residual direction lies in the retained span");
  rb.W.col(q) = last / ln;
  rb.Hbar = rb.W.transpose() * D.Hbar * rb.W.topLeftCorner(k, q);
  rb.V = D.V.leftCols(k + 1) * rb.W;
  return rb;
}

Vector c_vector(const RestartBasis& rb, const Matrix& V_prev, Index new_k) {
  const Index q1 = rb.W.cols();
  if (new_k + 1 < q1) throw Error(ErrorCode::DimensionMismatch, "c_vector: new basis smaller than restart basis");
  Vector c = Vector::Zero(new_k + 1);
  c.head(q1) = rb.W.transpose() * rb.n_vec;
  const Vector old_vec = V_prev * rb.n_vec;
  const Vector new_vec = rb.V * c.head(q1);
  if ((new_vec - old_vec).norm() > 1e-10 * std::max(rb.n_vec.norm(), 1e-300)) {
    throw Error(ErrorCode::BasisMismatch, "c_vector: previous residual is not reproduced by the new basis");
  }
  return c;
}

}  // namespace phikrylov
