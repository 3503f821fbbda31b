#include "phikrylov/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "phikrylov/errors.hpp"

namespace phikrylov {

namespace {

constexpr double kTiny = 1e-300;

void require_square(const Matrix& M, const char* who) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(who) + ": matrix is not square");
  }
}

bool all_finite(const Matrix& M) { return M.allFinite(); }

std::vector<Index> pair_conjugates(const CVector& values) {
  const Index n = values.size();
  std::vector<Index> partner(static_cast<std::size_t>(n), -1);
  for (Index j = 0; j < n; ++j) {
    const double im = values[j].imag();
    if (im == 0.0 || partner[j] != -1) continue;
    Index best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (i == j || partner[i] != -1 || values[i].imag() * im >= 0.0) continue;
      const double d = std::abs(values[i] - std::conj(values[j]));
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (best >= 0) {
      partner[j] = best;
      partner[best] = j;
    }
  }
  return partner;
}

}  // namespace

double inv_factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f /= i;
  return f;
}

Matrix lu_solve(const Matrix& M, const Matrix& B) {
  require_square(M, "lu_solve");
  if (B.rows() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "lu_solve: right-hand side rows");
  Eigen::PartialPivLU<Matrix> lu(M);
  const double scale = std::max(M.norm(), kTiny);
  const double pivot = M.rows() == 0 ? 1.0 : lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(pivot > 1e-14 * scale)) {
    throw Error(ErrorCode::SingularMatrix, "lu_solve: pivot below 1e-14*||M||_F");
  }
  return lu.solve(B);
}

EigenDecomp eig(const Matrix& M) {
  require_square(M, "eig");
  EigenDecomp out;
  if (M.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> es;
  es.setMaxIterations(std::max<Index>(30 * M.rows(), 30));
  es.compute(M, true);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eig: QR iteration did not converge");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  for (Index j = 0; j < out.vectors.cols(); ++j) {
    const double nrm = out.vectors.col(j).norm();
    if (nrm > 0) out.vectors.col(j) /= nrm;
  }
  out.partner = pair_conjugates(out.values);
  return out;
}

EigenDecomp hess_eig(const Matrix& H) {
  require_square(H, "hess_eig");
  const double tol = 1e-14 * H.norm();
  for (Index j = 0; j < H.cols(); ++j) {
    for (Index i = j + 2; i < H.rows(); ++i) {
      if (std::abs(H(i, j)) > tol) throw Error(ErrorCode::InvalidArgument, "hess_eig: matrix is not upper Hessenberg");
    }
  }
  return eig(H);
}

Matrix expm(const Matrix& M) {
  require_square(M, "expm");
  if (!all_finite(M)) throw Error(ErrorCode::Overflow, "expm: non-finite input");
  const double norm1 = M.cwiseAbs().colwise().sum().maxCoeff();
  if (M.rows() > 0 && norm1 > 1e8) throw Error(ErrorCode::Overflow, "expm: ||M||_1 exceeds 1e8");
  Matrix E = M.exp();
  if (!all_finite(E)) throw Error(ErrorCode::Overflow, "expm: result is not finite");
  return E;
}

std::vector<Vector> phi_col(const Matrix& M, const Vector& b, int s) {
  require_square(M, "phi_col");
  if (b.size() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "phi_col: vector length");
  if (s < 0) throw Error(ErrorCode::InvalidArgument, "phi_col: negative order");
  const Index n = M.rows();
  std::vector<Vector> out(static_cast<std::size_t>(s) + 1, Vector::Zero(n));
  const double nb = b.lpNorm<1>();
  if (n == 0 || nb == 0.0) return out;
  if (s == 0) {
    out[0] = expm(M) * b;
    return out;
  }
  Matrix aug = Matrix::Zero(n + s, n + s);
  aug.topLeftCorner(n, n) = M;
  aug.block(0, n, n, 1) = b / nb;
  for (int i = 0; i + 1 < s; ++i) aug(n + i, n + i + 1) = 1.0;
  const Matrix E = expm(aug);
  out[0] = E.topLeftCorner(n, n) * b;
  for (int ell = 1; ell <= s; ++ell) out[ell] = nb * E.block(0, n + ell - 1, n, 1);
  return out;
}

Vector phi_taylor_oracle(const Matrix& M, const Vector& b, int ell) {
  require_square(M, "phi_taylor_oracle");
  if (b.size() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "phi_taylor_oracle: vector length");
  Vector term = b * inv_factorial(ell);
  Vector acc = term;
  for (int m = 1; m < 2000; ++m) {
    term = (M * term) / static_cast<double>(m + ell);
    acc += term;
    const double tn = term.norm();
    if (tn < 1e-18 * acc.norm() || tn == 0.0) break;
  }
  return acc;
}

std::vector<Vector> phi_taylor_reference(const Matrix& M, const Vector& b, int s) {
  require_square(M, "phi_taylor_reference");
  if (b.size() != M.rows()) throw Error(ErrorCode::DimensionMismatch, "phi_taylor_reference: vector length");
  const Index n = M.rows();
  const Index m = n + std::max(s, 1);
  Matrix aug = Matrix::Zero(m, m);
  aug.topLeftCorner(n, n) = M;
  const double nb = b.lpNorm<1>();
  std::vector<Vector> out(static_cast<std::size_t>(s) + 1, Vector::Zero(n));
  if (n == 0 || nb == 0.0) return out;
  aug.block(0, n, n, 1) = b / nb;
  for (Index i = n; i + 1 < m; ++i) aug(i, i + 1) = 1.0;
  const double norm1 = aug.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Matrix X = aug / std::ldexp(1.0, squarings);
  Matrix E = Matrix::Identity(m, m);
  Matrix term = Matrix::Identity(m, m);
  for (int j = 1; j < 200; ++j) {
    term = term * X / static_cast<double>(j);
    E += term;
    if (term.norm() < 1e-18 * E.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) E = E * E;
  out[0] = E.topLeftCorner(n, n) * b;
  for (int ell = 1; ell <= s; ++ell) out[ell] = nb * E.block(0, n + ell - 1, n, 1);
  return out;
}

double phi_scalar(double z, int ell) {
  if (std::abs(z) < 2.0) {
    double term = inv_factorial(ell);
    double acc = term;
    for (int m = 1; m < 200; ++m) {
      term *= z / (m + ell);
      acc += term;
      if (std::abs(term) < 1e-18 * std::abs(acc)) break;
    }
    return acc;
  }
  double phi = std::exp(z);
  for (int j = 0; j < ell; ++j) phi = (phi - inv_factorial(j)) / z;
  return phi;
}

}  // namespace phikrylov
