#include "phikrylov/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "phikrylov/errors.hpp"

namespace phikrylov {

CsrMatrix::CsrMatrix(Index n, std::vector<Index> row_offsets, std::vector<Index> col_indices,
                     std::vector<double> values, std::string name)
    : n_(n),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      name_(std::move(name)) {
  if (n_ < 0 || static_cast<Index>(row_offsets_.size()) != n_ + 1) {
    throw Error(ErrorCode::DimensionMismatch, "CsrMatrix: row offsets must have n+1 entries");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != static_cast<Index>(col_indices_.size()) ||
      col_indices_.size() != values_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "CsrMatrix: inconsistent array lengths");
  }
  for (Index i = 0; i < n_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) throw Error(ErrorCode::InvalidArgument, "CsrMatrix: offsets decrease");
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
      if (col_indices_[p] < 0 || col_indices_[p] >= n_) throw Error(ErrorCode::InvalidArgument, "CsrMatrix: column out of range");
      if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
        throw Error(ErrorCode::InvalidArgument, "CsrMatrix: columns not strictly increasing");
      }
      if (!std::isfinite(values_[p])) throw Error(ErrorCode::InvalidArgument, "CsrMatrix: non-finite value");
    }
  }
}

CsrMatrix CsrMatrix::from_triplets(Index n, std::vector<std::tuple<Index, Index, double>> triplets, std::string name) {
  for (const auto& [r, c, v] : triplets) {
    if (r < 0 || r >= n || c < 0 || c >= n) throw Error(ErrorCode::InvalidArgument, "from_triplets: index out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
  });
  std::vector<Index> offsets(static_cast<std::size_t>(n) + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (std::size_t p = 0; p < triplets.size(); ++p) {
    const auto& [r, c, v] = triplets[p];
    if (!cols.empty() && p > 0 && std::get<0>(triplets[p - 1]) == r && std::get<1>(triplets[p - 1]) == c) {
      vals.back() += v;
      continue;
    }
    cols.push_back(c);
    vals.push_back(v);
    offsets[static_cast<std::size_t>(r) + 1]++;
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  return CsrMatrix(n, std::move(offsets), std::move(cols), std::move(vals), std::move(name));
}

CsrMatrix CsrMatrix::from_dense(const Matrix& M, std::string name) {
  if (M.rows() != M.cols()) throw Error(ErrorCode::DimensionMismatch, "from_dense: matrix is not square");
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      if (M(i, j) != 0.0) trip.emplace_back(i, j, M(i, j));
  return from_triplets(M.rows(), std::move(trip), std::move(name));
}

void CsrMatrix::multiply(const Vector& x, Vector& y) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "matvec: vector length differs from n");
  y.resize(n_);
  for (Index i = 0; i < n_; ++i) {
    double acc = 0.0;
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) acc += values_[p] * x[col_indices_[p]];
    y[i] = acc;
  }
}

Matrix CsrMatrix::to_dense() const {
  Matrix M = Matrix::Zero(n_, n_);
  for (Index i = 0; i < n_; ++i)
    for (Index p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) M(i, col_indices_[p]) += values_[p];
  return M;
}

double CsrMatrix::norm1() const {
  std::vector<double> colsum(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t p = 0; p < values_.size(); ++p) colsum[col_indices_[p]] += std::abs(values_[p]);
  return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

Operator::Operator(CsrMatrix A) : n_(A.n()), csr_(std::make_shared<const CsrMatrix>(std::move(A))) {
  name_ = csr_->name();
}

Operator::Operator(Index n, ApplyFn apply, std::string name) : n_(n), fn_(std::move(apply)), name_(std::move(name)) {}

void Operator::apply(const Vector& x, Vector& y) const {
  if (x.size() != n_) throw Error(ErrorCode::DimensionMismatch, "matvec: vector length differs from n");
  if (csr_) {
    csr_->multiply(x, y);
  } else {
    y.resize(n_);
    fn_(x, y);
  }
}

double Operator::norm1_estimate() const {
  if (csr_) return csr_->norm1();
  if (n_ == 0) return 0.0;
  double est = 0.0;
  Vector x(n_), y(n_);
  for (int trial = 0; trial < 3; ++trial) {
    for (Index i = 0; i < n_; ++i) {
      const std::uint64_t h = (static_cast<std::uint64_t>(i) + 1) * 0x9E3779B97F4A7C15ull ^ (trial * 0xBF58476D1CE4E5B9ull);
      x[i] = trial == 0 ? 1.0 : ((h >> 33) & 1 ? 1.0 : -1.0);
    }
    apply(x, y);
    est = std::max(est, y.lpNorm<1>() / x.lpNorm<1>());
  }
  return est;
}

Matrix Operator::to_dense() const {
  if (csr_) return csr_->to_dense();
  Matrix M(n_, n_);
  Vector e = Vector::Zero(n_), y;
  for (Index j = 0; j < n_; ++j) {
    e[j] = 1.0;
    apply(e, y);
    M.col(j) = y;
    e[j] = 0.0;
  }
  return M;
}

Vector matvec(const Operator& A, const Vector& x, MatvecCounter* counter) {
  Vector y;
  A.apply(x, y);
  if (counter) counter->matvecs.fetch_add(1, std::memory_order_relaxed);
  return y;
}

struct ShiftedSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  bool direct = false;
};

ShiftedSolver::ShiftedSolver(const Operator& A, double gamma) : A_(A), gamma_(gamma), impl_(std::make_unique<Impl>()) {
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "ShiftedSolver: gamma must be positive");
  if (const CsrMatrix* csr = A.csr()) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(csr->nnz() + csr->n()));
    for (Index i = 0; i < csr->n(); ++i) {
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
      for (Index p = csr->row_offsets()[i]; p < csr->row_offsets()[i + 1]; ++p) {
        trip.emplace_back(static_cast<int>(i), static_cast<int>(csr->col_indices()[p]), gamma * csr->values()[p]);
      }
    }
    Eigen::SparseMatrix<double> S(csr->n(), csr->n());
    S.setFromTriplets(trip.begin(), trip.end());
    S.makeCompressed();
    impl_->lu.compute(S);
    if (impl_->lu.info() != Eigen::Success) throw Error(ErrorCode::SolveFailure, "ShiftedSolver: sparse LU failed");
    impl_->direct = true;
  }
}

ShiftedSolver::~ShiftedSolver() = default;
ShiftedSolver::ShiftedSolver(ShiftedSolver&&) noexcept = default;
ShiftedSolver& ShiftedSolver::operator=(ShiftedSolver&&) noexcept = default;

namespace {

// Restarted GMRES(m) on (I + gamma A).
Vector gmres_shifted(const Operator& A, double gamma, const Vector& b) {
  const Index n = b.size();
  const int m = 50;
  const double bnorm = b.norm();
  Vector x = Vector::Zero(n);
  if (bnorm == 0.0) return x;
  auto op = [&](const Vector& v) {
    Vector y;
    A.apply(v, y);
    return Vector(v + gamma * y);
  };
  double checkpoint = 1.0;
  for (int restart = 0; restart < 200; ++restart) {
    Vector r = b - op(x);
    double rnorm = r.norm();
    if (rnorm <= 1e-12 * bnorm) return x;
    Matrix V(n, m + 1);
    Matrix H = Matrix::Zero(m + 1, m);
    Vector cs = Vector::Zero(m), sn = Vector::Zero(m), g = Vector::Zero(m + 1);
    V.col(0) = r / rnorm;
    g[0] = rnorm;
    int j = 0;
    for (; j < m; ++j) {
      Vector w = op(V.col(j));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = V.col(i).dot(w);
          H(i, j) += hij;
          w -= hij * V.col(i);
        }
      }
      H(j + 1, j) = w.norm();
      if (H(j + 1, j) > 0) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double tmp = cs[i] * H(i, j) + sn[i] * H(i + 1, j);
        H(i + 1, j) = -sn[i] * H(i, j) + cs[i] * H(i + 1, j);
        H(i, j) = tmp;
      }
      const double denom = std::hypot(H(j, j), H(j + 1, j));
      cs[j] = H(j, j) / denom;
      sn[j] = H(j + 1, j) / denom;
      H(j, j) = denom;
      H(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      if (std::abs(g[j + 1]) <= 1e-12 * bnorm) {
        ++j;
        break;
      }
    }
    Vector yk = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += V.leftCols(j) * yk;
    const double rel = (b - op(x)).norm() / bnorm;
    if (rel <= 1e-12) return x;
    if (rel > 0.5 * checkpoint) throw Error(ErrorCode::SolveFailure, "GMRES stagnated: residual not halved over 50 iterations");
    checkpoint = rel;
  }
  throw Error(ErrorCode::SolveFailure, "GMRES: restart limit reached");
}

}  // namespace

Vector ShiftedSolver::solve(const Vector& b, MatvecCounter* counter) const {
  if (b.size() != A_.n()) throw Error(ErrorCode::DimensionMismatch, "si_solve: vector length differs from n");
  if (counter) counter->solves.fetch_add(1, std::memory_order_relaxed);
  if (!impl_->direct) return gmres_shifted(A_, gamma_, b);
  Vector x = impl_->lu.solve(b);
  const double bnorm = b.norm();
  for (int refine = 0; refine < 3; ++refine) {
    Vector Ax;
    A_.apply(x, Ax);
    const Vector r = b - x - gamma_ * Ax;
    if (r.norm() <= 1e-10 * bnorm) return x;
    x += impl_->lu.solve(r);
  }
  Vector Ax;
  A_.apply(x, Ax);
  if ((b - x - gamma_ * Ax).norm() > 1e-10 * bnorm) throw Error(ErrorCode::SolveFailure, "si_solve: residual above 1e-10");
  return x;
}

Vector si_solve(const ShiftedSolver& S, const Vector& b, MatvecCounter* counter) { return S.solve(b, counter); }

}  // namespace phikrylov
