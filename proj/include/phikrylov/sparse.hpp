#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

#include "phikrylov/dense.hpp"

namespace phikrylov {

/** @brief Square sparse matrix in compressed-row storage. */
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /** @brief Build from raw arrays; validates the structural invariants. */
  CsrMatrix(Index n, std::vector<Index> row_offsets, std::vector<Index> col_indices, std::vector<double> values,
            std::string name = {});

  /** @brief Build from (row, col, value) triplets; duplicates are summed, columns sorted. */
  static CsrMatrix from_triplets(Index n, std::vector<std::tuple<Index, Index, double>> triplets, std::string name = {});

  static CsrMatrix from_dense(const Matrix& M, std::string name = {});

  Index n() const { return n_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  const std::vector<Index>& row_offsets() const { return row_offsets_; }
  const std::vector<Index>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }
  const std::string& name() const { return name_; }

  /** @brief y = A x with left-to-right accumulation inside each row. */
  void multiply(const Vector& x, Vector& y) const;

  Matrix to_dense() const;
  double norm1() const;

 private:
  Index n_ = 0;
  std::vector<Index> row_offsets_{0};
  std::vector<Index> col_indices_;
  std::vector<double> values_;
  std::string name_;
};

/** @brief Counts operator applications; owned by the solver context, not the matrix. */
struct MatvecCounter {
  std::atomic<std::int64_t> matvecs{0};
  std::atomic<std::int64_t> solves{0};
};

/** @brief Either a CSR matrix or an apply-only linear map of dimension n. */
class Operator {
 public:
  using ApplyFn = std::function<void(const Vector&, Vector&)>;

  Operator() = default;
  explicit Operator(CsrMatrix A);
  Operator(Index n, ApplyFn apply, std::string name = {});

  Index n() const { return n_; }
  const std::string& name() const { return name_; }

  /** @brief Null for apply-only operators. */
  const CsrMatrix* csr() const { return csr_.get(); }

  void apply(const Vector& x, Vector& y) const;

  /** @brief Exact ||A||_1 for CSR, a power-free lower estimate otherwise. */
  double norm1_estimate() const;

  Matrix to_dense() const;

 private:
  Index n_ = 0;
  std::shared_ptr<const CsrMatrix> csr_;
  ApplyFn fn_;
  std::string name_;
};

/** @brief y = A x; increments counter->matvecs when a counter is given. */
Vector matvec(const Operator& A, const Vector& x, MatvecCounter* counter = nullptr);

/** @brief Solver for (I + gamma A) x = b. Sparse LU for CSR input, restarted GMRES otherwise. */
class ShiftedSolver {
 public:
  ShiftedSolver(const Operator& A, double gamma);
  ~ShiftedSolver();
  ShiftedSolver(ShiftedSolver&&) noexcept;
  ShiftedSolver& operator=(ShiftedSolver&&) noexcept;

  double gamma() const { return gamma_; }
  const Operator& op() const { return A_; }

  Vector solve(const Vector& b, MatvecCounter* counter = nullptr) const;

 private:
  struct Impl;
  Operator A_;
  double gamma_;
  std::unique_ptr<Impl> impl_;
};

Vector si_solve(const ShiftedSolver& S, const Vector& b, MatvecCounter* counter = nullptr);

CsrMatrix load_matrix_market(const std::string& path);
CsrMatrix parse_matrix_market(const std::string& text);
void write_matrix_market(const CsrMatrix& A, const std::string& path);
std::string format_matrix_market(const CsrMatrix& A);

/** @brief 5-point Dirichlet Laplacian on an N x N interior grid, times scale. Node (i,j) -> j*N+i. */
CsrMatrix gen_laplacian2d(Index N, double scale = 1.0);

struct AdvDiffProblem {
  CsrMatrix A;
  Vector u0;
};

/** @brief A with -A u = eps1 (u_xx + u_yy) - beta1 (u_x + u_y), central differences. */
AdvDiffProblem gen_advdiff2d(Index N, double eps1, double beta1);

/** @brief Negated gallery 'lesp' matrix of order n. */
CsrMatrix gen_lesp(Index n);

/** @brief g(x,y) = 30 x (1-x) y (1-y) sampled on the interior grid. */
Vector gen_rhs_poly(Index N);

}  // namespace phikrylov
