#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "phikrylov/dense.hpp"
#include "phikrylov/errors.hpp"
#include "phikrylov/sparse.hpp"

using namespace phikrylov;

#ifndef PHIKRYLOV_TEST_DATA
#define PHIKRYLOV_TEST_DATA "tests/data"
#endif

namespace {

CsrMatrix random_csr(Index n, double density, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i == j || u(gen) < density) trip.emplace_back(i, j, 2.0 * u(gen) - 1.0);
  return CsrMatrix::from_triplets(n, trip);
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("matvec on identity and a 1-D stencil") {
  const CsrMatrix I = CsrMatrix::from_dense(Matrix::Identity(4, 4));
  const Vector x = Vector::LinSpaced(4, 1.0, 4.0);
  CHECK((matvec(Operator(I), x) - x).norm() == 0.0);
  Matrix T(3, 3);
  T << 2, -1, 0, -1, 2, -1, 0, -1, 2;
  const Vector y = matvec(Operator(CsrMatrix::from_dense(T)), Vector::Ones(3));
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 0.0);
  CHECK(y[2] == 1.0);
}

TEST_CASE("matvec matches a dense multiply with the same accumulation order") {
  std::mt19937_64 gen(1);
  const CsrMatrix A = random_csr(30, 0.2, gen);
  const Vector x = oracle::random_vector(30, gen);
  const Matrix D = A.to_dense();
  Vector ref = Vector::Zero(30);
  for (Index i = 0; i < 30; ++i)
    for (Index j = 0; j < 30; ++j)
      if (D(i, j) != 0.0) ref[i] += D(i, j) * x[j];
  CHECK((matvec(Operator(A), x) - ref).norm() == 0.0);
}

TEST_CASE("matvec counter and apply-only operators") {
  MatvecCounter c;
  const Operator op(3, [](const Vector& x, Vector& y) { y = 2.0 * x; });
  const Vector y = matvec(op, Vector::Ones(3), &c);
  CHECK(y[1] == 2.0);
  CHECK(c.matvecs.load() == 1);
  CHECK(code_of([&] { matvec(op, Vector::Ones(2)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("CSR construction validates input") {
  CHECK(code_of([] { CsrMatrix::from_triplets(2, {{0, 2, 1.0}}); }) == ErrorCode::InvalidArgument);
  const CsrMatrix A = CsrMatrix::from_triplets(2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, -1.0}});
  CHECK(A.to_dense()(0, 0) == 3.0);
  CHECK(A.norm1() == 4.0);
}

TEST_CASE("Matrix Market: diagonal coordinate file") {
  const CsrMatrix A = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 2\n1 1 1.0\n2 2 2.0\n");
  const Matrix D = A.to_dense();
  CHECK(D(0, 0) == 1.0);
  CHECK(D(1, 1) == 2.0);
  CHECK(D(0, 1) == 0.0);
}

TEST_CASE("Matrix Market: symmetric expansion, array format, integer field") {
  const CsrMatrix S = parse_matrix_market(
      "%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n1 1 4\n3 1 -1.5\n");
  const Matrix D = S.to_dense();
  CHECK(D(2, 0) == -1.5);
  CHECK(D(0, 2) == -1.5);
  CHECK(S.nnz() == 3);
  const CsrMatrix A = parse_matrix_market("%%MatrixMarket matrix array integer general\n2 2\n1\n0\n3\n4\n");
  const Matrix E = A.to_dense();
  CHECK(E(0, 0) == 1.0);
  CHECK(E(1, 0) == 0.0);
  CHECK(E(0, 1) == 3.0);
  CHECK(E(1, 1) == 4.0);
}

TEST_CASE("Matrix Market: errors") {
  CHECK(code_of([] { parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"); }) ==
        ErrorCode::UnsupportedField);
  CHECK(code_of([] { parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n1 1 1\n1 1\n"); }) ==
        ErrorCode::UnsupportedField);
  try {
    parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.line() == 3);
  }
  CHECK(code_of([] { parse_matrix_market("%%MatrixMarket matrix coordinate real general\n2 3 0\n"); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([] { load_matrix_market("/nonexistent/file.mtx"); }) == ErrorCode::ParseError);
}

TEST_CASE("Matrix Market round trip") {
  std::mt19937_64 gen(2);
  const CsrMatrix A = random_csr(25, 0.15, gen);
  const auto path = std::filesystem::temp_directory_path() / "phikrylov_roundtrip.mtx";
  write_matrix_market(A, path.string());
  const CsrMatrix B = load_matrix_market(path.string());
  std::filesystem::remove(path);
  CHECK(A.row_offsets() == B.row_offsets());
  CHECK(A.col_indices() == B.col_indices());
  CHECK(A.values() == B.values());
}

TEST_CASE("gen_laplacian2d stencil values") {
  const Matrix L1 = gen_laplacian2d(1, 1.0).to_dense();
  CHECK(L1.rows() == 1);
  CHECK(L1(0, 0) == doctest::Approx(16.0));
  const Matrix L2 = gen_laplacian2d(2, 1.0).to_dense();
  for (Index i = 0; i < 4; ++i) CHECK(L2(i, i) == doctest::Approx(36.0));
  CHECK(L2(0, 1) == doctest::Approx(-9.0));
  CHECK(L2(0, 2) == doctest::Approx(-9.0));
  CHECK(L2(0, 3) == 0.0);
}

TEST_CASE("gen_laplacian2d N=10 has the analytic Dirichlet spectrum") {
  const Index N = 10;
  const double h = 1.0 / (N + 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(gen_laplacian2d(N, 1.0).to_dense());
  std::vector<double> ref;
  for (Index i = 1; i <= N; ++i)
    for (Index j = 1; j <= N; ++j) {
      const double si = std::sin(i * std::numbers::pi * h / 2.0), sj = std::sin(j * std::numbers::pi * h / 2.0);
      ref.push_back(4.0 / (h * h) * (si * si + sj * sj));
    }
  std::sort(ref.begin(), ref.end());
  for (Index i = 0; i < N * N; ++i) CHECK(std::abs(es.eigenvalues()[i] - ref[i]) <= 1e-10 * ref.back());
}

TEST_CASE("gen_advdiff2d entries and initial vector") {
  const Matrix L = gen_laplacian2d(5, 0.02).to_dense();
  const Matrix A0 = gen_advdiff2d(5, 0.02, 0.0).A.to_dense();
  CHECK((L - A0).norm() == 0.0);

  const double eps1 = 0.02, beta1 = -0.02, h = 1.0 / 3.0;
  const AdvDiffProblem p = gen_advdiff2d(2, eps1, beta1);
  const Matrix A = p.A.to_dense();
  const double d = eps1 / (h * h), a = beta1 / (2.0 * h);
  CHECK(A(0, 0) == doctest::Approx(4.0 * d));
  CHECK(A(1, 0) == doctest::Approx(-d - a));  // west neighbour of node 1
  CHECK(A(0, 1) == doctest::Approx(-d + a));  // east neighbour of node 0
  CHECK(A(2, 0) == doctest::Approx(-d - a));  // south neighbour of node 2
  CHECK(A(0, 2) == doctest::Approx(-d + a));  // north neighbour of node 0
  // 256 (h h (1-h)(1-h))^2 + 0.3 at (h, h): 256 (4/81)^2 + 0.3
  CHECK(p.u0[0] == doctest::Approx(256.0 * (4.0 / 81.0) * (4.0 / 81.0) + 0.3).epsilon(1e-15));
  CHECK(p.u0[0] == doctest::Approx(0.924295).epsilon(1e-6));
}

TEST_CASE("gen_lesp matches the golden fixture and its structural properties") {
  const CsrMatrix golden = load_matrix_market(std::string(PHIKRYLOV_TEST_DATA) + "/lesp2.mtx");
  CHECK((gen_lesp(2).to_dense() - golden.to_dense()).norm() == 0.0);
  const CsrMatrix A = gen_lesp(20);
  CHECK(A.nnz() == 3 * 20 - 2);
  const EigenDecomp ed = hess_eig(A.to_dense());
  for (Index i = 0; i < 20; ++i) CHECK(std::abs(ed.values[i].imag()) <= 1e-8);
}

TEST_CASE("gen_rhs_poly values and symmetry") {
  CHECK(gen_rhs_poly(1)[0] == doctest::Approx(1.875));
  const Index N = 3;
  const Vector g = gen_rhs_poly(N);
  for (Index j = 0; j < N; ++j)
    for (Index i = 0; i < N; ++i) {
      const double x = (i + 1) / 4.0, y = (j + 1) / 4.0;
      CHECK(g[j * N + i] == doctest::Approx(30.0 * x * (1 - x) * y * (1 - y)));
      CHECK(g[j * N + i] == g[i * N + j]);
    }
}

TEST_CASE("si_solve closed forms and residual") {
  const Vector b = Vector::LinSpaced(4, 1.0, 4.0);
  const Operator zop(CsrMatrix::from_dense(Matrix::Zero(4, 4)));
  const ShiftedSolver zero(zop, 0.3);
  CHECK((si_solve(zero, b) - b).norm() <= 1e-15);

  Matrix D = Matrix::Zero(4, 4);
  D.diagonal() << 1.0, 2.0, 5.0, 10.0;
  const Operator dop(CsrMatrix::from_dense(D));
  const ShiftedSolver sd(dop, 0.5);
  const Vector x = si_solve(sd, b);
  for (Index i = 0; i < 4; ++i) CHECK(x[i] == doctest::Approx(b[i] / (1.0 + 0.5 * D(i, i))).epsilon(1e-14));

  std::mt19937_64 gen(3);
  const Matrix R = oracle::random_matrix(40, 40, gen);
  const Matrix spd = R * R.transpose() + Matrix::Identity(40, 40);
  const Operator op(CsrMatrix::from_dense(spd));
  const Vector rhs = oracle::random_vector(40, gen);
  MatvecCounter c;
  const ShiftedSolver s(op, 0.1);
  const Vector y = si_solve(s, rhs, &c);
  CHECK((y + 0.1 * spd * y - rhs).norm() <= 1e-10 * rhs.norm());
  CHECK(c.solves.load() == 1);
}

TEST_CASE("si_solve through the iterative path for apply-only operators") {
  Matrix D = Matrix::Zero(30, 30);
  for (Index i = 0; i < 30; ++i) D(i, i) = 1.0 + i;
  const Operator op(30, [D](const Vector& x, Vector& y) { y = D * x; });
  const ShiftedSolver s(op, 0.2);
  const Vector b = Vector::Ones(30);
  const Vector x = si_solve(s, b);
  CHECK((x + 0.2 * D * x - b).norm() <= 1e-10);
}
