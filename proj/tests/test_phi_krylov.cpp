#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "phikrylov/errors.hpp"
#include "phikrylov/phi_krylov.hpp"

using namespace phikrylov;

namespace {

Operator dense_op(const Matrix& A) { return Operator(CsrMatrix::from_dense(A)); }

Matrix random_hessenberg(Index k, std::mt19937_64& gen) {
  Matrix H = oracle::random_matrix(static_cast<int>(k), static_cast<int>(k), gen);
  for (Index j = 0; j < k; ++j)
    for (Index i = j + 2; i < k; ++i) H(i, j) = 0.0;
  return H;
}

Matrix random_sparse_dense(Index n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix A = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    A(i, i) = 2.0 + u(gen);
    for (Index j = 0; j < n; ++j)
      if (i != j && u(gen) < 0.1) A(i, j) = 0.5 * (2.0 * u(gen) - 1.0);
  }
  return A;
}

Matrix diag_matrix(std::initializer_list<double> d) {
  Matrix A = Matrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (double x : d) A(i, i) = x, ++i;
  return A;
}

}  // namespace

TEST_CASE("build_Tk closed forms") {
  std::mt19937_64 gen(1);
  const Matrix H = random_hessenberg(6, gen);
  CHECK((build_Tk(H, 0.0, 0.3) - H).norm() == 0.0);

  Matrix h1(1, 1);
  h1(0, 0) = 0.8;
  const double g = 0.05, h = 1.7;
  CHECK(build_Tk(h1, h, g)(0, 0) == doctest::Approx(0.8 + g * h * h / (1.0 + g * 0.8)).epsilon(1e-15));
}

TEST_CASE("build_Tk agrees with the (Q^-1 - I)/gamma construction") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Index k = 4 + trial;
    const Matrix H = random_hessenberg(k, gen);
    const double h = 0.5 + std::abs(oracle::random_vector(1, gen)[0]);
    const double g = 0.1 + 0.02 * trial;
    const Matrix IgH = Matrix::Identity(k, k) + g * H;
    Matrix M = IgH.transpose() * IgH;
    M(k - 1, k - 1) += g * g * h * h;
    const Matrix Q = M.inverse() * IgH.transpose();
    const Matrix ref = (Q.inverse() - Matrix::Identity(k, k)) / g;
    const Matrix T = build_Tk(H, h, g);
    CHECK((T - ref).norm() <= 1e-12 * std::max(1.0, ref.norm()));
    // only the last column changes
    CHECK((T.leftCols(k - 1) - H.leftCols(k - 1)).norm() == 0.0);
  }
}

TEST_CASE("build_Tk rejects a singular shift") {
  Matrix H(1, 1);
  H(0, 0) = -10.0;
  try {
    build_Tk(H, 1.0, 0.1);
    FAIL("expected SingularShift");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularShift);
  }
}

TEST_CASE("eigenvector start is exact for all single-cycle methods") {
  const Matrix A = diag_matrix({3.0, 1.0, 7.0, 0.5});
  const Operator op = dense_op(A);
  const std::vector<int> ells{0, 1, 2, 3};
  const double t = 0.7;
  for (Method m : {Method::Arnoldi, Method::Harmonic, Method::ShiftInvert, Method::TRA, Method::TRHA}) {
    CAPTURE(method_name(m));
    PhiRequest req;
    req.A = op;
    req.v = Vector::Unit(4, 0) * 2.0;
    req.t = t;
    req.ells = ells;
    req.k = 3;
    req.q = 1;
    const PhiResult r = run_method(req, m);
    CHECK(r.report.all_converged);
    for (std::size_t i = 0; i < ells.size(); ++i) {
      CHECK(r.solutions[i][0] == doctest::Approx(2.0 * oracle::phi(-t * 3.0, ells[i])).epsilon(1e-13));
      CHECK(r.solutions[i].tail(3).norm() <= 1e-14);
      CHECK(r.report.final_residuals()[i] <= 1e-12);
    }
  }
}

TEST_CASE("t = 0 and order 0 returns the starting vector") {
  std::mt19937_64 gen(3);
  const Matrix A = random_sparse_dense(20, gen);
  const Vector v = oracle::random_vector(20, gen);
  const ArnoldiDecomp D = arnoldi_extend(dense_op(A), arnoldi_start(v), 6);
  const PhiApprox p = arnoldi_phi_approx(D, 0.0, {0});
  CHECK((p.y[0] - v).norm() <= 1e-14 * v.norm());
  CHECK(p.residual_norm[0] <= 1e-14);
}

TEST_CASE("Arnoldi residual is orthogonal to the basis and has the stated norm") {
  std::mt19937_64 gen(4);
  const Matrix A = random_sparse_dense(50, gen);
  const Vector v = oracle::random_vector(50, gen);
  const ArnoldiDecomp D = arnoldi_extend(dense_op(A), arnoldi_start(v), 10);
  const double t = 0.5;
  const PhiApprox p = arnoldi_phi_approx(D, t, {0, 1, 2});
  for (std::size_t i = 0; i < 3; ++i) {
    const Vector r = D.V * (p.n_vec * p.rho[i]);
    CHECK((D.Vk().transpose() * r).norm() <= 1e-12 * std::max(1.0, r.norm()));
    CHECK(std::abs(r.norm() - p.residual_norm[i]) <= 1e-12 * std::max(1e-300, p.residual_norm[i]));
    const Vector ref = phi_col(-t * D.H(), D.beta * Vector::Unit(D.k, 0), 2)[i];
    CHECK(p.residual_norm[i] == doctest::Approx(std::abs(D.h_sub() * ref[D.k - 1])).epsilon(1e-12));
  }
}

TEST_CASE("harmonic approximation") {
  std::mt19937_64 gen(5);
  const Index n = 50;
  const Matrix A = random_sparse_dense(n, gen);
  const Vector v = oracle::random_vector(static_cast<int>(n), gen);
  const ArnoldiDecomp D = arnoldi_extend(dense_op(A), arnoldi_start(v), 10);
  const double t = 0.5;
  const std::vector<int> ells{0, 1, 2};

  SUBCASE("small shift approaches Arnoldi") {
    const double g = 1e-9;
    const PhiApprox a = arnoldi_phi_approx(D, t, ells);
    const PhiApprox h = harmonic_phi_approx(D, build_Tk(D.H(), D.h_sub(), g), t, ells, g);
    for (std::size_t i = 0; i < ells.size(); ++i) {
      CHECK((a.y[i] - h.y[i]).norm() <= 1e-7 * a.y[i].norm());
      CHECK(std::abs(a.residual_norm[i] - h.residual_norm[i]) <= 1e-6 * a.residual_norm[i]);
    }
  }
  SUBCASE("oblique Galerkin condition") {
    const double g = 0.05;
    const PhiApprox h = harmonic_phi_approx(D, build_Tk(D.H(), D.h_sub(), g), t, ells, g);
    const Matrix shifted = Matrix::Identity(n, n) + g * A;
    const double scale = shifted.cwiseAbs().colwise().sum().maxCoeff();
    for (std::size_t i = 0; i < ells.size(); ++i) {
      const Vector r = D.V * (h.n_vec * h.rho[i]);
      CHECK(std::abs(r.norm() - h.residual_norm[i]) <= 1e-12 * h.residual_norm[i]);
      CHECK(((shifted * D.Vk()).transpose() * r).norm() <= 1e-10 * r.norm() * scale);
    }
  }
}

TEST_CASE("shift-and-invert approximation") {
  SUBCASE("zero operator gives v / l!") {
    const Operator op = dense_op(Matrix::Zero(5, 5));
    const ShiftedSolver S(op, 0.2);
    const Vector v = Vector::LinSpaced(5, 1.0, 2.0);
    const ArnoldiDecomp Dsi = si_arnoldi(S, v, 3);
    const PhiApprox p = si_phi_approx(Dsi, op, 1.0, {0, 1, 2, 3});
    for (int l = 0; l <= 3; ++l) {
      CHECK((p.y[l] - v / oracle::fact(l)).norm() <= 1e-14);
      CHECK(p.residual_norm[l] <= 1e-14);
    }
  }
  SUBCASE("oblique orthogonality on a dense operator") {
    std::mt19937_64 gen(6);
    const Index n = 40;
    const double g = 0.1, t = 0.4;
    const Matrix A = random_sparse_dense(n, gen);
    const Operator op = dense_op(A);
    const ShiftedSolver S(op, g);
    const Vector v = oracle::random_vector(static_cast<int>(n), gen);
    const ArnoldiDecomp Dsi = si_arnoldi(S, v, 8);
    const PhiApprox p = si_phi_approx(Dsi, op, t, {0, 1});
    const Matrix shifted = Matrix::Identity(n, n) + g * A;
    const Matrix W = shifted.transpose().inverse() * Dsi.Vk();
    for (int l = 0; l <= 1; ++l) {
      // residual of the phi_l ODE at t, assembled from y and its exact time derivative
      const Matrix B = p.projected;
      const auto u = phi_col(-t * B, Dsi.beta * Vector::Unit(Dsi.k, 0), l + 1);
      Vector dudt;
      if (l == 0)
        dudt = -B * u[0];
      else
        dudt = (u[l - 1] - static_cast<double>(l) * u[l]) / t;
      const Vector y = Dsi.Vk() * u[l];
      Vector r = -A * y - Dsi.Vk() * dudt;
      if (l > 0) r += (-static_cast<double>(l) * y + v / oracle::fact(l - 1)) / t;
      CHECK((W.transpose() * r).norm() <= 1e-10 * std::max(1.0, r.norm()));
      CHECK(r.norm() == doctest::Approx(p.residual_norm[l]).epsilon(1e-8));
    }
  }
}

TEST_CASE("single cycle: shared basis and exactness") {
  SUBCASE("four orders from one decomposition") {
    const CsrMatrix L = gen_laplacian2d(8);
    PhiRequest req;
    req.A = Operator(L);
    req.v = gen_rhs_poly(8);
    req.ells = {0, 1, 2, 3};
    req.k = 12;
    for (Method m : {Method::Arnoldi, Method::Harmonic}) {
      const PhiResult r = run_single_cycle(req, m);
      CHECK(r.report.matvecs == 12);
      CHECK(r.solutions.size() == 4);
    }
  }
  SUBCASE("diagonal operator with few distinct eigenvalues") {
    const Operator op = dense_op(diag_matrix({1.0, 2.0, 2.0, 5.0, 5.0, 9.0}));
    PhiRequest req;
    req.A = op;
    req.v = Vector::Ones(6);
    req.ells = {0, 2};
    req.k = 5;
    const PhiResult r = run_single_cycle(req, Method::Arnoldi);
    for (double x : r.report.final_residuals()) CHECK(x <= 1e-12);
  }
  SUBCASE("Laplacian N=6 with k = n") {
    const CsrMatrix L = gen_laplacian2d(6);
    std::mt19937_64 gen(7);
    const Vector v = oracle::random_vector(36, gen);
    PhiRequest req;
    req.A = Operator(L);
    req.v = v;
    req.ells = {0, 1, 2, 3};
    req.k = 36;
    for (Method m : {Method::Arnoldi, Method::Harmonic}) {
      const PhiResult r = run_single_cycle(req, m);
      for (int l = 0; l <= 3; ++l) {
        const Vector ref = oracle::laplacian_phi(6, 1.0, 1.0, v, l);
        CHECK((r.solutions[l] - ref).norm() <= 1e-10 * ref.norm());
      }
    }
  }
}

TEST_CASE("restarted drivers") {
  SUBCASE("one cycle when the Krylov space is exhausted") {
    const Operator op = dense_op(diag_matrix({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}));
    PhiRequest req;
    req.A = op;
    req.v = Vector::Ones(7);
    req.ells = {0, 1};
    req.k = 7;
    req.q = 2;
    const PhiResult s = run_single_cycle(req, Method::Arnoldi);
    const PhiResult r = run_restarted(req, Method::TRA);
    CHECK(r.report.cycles == 1);
    for (int i = 0; i < 2; ++i) CHECK((r.solutions[i] - s.solutions[i]).norm() <= 1e-14 * s.solutions[i].norm());
  }
  SUBCASE("matvec accounting and convergence on a Laplacian") {
    const CsrMatrix L = gen_laplacian2d(20, 0.01);
    const Vector v = gen_rhs_poly(20);
    PhiRequest req;
    req.A = Operator(L);
    req.v = v;
    req.ells = {0, 1, 2};
    req.k = 10;
    req.q = 3;
    req.tol = 1e-8;
    for (Method m : {Method::TRA, Method::TRHA}) {
      CAPTURE(method_name(m));
      const PhiResult r = run_restarted(req, m);
      CHECK(r.report.all_converged);
      CHECK(r.report.cycles > 1);
      std::int64_t expect = req.k;
      for (Index q : r.report.retained) expect += req.k - q;
      CHECK(r.report.matvecs == expect);
      for (int l = 0; l <= 2; ++l) {
        const Vector ref = oracle::laplacian_phi(20, 0.01, 1.0, v, l);
        CHECK((r.solutions[l] - ref).norm() <= 1e-6 * ref.norm());
      }
    }
  }
  SUBCASE("cycle limit is reported") {
    const CsrMatrix L = gen_laplacian2d(20);
    PhiRequest req;
    req.A = Operator(L);
    req.v = gen_rhs_poly(20);
    req.ells = {0};
    req.k = 4;
    req.q = 1;
    req.tol = 1e-14;
    req.max_cycles = 2;
    const PhiResult r = run_restarted(req, Method::TRHA);
    CHECK(r.report.max_cycles_exceeded);
    CHECK(r.report.cycles == 2);
    CHECK_FALSE(r.report.all_converged);
  }
}

TEST_CASE("request validation") {
  CHECK(parse_method("trha") == Method::TRHA);
  CHECK(normalize_ells({3, 0, 3, 1}) == std::vector<int>{0, 1, 3});
  try {
    normalize_ells({-1});
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  try {
    parse_method("lanczos");
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
}
