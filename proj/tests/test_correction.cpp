#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "phikrylov/arnoldi.hpp"
#include "phikrylov/correction.hpp"

using namespace phikrylov;

namespace {

// A block shaped like a harmonic restart: xi = (I + g H)^{-T} (Ibar + g Hbar)^T, n_vec spans its null space.
CorrectionBlock harmonic_block(Index k, double g, std::mt19937_64& gen) {
  Matrix hbar = oracle::random_matrix(static_cast<int>(k + 1), static_cast<int>(k), gen);
  for (Index j = 0; j < k; ++j) {
    for (Index i = j + 2; i <= k; ++i) hbar(i, j) = 0.0;
    hbar(j, j) = 3.0 + std::abs(hbar(j, j));
    hbar(j + 1, j) = 0.5 + std::abs(hbar(j + 1, j));
  }
  Matrix ig = g * hbar;
  ig.topRows(k) += Matrix::Identity(k, k);
  const Matrix IgH = Matrix::Identity(k, k) + g * hbar.topRows(k);
  CorrectionBlock b;
  b.hbar = hbar;
  b.xi = IgH.transpose().partialPivLu().solve(ig.transpose());
  b.chat = oracle::random_vector(static_cast<int>(k + 1), gen);
  b.n_vec = residual_direction(hbar, g);
  return b;
}

Matrix stable_first(Index k, std::mt19937_64& gen) {
  Matrix P = oracle::random_matrix(static_cast<int>(k), static_cast<int>(k), gen);
  P += 3.0 * Matrix::Identity(k, k);
  return P;
}

std::vector<oracle::Block> as_oracle(const std::vector<CorrectionBlock>& blocks) {
  std::vector<oracle::Block> out;
  for (const auto& b : blocks) out.push_back({b.xi, b.hbar, b.chat, b.n_vec});
  return out;
}

// Scalar chain: first block is 1x1 zero, so u = beta / l! stays constant and drives one block.
CorrectionSystem scalar_chain(int ell, double beta) {
  CorrectionSystem sys;
  sys.first = Matrix::Zero(1, 1);
  sys.beta = beta;
  sys.ell = ell;
  CorrectionBlock b;
  b.hbar = Matrix::Zero(2, 1);
  b.xi = Matrix::Zero(1, 2);
  b.xi(0, 0) = 1.0;
  b.chat = Vector::Unit(2, 0);
  b.n_vec = Vector::Unit(2, 1);
  sys.blocks.push_back(b);
  return sys;
}

}  // namespace

TEST_CASE("zero source gives a zero correction") {
  std::mt19937_64 gen(1);
  CorrectionSystem sys;
  sys.first = stable_first(4, gen);
  sys.beta = 0.0;
  sys.ell = 1;
  sys.blocks.push_back(harmonic_block(4, 0.1, gen));
  const CorrectionSolution s = solve_correction(sys);
  CHECK(s.u.norm() == 0.0);
  CHECK(s.z[0].norm() == 0.0);
}

TEST_CASE("order 0, diagonal block, constant forcing") {
  const Index k = 4;
  Vector lam(k), f(k);
  lam << 0.5, 2.0, 10.0, 200.0;
  f << 1.0, -2.0, 0.5, 3.0;
  CorrectionSystem sys;
  sys.first = Matrix::Zero(1, 1);
  sys.beta = 1.0;
  sys.ell = 0;
  sys.t_end = 1.3;
  CorrectionBlock b;
  b.hbar = Matrix::Zero(k + 1, k);
  b.hbar.topRows(k) = lam.asDiagonal();
  b.xi = Matrix::Identity(k, k + 1);
  b.chat = Vector::Zero(k + 1);
  b.chat.head(k) = f;
  b.n_vec = Vector::Unit(k + 1, k);
  sys.blocks.push_back(b);
  const CorrectionSolution s = solve_correction(sys);
  for (Index i = 0; i < k; ++i) {
    const double ref = (1.0 - std::exp(-lam[i] * sys.t_end)) / lam[i] * f[i];
    CHECK(std::abs(s.z[0][i] - ref) <= 1e-8);
  }
}

TEST_CASE("singular start and scalar closed forms") {
  SUBCASE("z' = -z/t + 1 gives t/2") {
    const CorrectionSystem sys = scalar_chain(1, 1.0);
    const double t0 = 1e-8;
    const Vector y0 = singular_start(sys, t0);
    CHECK(y0.size() == stacked_dimension(sys));
    CHECK(y0[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(y0[1] == doctest::Approx(t0 / 2.0).epsilon(1e-12));
    const CorrectionSolution s = solve_correction(sys);
    CHECK(std::abs(s.z[0][0] - 0.5) <= 1e-9);
  }
  SUBCASE("order 2 with unit forcing gives t/3") {
    CorrectionSystem sys = scalar_chain(2, 2.0);
    sys.t_end = 2.5;
    const CorrectionSolution s = solve_correction(sys);
    CHECK(std::abs(s.z[0][0] - 2.5 / 3.0) <= 1e-9);
  }
  SUBCASE("zero forcing starts at zero") {
    const CorrectionSystem sys = scalar_chain(1, 0.0);
    CHECK(singular_start(sys, 1e-8).norm() == 0.0);
  }
}

TEST_CASE("two-block stack agrees with fixed-step RK4") {
  std::mt19937_64 gen(2);
  const Index k = 4;
  CorrectionSystem sys;
  sys.first = stable_first(k, gen);
  sys.beta = 1.7;
  sys.t_end = 1.0;
  sys.blocks.push_back(harmonic_block(k, 0.1, gen));
  sys.blocks.push_back(harmonic_block(k, 0.1, gen));
  for (int ell : {0, 1, 2}) {
    CAPTURE(ell);
    sys.ell = ell;
    const CorrectionSolution s = solve_correction(sys);
    const oracle::StackedState ref = oracle::rk4_stack(sys.first, sys.beta, as_oracle(sys.blocks), ell, sys.t_end, 200000);
    CHECK((s.u - ref.u).norm() <= 1e-7);
    for (std::size_t j = 0; j < 2; ++j) CHECK((s.z[j] - ref.z[j]).norm() <= 1e-7);
  }
}

TEST_CASE("brackets are colinear with the residual directions") {
  std::mt19937_64 gen(3);
  const Index k = 5;
  CorrectionSystem sys;
  sys.first = stable_first(k, gen);
  sys.beta = 1.0;
  sys.ell = 1;
  sys.t_end = 0.8;
  sys.blocks.push_back(harmonic_block(k, 0.05, gen));
  sys.blocks.push_back(harmonic_block(k, 0.05, gen));
  const CorrectionSolution s = solve_correction(sys);
  REQUIRE(s.brackets.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    const Vector& b = s.brackets[j];
    const Vector n = sys.blocks[j].n_vec.normalized();
    const Vector perp = b - n * n.dot(b);
    CHECK(perp.norm() <= 1e-8 * std::max(1.0, b.norm()));
    CHECK(s.rho[j + 1] * sys.blocks[j].n_vec.norm() == doctest::Approx(n.dot(b)).epsilon(1e-10));
  }
}

TEST_CASE("integrator agrees with the closed-form stacked exponential") {
  std::mt19937_64 gen(4);
  const Index k = 6;
  CorrectionSystem sys;
  sys.first = stable_first(k, gen);
  sys.beta = 2.0;
  sys.t_end = 2.0;
  for (int j = 0; j < 3; ++j) sys.blocks.push_back(harmonic_block(k, 0.02, gen));
  CHECK(stacked_dimension(sys) == 4 * k);
  for (int ell : {0, 1, 3}) {
    CAPTURE(ell);
    sys.ell = ell;
    const CorrectionSolution a = solve_correction(sys);
    const CorrectionSolution e = solve_correction_exact(sys);
    CHECK((a.u - e.u).norm() <= 1e-7 * std::max(1.0, e.u.norm()));
    for (std::size_t j = 0; j < sys.blocks.size(); ++j)
      CHECK((a.z[j] - e.z[j]).norm() <= 1e-7 * std::max(1.0, e.z[j].norm()));
  }
}
