#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "phikrylov/dense.hpp"
#include "phikrylov/sparse.hpp"

namespace phikrylov {

/**
 * @brief Arnoldi-like decomposition A V_k = V_{k+1} Hbar.
 *
 * V holds k+1 columns; after a breakdown the last column is zero and the last
 * row of Hbar vanishes. After a thick restart the leading block of Hbar is full.
 */
struct ArnoldiDecomp {
  Matrix V;
  Matrix Hbar;
  Index k = 0;
  double beta = 0.0;
  bool breakdown = false;
  Index breakdown_step = -1;
  double norm_estimate = 0.0;
  double shift = 0.0;  ///< gamma when this decomposes (I + gamma A)^{-1}, else 0

  Matrix H() const { return Hbar.topLeftCorner(k, k); }
  double h_sub() const { return Hbar(k, k - 1); }
  Matrix Vk() const { return V.leftCols(k); }
};

/** @brief Thick-restart data: the compressed basis that seeds the next cycle. */
struct RestartBasis {
  Matrix W;     ///< (k+1) x (q+1), orthonormal, in old-basis coordinates
  Matrix V;     ///< n x (q+1)
  Matrix Hbar;  ///< (q+1) x q
  Index q = 0;
  Vector n_vec;  ///< previous residual direction, old-basis coordinates
  std::vector<std::string> warnings;
};

/** @brief Start a decomposition from v (no operator applications). */
ArnoldiDecomp arnoldi_start(const Vector& v);

/** @brief Decomposition seeded from a restart basis. */
ArnoldiDecomp arnoldi_from_restart(const RestartBasis& rb);

/**
 * @brief Extend D to target_k steps with MGS plus one reorthogonalization pass.
 *
 * Breakdown is declared when h_{j+1,j} <= 1e-12 times the operator norm estimate.
 */
ArnoldiDecomp arnoldi_extend(const Operator& A, ArnoldiDecomp D, Index target_k, MatvecCounter* counter = nullptr);

/** @brief Arnoldi on (I + gamma A)^{-1}; one shifted solve per step. */
ArnoldiDecomp si_arnoldi(const ShiftedSolver& S, const Vector& v, Index k, MatvecCounter* counter = nullptr);

/** @brief w = [gamma h^2 (I + gamma H)^{-T} e_k; -h], spanning the null space of (Ibar + gamma Hbar)^T. */
Vector residual_direction(const Matrix& Hbar, double gamma);

/** @brief Unit null vector of (Ibar + gamma Hbar)^T computed by a full QR; sign matches residual_direction. */
Vector null_direction(const Matrix& Hbar, double gamma);

struct RitzSelection {
  Matrix vectors;  ///< k x q real columns (conjugate pairs split into real and imaginary parts)
  Index q = 0;
  std::vector<Complex> values;
};

/**
 * @brief Pick the q eigenpairs of smallest modulus (ties by smaller |imag|) and
 *        realify them. A pair that would be cut in half raises q by one if
 *        q+1 <= q_cap, otherwise it is dropped.
 */
RitzSelection select_ritz(const EigenDecomp& ed, Index q, Index q_cap);

/** @brief Compress a cycle to the retained vectors plus the residual direction. */
RestartBasis compress_restart(const ArnoldiDecomp& D, const Matrix& ritz_vectors, const Vector& n_vec);

/**
 * @brief Coordinates of the previous residual direction in the new basis,
 *        padded with zeros to length new_k + 1. Verifies the re-expansion.
 */
Vector c_vector(const RestartBasis& rb, const Matrix& V_prev, Index new_k);

}  // namespace phikrylov
