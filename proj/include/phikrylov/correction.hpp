#pragma once

#include <vector>

#include "phikrylov/dense.hpp"

namespace phikrylov {

/** @brief One restart cycle of the stacked correction system. */
struct CorrectionBlock {
  Matrix hbar;   ///< (k+1) x k
  Matrix xi;     ///< k x (k+1) oblique projector; Ibar^T for the Ritz variant
  Vector chat;   ///< previous residual direction in this cycle's basis, length k+1
  Vector n_vec;  ///< this cycle's residual direction, length k+1
};

/**
 * @brief Stacked linear system carrying the first-cycle projected solution and
 *        every later correction. Block j is driven by the residual scalar of block j-1.
 */
struct CorrectionSystem {
  Matrix first;  ///< projected matrix of cycle 1 (T_k or H_k)
  double beta = 1.0;
  std::vector<CorrectionBlock> blocks;  ///< cycles 2..J
  int ell = 0;
  double t_end = 1.0;
  double rtol = 1e-9;
  double atol = 1e-9;
};

struct CorrectionSolution {
  Vector u;                       ///< first-cycle coefficients at t_end
  std::vector<Vector> z;          ///< per later cycle, at t_end
  std::vector<Vector> dz;         ///< time derivative of each z at t_end
  std::vector<double> rho;        ///< residual scalar per cycle (index 0 is cycle 1)
  std::vector<Vector> brackets;   ///< residual coordinates per later cycle, length k+1 each
  double error_estimate = 0.0;    ///< accumulated local error estimate (weighted)
  long steps = 0;
  long rejected = 0;
};

/** @brief Total dimension of the stacked state. */
Index stacked_dimension(const CorrectionSystem& sys);

/** @brief Dense stacked matrix M with Y' = -(M + (l/t) I) Y + source/t. */
Matrix stacked_matrix(const CorrectionSystem& sys);

/** @brief Series start of the stacked state at t0 (l >= 1); exact initial state for l = 0. */
Vector singular_start(const CorrectionSystem& sys, double t0);

/** @brief Adaptive L-stable ESDIRK3(2) integration of the stacked system to t_end. */
CorrectionSolution solve_correction(const CorrectionSystem& sys);

/** @brief Closed-form solution phi_l(-t_end M) [beta e1; 0] via one dense exponential. */
CorrectionSolution solve_correction_exact(const CorrectionSystem& sys);

}  // namespace phikrylov
