#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phikrylov/arnoldi.hpp"
#include "phikrylov/dense.hpp"
#include "phikrylov/sparse.hpp"

namespace phikrylov {

enum class Method { Arnoldi, Harmonic, ShiftInvert, TRA, TRHA };

std::string method_name(Method m);
/** @brief Parses arnoldi|harmonic|si|tra|trha; throws InvalidArgument otherwise. */
Method parse_method(const std::string& name);
bool is_restarted(Method m);

struct PhiRequest {
  Operator A;
  Vector v;
  double t = 1.0;
  std::vector<int> ells{0};
  double tol = 1e-8;
  Index k = 30;
  Index q = 5;
  std::optional<double> gamma;  ///< defaults to 0.01 t
  int max_cycles = 100;
  bool record_cycles = false;     ///< keep per-cycle bases and residual coordinates
  bool exact_correction = false;  ///< closed-form correction instead of the integrator

  double shift() const { return gamma ? *gamma : 0.01 * t; }
};

/** @brief Single-cycle approximation for each requested order. */
struct PhiApprox {
  std::vector<int> ells;
  std::vector<Vector> coeffs;  ///< projected coefficients, y_l = V_k coeffs[l]
  std::vector<Vector> y;
  std::vector<double> rho;            ///< residual = V_{k+1} n_vec rho (Arnoldi, harmonic)
  std::vector<double> residual_norm;
  Vector n_vec;
  Matrix projected;  ///< H_k, T_k or B_k
};

/** @brief Per-cycle snapshot kept when PhiRequest::record_cycles is set. */
struct CycleRecord {
  int cycle = 0;
  Index k = 0;
  Index retained = 0;
  Matrix V;     ///< n x (k+1)
  Matrix Hbar;  ///< (k+1) x k
  Vector n_vec;
  std::vector<Vector> residual_coords;  ///< per order, residual = V residual_coords
  std::vector<Vector> coeffs;           ///< per order, cycle update = V_k coeffs
};

struct MethodReport {
  Method method = Method::Arnoldi;
  std::vector<int> ells;
  std::vector<std::vector<double>> residuals;  ///< [cycle][order index]
  std::vector<bool> converged;
  bool all_converged = false;
  bool max_cycles_exceeded = false;
  bool breakdown = false;
  int cycles = 0;
  std::int64_t matvecs = 0;
  std::int64_t solves = 0;
  double wall_ms = 0.0;
  double gamma = 0.0;
  Index k = 0;
  std::vector<Index> retained;     ///< q actually kept at each restart
  std::vector<Index> stack_dims;   ///< correction-system size at each restart
  std::vector<std::string> warnings;

  const std::vector<double>& final_residuals() const { return residuals.back(); }
};

struct PhiResult {
  MethodReport report;
  std::vector<Vector> solutions;  ///< ordered like report.ells
  ArnoldiDecomp decomp;           ///< last cycle's decomposition
  Matrix projected;               ///< projected matrix of the last cycle
  std::vector<CycleRecord> cycles;
};

/** @brief T_k = H + g e_k^T with g = gamma h^2 (I + gamma H)^{-T} e_k. */
Matrix build_Tk(const Matrix& H, double h_sub, double gamma);

PhiApprox arnoldi_phi_approx(const ArnoldiDecomp& D, double t, const std::vector<int>& ells);
PhiApprox harmonic_phi_approx(const ArnoldiDecomp& D, const Matrix& T, double t, const std::vector<int>& ells,
                              double gamma);
/** @brief Shift-and-invert approximation; spends one matvec on the residual norm factor. */
PhiApprox si_phi_approx(const ArnoldiDecomp& Dsi, const Operator& A, double t, const std::vector<int>& ells,
                        MatvecCounter* counter = nullptr);

PhiResult run_single_cycle(const PhiRequest& req, Method method);
PhiResult run_restarted(const PhiRequest& req, Method method);
PhiResult run_method(const PhiRequest& req, Method method);

/** @brief Sorted, de-duplicated orders; throws on negative entries or an empty list. */
std::vector<int> normalize_ells(std::vector<int> ells);

}  // namespace phikrylov
