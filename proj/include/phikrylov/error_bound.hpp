#pragma once

#include <vector>

#include "phikrylov/arnoldi.hpp"
#include "phikrylov/dense.hpp"

namespace phikrylov {

/** @brief User-asserted sector {z : |arg(z - a)| <= theta} containing the numerical range of A. */
struct SectorAssumption {
  double a = 0.0;
  double theta = 1.5707963267948966;
  bool asserted = false;
};

/** @brief Default epsilon for the bounds: a/2 when a > 0, else 1. */
double default_epsilon(double a);

struct SpectrumClass {
  Index n_real = 0;          ///< k1 (or k2 for T_k)
  std::vector<double> r;     ///< r_j = ((eps + a_j)^2 + b_j^2)^{1/2}, one per eigenvalue
  std::vector<bool> is_real;
  double R = 0.0;            ///< max r_j
  double log_omega = 0.0;    ///< log of prod_j (r_j (eps + a_j))^{1/2}
};

/** @brief Split eigenvalues into real (|imag| <= 1e-10 (1+|value|)) and complex ones. */
SpectrumClass classify_spectrum(const std::vector<Complex>& values, double eps);

struct BoundInputs {
  double eps = 1.0;
  std::vector<Complex> eigenvalues;   ///< of H_k (Arnoldi) or T_k (harmonic)
  double log_subdiag_product = 0.0;   ///< log prod_{j<k} h_{j+1,j}
  int ell = 0;
  double t = 1.0;
  double ek_phi_e1 = 1.0;             ///< |e_k^T phi_l(-t P) e_1|, without beta
};

/** @brief Collect bound inputs from a single-cycle decomposition and its projected matrix. */
BoundInputs make_bound_inputs(const ArnoldiDecomp& D, const Matrix& projected, double t, int ell, double eps);

/** @brief log of c_{l,k} = exp(t eps) prod h_{j+1,j} / (pi (t eps)^l omega (eps + a) |e_k^T phi_l e_1|). */
double log_bound_prefactor(const BoundInputs& in, double a);

/** @brief Constant C with ||error|| <= C ||residual||, by quadrature of the resolvent integral. */
double bound_integral(const BoundInputs& in, double a);

/** @brief Quadrature-free constant c_{l,k} C_k. */
double bound_closed(const BoundInputs& in, double a);

/** @brief Necessary check for W(T_k) within the sector: every eigenvalue has real part >= a. */
bool harmonic_location_ok(const std::vector<Complex>& values, double a);

}  // namespace phikrylov
