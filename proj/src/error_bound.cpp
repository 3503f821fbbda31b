#include "phikrylov/error_bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "phikrylov/errors.hpp"

namespace phikrylov {

double default_epsilon(double a) { return a > 0.0 ? a / 2.0 : 1.0; }

SpectrumClass classify_spectrum(const std::vector<Complex>& values, double eps) {
  SpectrumClass sc;
  double log_omega = 0.0;
  for (const Complex& mu : values) {
    const bool real = std::abs(mu.imag()) <= 1e-10 * (1.0 + std::abs(mu));
    const double ea = eps + mu.real();
    const double b = real ? 0.0 : mu.imag();
    const double r = std::hypot(ea, b);
    sc.is_real.push_back(real);
    sc.r.push_back(r);
    if (real) ++sc.n_real;
    sc.R = std::max(sc.R, r);
    log_omega += 0.5 * (std::log(r) + std::log(ea));
  }
  sc.log_omega = log_omega;
  return sc;
}

BoundInputs make_bound_inputs(const ArnoldiDecomp& D, const Matrix& projected, double t, int ell, double eps) {
  BoundInputs in;
  in.eps = eps;
  in.ell = ell;
  in.t = t;
  const Index k = projected.rows();
  const EigenDecomp ed = eig(projected);
  in.eigenvalues.assign(ed.values.data(), ed.values.data() + ed.values.size());
  double lp = 0.0;
  for (Index j = 0; j + 1 < k; ++j) lp += std::log(std::abs(D.Hbar(j + 1, j)));
  in.log_subdiag_product = lp;
  Vector e1 = Vector::Zero(k);
  e1[0] = 1.0;
  const auto cols = phi_col(-t * projected, e1, ell);
  in.ek_phi_e1 = std::abs(cols[static_cast<std::size_t>(ell)][k - 1]);
  return in;
}

namespace {

void check_assumptions(const BoundInputs& in, double a) {
  if (!(in.eps > 0.0)) throw Error(ErrorCode::AssumptionViolated, "epsilon must be positive");
  if (!(a >= 0.0)) throw Error(ErrorCode::AssumptionViolated, "sector vertex a must be non-negative");
  if (!(in.t > 0.0)) throw Error(ErrorCode::AssumptionViolated, "t must be positive");
  for (const Complex& mu : in.eigenvalues) {
    if (!(in.eps + mu.real() > 0.0)) {
      throw Error(ErrorCode::AssumptionViolated, "eps + Re(eigenvalue) <= 0 for a projected eigenvalue");
    }
  }
}

}  // namespace

double log_bound_prefactor(const BoundInputs& in, double a) {
  const SpectrumClass sc = classify_spectrum(in.eigenvalues, in.eps);
  const double te = in.t * in.eps;
  return te - std::log(std::numbers::pi) - in.ell * std::log(te) - sc.log_omega - std::log(in.eps + a) +
         in.log_subdiag_product - std::log(in.ek_phi_e1);
}

double bound_integral(const BoundInputs& in, double a) {
  check_assumptions(in, a);
  const SpectrumClass sc = classify_spectrum(in.eigenvalues, in.eps);
  const Index k = static_cast<Index>(in.eigenvalues.size());
  if (k + sc.n_real + 2 * in.ell < 4) {
    throw Error(ErrorCode::DivergentIntegral, "integral bound needs k + k1 + 2 l >= 4");
  }
  const double eps = in.eps;
  const int ell = in.ell;
  auto integrand = [&](double rho) {
    if (std::isinf(rho)) return 0.0;
    double lg = -0.5 * ell * std::log1p(rho * rho / (eps * eps));
    for (std::size_t j = 0; j < sc.r.size(); ++j) {
      lg -= (sc.is_real[j] ? 0.5 : 0.25) * std::log1p(rho * rho / (sc.r[j] * sc.r[j]));
    }
    return std::exp(lg);
  };
  std::vector<double> breaks{0.0, eps};
  breaks.insert(breaks.end(), sc.r.begin(), sc.r.end());
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(x, y); }),
               breaks.end());
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  double total = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double err = 0.0;
    total += GK::integrate(integrand, breaks[i], breaks[i + 1], 15, 1e-13, &err);
    err_total += err;
  }
  double err = 0.0;
  total += GK::integrate(integrand, breaks.back(), std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
  err_total += err;
  if (err_total > 1e-10 * total) {
    throw Error(ErrorCode::NoConvergence, "bound quadrature error above 1e-10 relative");
  }
  if (in.ek_phi_e1 == 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(log_bound_prefactor(in, a) + std::log(total));
}

double bound_closed(const BoundInputs& in, double a) {
  check_assumptions(in, a);
  const SpectrumClass sc = classify_spectrum(in.eigenvalues, in.eps);
  const Index k = static_cast<Index>(in.eigenvalues.size());
  if (k + sc.n_real < 4) throw Error(ErrorCode::DivergentIntegral, "closed-form bound needs k + k1 >= 4");
  const double eps = in.eps;
  const double e2 = eps * eps;
  const double R = sc.R;
  const double R2 = R * R;
  double S1 = in.ell / (4.0 * e2);
  double S2 = in.ell / (2.0 * (e2 + R2));
  for (std::size_t j = 0; j < sc.r.size(); ++j) {
    const double w = sc.is_real[j] ? 0.5 : 0.25;
    const double r2 = sc.r[j] * sc.r[j];
    S1 += w / (r2 + e2);
    S2 += w / (r2 + R2);
  }
  const double kk = static_cast<double>(k + sc.n_real);
  const double C = std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(S1)) + std::exp(-e2 * S2) * (R - eps) +
                   std::pow(eps / std::sqrt(e2 + R2), in.ell) * std::numbers::pi * R / std::exp2(kk / 4.0 + 1.0);
  if (in.ek_phi_e1 == 0.0) return std::numeric_limits<double>::infinity();
  return std::exp(log_bound_prefactor(in, a) + std::log(C));
}

bool harmonic_location_ok(const std::vector<Complex>& values, double a) {
  return std::all_of(values.begin(), values.end(),
                     [a](const Complex& mu) { return mu.real() >= a - 1e-10 * (1.0 + std::abs(mu)); });
}

}  // namespace phikrylov
