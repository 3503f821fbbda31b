#include "phikrylov/phi_krylov.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "phikrylov/correction.hpp"
#include "phikrylov/errors.hpp"

namespace phikrylov {

std::string method_name(Method m) {
  switch (m) {
    case Method::Arnoldi: return "arnoldi";
    case Method::Harmonic: return "harmonic";
    case Method::ShiftInvert: return "si";
    case Method::TRA: return "tra";
    case Method::TRHA: return "trha";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::Arnoldi, Method::Harmonic, Method::ShiftInvert, Method::TRA, Method::TRHA}) {
    if (method_name(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

bool is_restarted(Method m) { return m == Method::TRA || m == Method::TRHA; }

std::vector<int> normalize_ells(std::vector<int> ells) {
  if (ells.empty()) throw Error(ErrorCode::InvalidArgument, "at least one order is required");
  std::sort(ells.begin(), ells.end());
  ells.erase(std::unique(ells.begin(), ells.end()), ells.end());
  if (ells.front() < 0) throw Error(ErrorCode::InvalidArgument, "orders must be non-negative");
  return ells;
}

Matrix build_Tk(const Matrix& H, double h_sub, double gamma) {
  const Index k = H.rows();
  if (H.cols() != k || k < 1) throw Error(ErrorCode::DimensionMismatch, "build_Tk: H must be square");
  Matrix Hbar = Matrix::Zero(k + 1, k);
  Hbar.topRows(k) = H;
  Hbar(k, k - 1) = h_sub;
  const Vector w = residual_direction(Hbar, gamma);
  Matrix T = H;
  T.col(k - 1) += w.head(k);
  return T;
}

namespace {

PhiApprox project_and_lift(const ArnoldiDecomp& D, const Matrix& P, double t, const std::vector<int>& ells) {
  PhiApprox out;
  out.ells = normalize_ells(ells);
  const Index k = D.k;
  Vector be1 = Vector::Zero(k);
  be1[0] = D.beta;
  const auto cols = phi_col(-t * P, be1, out.ells.back());
  for (int ell : out.ells) {
    const Vector& u = cols[static_cast<std::size_t>(ell)];
    out.coeffs.push_back(u);
    out.y.push_back(D.V.leftCols(k) * u);
    out.rho.push_back(u[k - 1]);
  }
  out.projected = P;
  return out;
}

}  // namespace

PhiApprox arnoldi_phi_approx(const ArnoldiDecomp& D, double t, const std::vector<int>& ells) {
  PhiApprox out = project_and_lift(D, D.H(), t, ells);
  out.n_vec = Vector::Zero(D.k + 1);
  out.n_vec[D.k] = -D.h_sub();
  for (double r : out.rho) out.residual_norm.push_back(std::abs(D.h_sub() * r));
  return out;
}

PhiApprox harmonic_phi_approx(const ArnoldiDecomp& D, const Matrix& T, double t, const std::vector<int>& ells,
                              double gamma) {
  PhiApprox out = project_and_lift(D, T, t, ells);
  out.n_vec = residual_direction(D.Hbar, gamma);
  const double wn = out.n_vec.norm();
  for (double r : out.rho) out.residual_norm.push_back(wn * std::abs(r));
  return out;
}

PhiApprox si_phi_approx(const ArnoldiDecomp& Dsi, const Operator& A, double t, const std::vector<int>& ells,
                        MatvecCounter* counter) {
  const double gamma = Dsi.shift;
  if (!(gamma > 0.0)) throw Error(ErrorCode::InvalidArgument, "si_phi_approx: decomposition carries no shift");
  const Index k = Dsi.k;
  Matrix Hinv;
  try {
    Hinv = lu_solve(Dsi.H(), Matrix::Identity(k, k));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularMatrix) throw;
    throw Error(ErrorCode::SingularProjected, "projected shift-and-invert matrix is singular");
  }
  Matrix B = (Hinv - Matrix::Identity(k, k)) / gamma;
  PhiApprox out = project_and_lift(Dsi, B, t, ells);
  const Vector vk1 = Dsi.V.col(k);
  const Vector w = vk1 + gamma * matvec(A, vk1, counter);
  const double factor = w.norm();
  const double hk = Dsi.h_sub();
  for (std::size_t i = 0; i < out.coeffs.size(); ++i) {
    const double rho = hk / gamma * Hinv.row(k - 1).dot(out.coeffs[i]);
    out.rho[i] = rho;
    out.residual_norm.push_back(std::abs(rho) * factor);
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

void validate(const PhiRequest& req) {
  if (req.A.n() < 1) throw Error(ErrorCode::InvalidArgument, "operator is empty");
  if (req.v.size() != req.A.n()) throw Error(ErrorCode::DimensionMismatch, "vector length differs from n");
  if (!(req.t > 0.0) || !std::isfinite(req.t)) throw Error(ErrorCode::InvalidArgument, "t must be positive");
  if (!(req.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (req.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (req.q < 0) throw Error(ErrorCode::InvalidArgument, "q must be non-negative");
  if (req.max_cycles < 1) throw Error(ErrorCode::InvalidArgument, "max_cycles must be positive");
  if (!(req.shift() > 0.0)) throw Error(ErrorCode::InvalidArgument, "gamma must be positive");
}

void finish_report(MethodReport& rep, const PhiRequest& req, const MatvecCounter& counter, Clock::time_point start) {
  const auto& last = rep.residuals.back();
  rep.converged.assign(last.size(), false);
  rep.all_converged = true;
  for (std::size_t i = 0; i < last.size(); ++i) {
    rep.converged[i] = last[i] <= req.tol;
    rep.all_converged = rep.all_converged && rep.converged[i];
  }
  rep.matvecs = counter.matvecs.load();
  rep.solves = counter.solves.load();
  rep.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

CycleRecord make_record(int cycle, const ArnoldiDecomp& D, Index retained, const Vector& n_vec,
                        const std::vector<Vector>& coords, const std::vector<Vector>& coeffs) {
  CycleRecord rec;
  rec.cycle = cycle;
  rec.k = D.k;
  rec.retained = retained;
  rec.V = D.V;
  rec.Hbar = D.Hbar;
  rec.n_vec = n_vec;
  rec.residual_coords = coords;
  rec.coeffs = coeffs;
  return rec;
}

PhiResult single_cycle_once(const PhiRequest& req, Method method, double gamma) {
  MatvecCounter counter;
  const auto start = Clock::now();
  const Index k = std::min(req.k, req.A.n());
  PhiResult res;
  PhiApprox ap;
  if (method == Method::ShiftInvert) {
    ShiftedSolver S(req.A, gamma);
    res.decomp = si_arnoldi(S, req.v, k, &counter);
    ap = si_phi_approx(res.decomp, req.A, req.t, req.ells, &counter);
  } else {
    res.decomp = arnoldi_extend(req.A, arnoldi_start(req.v), k, &counter);
    if (method == Method::Harmonic || method == Method::TRHA) {
      const Matrix T = build_Tk(res.decomp.H(), res.decomp.h_sub(), gamma);
      ap = harmonic_phi_approx(res.decomp, T, req.t, req.ells, gamma);
    } else {
      ap = arnoldi_phi_approx(res.decomp, req.t, req.ells);
    }
  }
  res.projected = ap.projected;
  res.solutions = ap.y;
  MethodReport& rep = res.report;
  rep.method = method;
  rep.ells = ap.ells;
  rep.k = k;
  rep.gamma = method == Method::Arnoldi || method == Method::TRA ? 0.0 : gamma;
  rep.residuals.push_back(ap.residual_norm);
  rep.cycles = 1;
  rep.breakdown = res.decomp.breakdown;
  if (req.record_cycles && method != Method::ShiftInvert) {
    std::vector<Vector> coords;
    for (double r : ap.rho) coords.push_back(ap.n_vec * r);
    res.cycles.push_back(make_record(1, res.decomp, 0, ap.n_vec, coords, ap.coeffs));
  }
  finish_report(rep, req, counter, start);
  return res;
}

PhiResult restarted_once(const PhiRequest& req, Method method, double gamma_in) {
  const bool harmonic = method == Method::TRHA;
  const double gamma = harmonic ? gamma_in : 0.0;
  const Index k = std::min(req.k, req.A.n());
  const Index q = std::max<Index>(0, std::min(req.q, k - 2));
  const std::vector<int> ells = normalize_ells(req.ells);

  MatvecCounter counter;
  const auto start = Clock::now();
  PhiResult res;
  MethodReport& rep = res.report;
  rep.method = method;
  rep.ells = ells;
  rep.k = k;
  rep.gamma = gamma;

  ArnoldiDecomp D = arnoldi_extend(req.A, arnoldi_start(req.v), k, &counter);
  Matrix P = harmonic ? build_Tk(D.H(), D.h_sub(), gamma) : D.H();
  PhiApprox ap = harmonic ? harmonic_phi_approx(D, P, req.t, ells, gamma) : arnoldi_phi_approx(D, req.t, ells);
  res.solutions = ap.y;
  rep.residuals.push_back(ap.residual_norm);
  rep.cycles = 1;
  rep.breakdown = D.breakdown;
  if (req.record_cycles) {
    std::vector<Vector> coords;
    for (double r : ap.rho) coords.push_back(ap.n_vec * r);
    res.cycles.push_back(make_record(1, D, 0, ap.n_vec, coords, ap.coeffs));
  }

  CorrectionSystem base;
  base.first = P;
  base.beta = D.beta;
  base.t_end = req.t;
  Vector n_prev = ap.n_vec;

  auto converged = [&]() {
    for (double r : rep.residuals.back())
      if (!(r <= req.tol)) return false;
    return true;
  };

  while (!converged() && !D.breakdown && rep.cycles < req.max_cycles) {
    const EigenDecomp ed = rep.cycles == 1 ? hess_eig(P) : eig(P);
    const RitzSelection sel = select_ritz(ed, q, std::max<Index>(k - 2, 0));
    RestartBasis rb = compress_restart(D, sel.vectors, n_prev);
    for (auto& w : rb.warnings) rep.warnings.push_back("cycle " + std::to_string(rep.cycles + 1) + ": " + w);

    ArnoldiDecomp Dn = arnoldi_from_restart(rb);
    Dn.norm_estimate = D.norm_estimate;
    Dn = arnoldi_extend(req.A, std::move(Dn), k, &counter);
    const Vector chat = c_vector(rb, D.V, Dn.k);
    const Index kj = Dn.k;
    const Matrix Hj = Dn.H();

    Matrix lhs = Matrix::Identity(kj, kj) + gamma * Hj;
    Matrix Ibar_gH = gamma * Dn.Hbar;
    Ibar_gH.topRows(kj) += Matrix::Identity(kj, kj);
    Matrix xi;
    try {
      xi = lu_solve(lhs.transpose(), Ibar_gH.transpose());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix) throw;
      throw Error(ErrorCode::SingularShift, "I + gamma H_k is singular in a restarted cycle");
    }
    const Vector nvec = null_direction(Dn.Hbar, gamma);
    base.blocks.push_back(CorrectionBlock{Dn.Hbar, xi, chat, nvec});

    std::vector<double> resid(ells.size());
    std::vector<Vector> coords, zs;
    const double nn = nvec.norm();
    for (std::size_t i = 0; i < ells.size(); ++i) {
      CorrectionSystem sys = base;
      sys.ell = ells[i];
      const CorrectionSolution sol = req.exact_correction ? solve_correction_exact(sys) : solve_correction(sys);
      const Vector& z = sol.z.back();
      res.solutions[i] += Dn.V.leftCols(kj) * z;
      resid[i] = nn * std::abs(sol.rho.back());
      if (req.record_cycles) {
        coords.push_back(sol.brackets.back());
        zs.push_back(z);
      }
    }
    rep.residuals.push_back(resid);
    rep.retained.push_back(rb.q);
    rep.stack_dims.push_back(stacked_dimension(base));
    rep.cycles += 1;
    rep.breakdown = Dn.breakdown;
    if (req.record_cycles) res.cycles.push_back(make_record(rep.cycles, Dn, rb.q, nvec, coords, zs));

    P = harmonic ? build_Tk(Hj, Dn.h_sub(), gamma) : Hj;
    D = std::move(Dn);
    n_prev = nvec;
  }
  res.decomp = D;
  res.projected = P;
  finish_report(rep, req, counter, start);
  if (!rep.all_converged && !rep.breakdown) {
    rep.max_cycles_exceeded = true;
    rep.warnings.push_back("MaxCyclesExceeded: residual tolerance not reached in " + std::to_string(rep.cycles) + " cycles");
  }
  return res;
}

template <typename F>
PhiResult with_shift_retry(const PhiRequest& req, F&& once) {
  double gamma = req.shift();
  std::vector<std::string> notes;
  for (int attempt = 0;; ++attempt) {
    try {
      PhiResult r = once(gamma);
      r.report.warnings.insert(r.report.warnings.begin(), notes.begin(), notes.end());
      return r;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularShift || attempt == 3) throw;
      notes.push_back("SingularShift: gamma " + std::to_string(gamma) + " increased by 1%");
      gamma *= 1.01;
    }
  }
}

}  // namespace

PhiResult run_single_cycle(const PhiRequest& req, Method method) {
  validate(req);
  if (method == Method::TRA) method = Method::Arnoldi;
  if (method == Method::TRHA) method = Method::Harmonic;
  return with_shift_retry(req, [&](double g) { return single_cycle_once(req, method, g); });
}

PhiResult run_restarted(const PhiRequest& req, Method method) {
  validate(req);
  if (method == Method::Arnoldi) method = Method::TRA;
  if (method == Method::Harmonic) method = Method::TRHA;
  if (method == Method::ShiftInvert) throw Error(ErrorCode::InvalidArgument, "shift-and-invert has no restarted variant");
  return with_shift_retry(req, [&](double g) { return restarted_once(req, method, g); });
}

PhiResult run_method(const PhiRequest& req, Method method) {
  return is_restarted(method) ? run_restarted(req, method) : run_single_cycle(req, method);
}

}  // namespace phikrylov
