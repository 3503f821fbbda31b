#include "phikrylov/experiment.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "phikrylov/error_bound.hpp"
#include "phikrylov/errors.hpp"

namespace phikrylov {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

struct Fnv {
  std::uint64_t h = 1469598103934665603ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  template <typename T>
  void value(const T& x) { bytes(&x, sizeof x); }
  std::string hex() const {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
  }
};

std::string matrix_hash(const Operator& A, double t) {
  Fnv f;
  f.value(A.n());
  f.value(t);
  if (const CsrMatrix* csr = A.csr()) {
    f.bytes(csr->row_offsets().data(), csr->row_offsets().size() * sizeof(Index));
    f.bytes(csr->col_indices().data(), csr->col_indices().size() * sizeof(Index));
    f.bytes(csr->values().data(), csr->values().size() * sizeof(double));
  }
  return f.hex();
}

Vector random_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = 2.0 * static_cast<double>(gen() >> 11) * 0x1.0p-53 - 1.0;
  return v;
}

bool exactly_symmetric(const CsrMatrix& A) {
  const Matrix D = A.to_dense();
  return D == D.transpose();
}

}  // namespace

double resolve_gamma(const std::string& spec, double t) {
  if (spec.empty()) throw Error(ErrorCode::InvalidArgument, "--gamma: empty value");
  std::string body = spec;
  bool relative = false;
  if (body.back() == 't') {
    relative = true;
    body.pop_back();
    if (body.empty()) body = "1";
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || ec != std::errc() || ptr != body.data() + body.size() || !(v > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "--gamma: expected a positive number or '<c>t', got '" + spec + "'");
  }
  return relative ? v * t : v;
}

std::vector<int> parse_ells(const std::string& text) {
  std::vector<int> out;
  std::size_t pos = 0;
  if (text.empty()) throw Error(ErrorCode::InvalidArgument, "--ells: empty list");
  while (true) {
    const std::size_t next = text.find(',', pos);
    const std::string tok = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
      throw Error(ErrorCode::InvalidArgument, "--ells: malformed entry '" + tok + "' in '" + text + "'");
    }
    out.push_back(v);
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

Problem build_problem(const RunConfig& cfg) {
  Problem p;
  std::string default_vec;
  Vector natural;
  if (cfg.problem == "laplacian2d") {
    p.A = Operator(gen_laplacian2d(cfg.N, cfg.scale));
    default_vec = "rhs_poly";
  } else if (cfg.problem == "advdiff2d") {
    AdvDiffProblem ad = gen_advdiff2d(cfg.N, cfg.eps1, cfg.beta1);
    p.A = Operator(std::move(ad.A));
    natural = std::move(ad.u0);
    default_vec = "u0";
  } else if (cfg.problem == "lesp") {
    p.A = Operator(gen_lesp(cfg.n));
    default_vec = "ones";
  } else if (cfg.problem.rfind("mtx:", 0) == 0) {
    p.A = Operator(load_matrix_market(cfg.problem.substr(4)));
    default_vec = "ones";
  } else {
    throw Error(ErrorCode::InvalidArgument, "--problem: unknown problem '" + cfg.problem + "'");
  }
  p.label = cfg.problem;
  const Index n = p.A.n();
  const std::string src = cfg.vector == "default" ? default_vec : cfg.vector;
  if (src == "ones") {
    p.v = Vector::Ones(n);
  } else if (src == "random") {
    p.v = random_vector(n, cfg.seed);
  } else if (src == "rhs_poly") {
    const Index N = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (N * N != n) throw Error(ErrorCode::InvalidArgument, "--vector: rhs_poly needs a square grid");
    p.v = gen_rhs_poly(N);
  } else if (src == "u0") {
    if (natural.size() != n) throw Error(ErrorCode::InvalidArgument, "--vector: u0 is only defined for advdiff2d");
    p.v = natural;
  } else {
    throw Error(ErrorCode::InvalidArgument, "--vector: unknown source '" + cfg.vector + "'");
  }
  p.vector_source = src;
  return p;
}

std::vector<Vector> reference_solution(const Operator& A, const Vector& v, double t, const std::vector<int>& ells_in,
                                       const std::string& kind) {
  const std::vector<int> ells = normalize_ells(ells_in);
  const int s = ells.back();
  const Matrix Ad = A.to_dense();
  std::vector<Vector> all;
  if (kind == "dense") {
    if (Ad == Ad.transpose()) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(Ad);
      const Matrix& Q = es.eigenvectors();
      const Vector c = Q.transpose() * v;
      for (int ell = 0; ell <= s; ++ell) {
        Vector w(c.size());
        for (Index i = 0; i < c.size(); ++i) w[i] = phi_scalar(-t * es.eigenvalues()[i], ell) * c[i];
        all.push_back(Q * w);
      }
    } else {
      all = phi_col(-t * Ad, v, s);
    }
  } else if (kind == "taylor") {
    all = phi_taylor_reference(-t * Ad, v, s);
  } else {
    throw Error(ErrorCode::InvalidArgument, "--oracle: unknown oracle '" + kind + "'");
  }
  std::vector<Vector> out;
  for (int ell : ells) out.push_back(all[static_cast<std::size_t>(ell)]);
  return out;
}

RunRecord run(const RunConfig& cfg) {
  if (cfg.oracle != "none" && cfg.oracle != "dense" && cfg.oracle != "taylor") {
    throw Error(ErrorCode::InvalidArgument, "--oracle: unknown oracle '" + cfg.oracle + "'");
  }
  const Method method = parse_method(cfg.method);
  Problem prob = build_problem(cfg);
  PhiRequest req;
  req.A = prob.A;
  req.v = prob.v;
  req.t = cfg.t;
  req.ells = normalize_ells(cfg.ells);
  req.tol = cfg.tol;
  req.k = cfg.k;
  req.q = cfg.q;
  req.gamma = resolve_gamma(cfg.gamma, cfg.t);
  req.max_cycles = cfg.max_cycles;
  req.exact_correction = cfg.exact_correction;
  if (cfg.k < 1) throw Error(ErrorCode::InvalidArgument, "--k: must be positive");
  if (is_restarted(method) && cfg.q + 1 >= std::min(cfg.k, prob.A.n()) && cfg.k <= prob.A.n()) {
    throw Error(ErrorCode::InvalidArgument, "--q: need q + 1 < k");
  }

  const PhiResult res = run_method(req, method);
  const MethodReport& rep = res.report;

  RunRecord rec;
  rec.config = cfg;
  rec.config.ells = rep.ells;
  rec.problem_hash = matrix_hash(prob.A, cfg.t);
  rec.n = prob.A.n();
  rec.gamma = rep.gamma;
  rec.cycles = rep.cycles;
  rec.matvecs = rep.matvecs;
  rec.solves = rep.solves;
  rec.wall_ms = rep.wall_ms;
  rec.all_converged = rep.all_converged;
  rec.retained = rep.retained;
  rec.residual_history = rep.residuals;
  rec.warnings = rep.warnings;

  std::vector<Vector> ref;
  if (cfg.oracle != "none") {
    if (prob.A.n() <= 5000) {
      ref = reference_solution(prob.A, prob.v, cfg.t, rep.ells, cfg.oracle);
    } else {
      rec.warnings.push_back("oracle skipped: n > 5000");
    }
  }

  const bool bounds = cfg.sector_a.has_value() && (method == Method::Arnoldi || method == Method::Harmonic);
  const double a = cfg.sector_a.value_or(0.0);
  const double eps = cfg.epsilon.value_or(default_epsilon(a));
  bool location_ok = true;
  if (bounds && method == Method::Harmonic) {
    const EigenDecomp ed = eig(res.projected);
    location_ok = harmonic_location_ok(std::vector<Complex>(ed.values.data(), ed.values.data() + ed.values.size()), a);
  }

  for (std::size_t i = 0; i < rep.ells.size(); ++i) {
    EllRecord row;
    row.ell = rep.ells[i];
    row.residual = rep.final_residuals()[i];
    row.converged = rep.converged[i];
    if (!ref.empty()) row.error = (ref[i] - res.solutions[i]).norm() / ref[i].norm();
    if (bounds) {
      try {
        const BoundInputs in = make_bound_inputs(res.decomp, res.projected, cfg.t, row.ell, eps);
        row.bound_closed = bound_closed(in, a) * row.residual;
        row.bound_integral = bound_integral(in, a) * row.residual;
        row.bound_valid = location_ok;
      } catch (const Error& e) {
        rec.warnings.push_back("bound for l=" + std::to_string(row.ell) + " skipped: " + e.what());
      }
    }
    rec.rows.push_back(row);
  }
  return rec;
}

std::vector<RunConfig> sequential_variants(const RunConfig& cfg) {
  std::vector<RunConfig> out;
  for (int ell : normalize_ells(cfg.ells)) {
    RunConfig c = cfg;
    c.ells = {ell};
    out.push_back(c);
  }
  out.push_back(cfg);
  return out;
}

std::vector<RunRecord> compare(const std::vector<RunConfig>& cfgs) {
  if (cfgs.size() < 2) throw Error(ErrorCode::InvalidArgument, "compare: at least two configurations are required");
  for (const RunConfig& c : cfgs) {
    if (c.t != cfgs.front().t) throw Error(ErrorCode::InvalidArgument, "compare: configurations differ in t");
  }
  const std::string first_hash = matrix_hash(build_problem(cfgs.front()).A, cfgs.front().t);
  for (const RunConfig& c : cfgs) {
    if (matrix_hash(build_problem(c).A, c.t) != first_hash) {
      throw Error(ErrorCode::InvalidArgument, "compare: configurations differ in problem");
    }
  }
  std::vector<RunRecord> out;
  for (const RunConfig& c : cfgs) out.push_back(run(c));
  return out;
}

std::string csv_header() {
  return "method,problem,n,t,ell,residual,error,cycles,mv,wall_ms,bound_closed,bound_integral\n";
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::string out = std::string("# ") + kCsvSchema + "\n" + csv_header();
  for (const RunRecord& r : records) {
    for (const EllRecord& row : r.rows) {
      out += r.config.method + "," + r.config.problem + "," + std::to_string(r.n) + "," + fmt(r.config.t) + "," +
             std::to_string(row.ell) + "," + fmt(row.residual) + "," + fmt(row.error) + "," + std::to_string(r.cycles) +
             "," + std::to_string(r.matvecs) + "," + fmt(r.wall_ms) + "," + fmt(row.bound_closed) + "," +
             fmt(row.bound_integral) + "\n";
    }
  }
  return out;
}

namespace {

json config_json(const RunConfig& c) {
  json j;
  j["problem"] = c.problem;
  j["N"] = c.N;
  j["n"] = c.n;
  j["scale"] = c.scale;
  j["eps1"] = c.eps1;
  j["beta1"] = c.beta1;
  j["t"] = c.t;
  j["ells"] = c.ells;
  j["method"] = c.method;
  j["k"] = c.k;
  j["q"] = c.q;
  j["tol"] = c.tol;
  j["gamma"] = c.gamma;
  j["max_cycles"] = c.max_cycles;
  j["seed"] = c.seed;
  j["vector"] = c.vector;
  j["oracle"] = c.oracle;
  j["sector_a"] = c.sector_a ? json(*c.sector_a) : json(nullptr);
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["exact_correction"] = c.exact_correction;
  return j;
}

json opt(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

std::string to_json(const std::vector<RunRecord>& records, int indent) {
  json root;
  root["schema"] = kRecordSchema;
  root["runs"] = json::array();
  for (const RunRecord& r : records) {
    json j;
    j["config"] = config_json(r.config);
    j["problem_hash"] = r.problem_hash;
    j["n"] = r.n;
    j["gamma"] = r.gamma;
    j["cycles"] = r.cycles;
    j["matvecs"] = r.matvecs;
    j["solves"] = r.solves;
    j["wall_ms"] = r.wall_ms;
    j["all_converged"] = r.all_converged;
    j["retained"] = r.retained;
    j["residual_history"] = r.residual_history;
    j["warnings"] = r.warnings;
    j["rng"] = r.rng;
    j["results"] = json::array();
    for (const EllRecord& row : r.rows) {
      json e;
      e["ell"] = row.ell;
      e["residual"] = row.residual;
      e["error"] = opt(row.error);
      e["converged"] = row.converged;
      e["bound_closed"] = opt(row.bound_closed);
      e["bound_integral"] = opt(row.bound_integral);
      e["bound_valid"] = row.bound_valid ? json(*row.bound_valid) : json(nullptr);
      j["results"].push_back(e);
    }
    root["runs"].push_back(j);
  }
  return root.dump(indent);
}

std::string comparison_table(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << std::left << std::setw(9) << "method" << std::setw(12) << "ells" << std::setw(8) << "cycles" << std::setw(8)
     << "mv" << std::setw(14) << "max_resid" << std::setw(14) << "max_error" << std::setw(12) << "wall_ms"
     << "problem_hash\n";
  for (const RunRecord& r : records) {
    std::string ells;
    double max_res = 0.0;
    std::optional<double> max_err;
    for (const EllRecord& row : r.rows) {
      ells += (ells.empty() ? "" : ",") + std::to_string(row.ell);
      max_res = std::max(max_res, row.residual);
      if (row.error) max_err = std::max(max_err.value_or(0.0), *row.error);
    }
    std::ostringstream res, err, wall;
    res << std::setprecision(3) << std::scientific << max_res;
    if (max_err) err << std::setprecision(3) << std::scientific << *max_err;
    else err << "-";
    wall << std::fixed << std::setprecision(1) << r.wall_ms;
    os << std::left << std::setw(9) << r.config.method << std::setw(12) << ells << std::setw(8) << r.cycles
       << std::setw(8) << r.matvecs << std::setw(14) << res.str() << std::setw(14) << err.str() << std::setw(12)
       << wall.str() << r.problem_hash << "\n";
  }
  for (const RunRecord& sim : records) {
    if (sim.rows.size() < 2) continue;
    std::int64_t seq = 0;
    std::set<int> covered;
    for (const RunRecord& one : records) {
      if (one.rows.size() != 1 || one.config.method != sim.config.method) continue;
      for (const EllRecord& row : sim.rows) {
        if (row.ell == one.rows[0].ell && !covered.count(row.ell)) {
          covered.insert(row.ell);
          seq += one.matvecs;
        }
      }
    }
    if (covered.size() == sim.rows.size()) {
      os << "mv savings (" << sim.config.method << "): simultaneous " << sim.matvecs << " vs sequential sum " << seq
         << (sim.matvecs <= seq ? " (simultaneous <= sequential)" : " (simultaneous > sequential)") << "\n";
    }
  }
  return os.str();
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("--config: ") + e.what());
  }
  RunConfig c;
  try {
    if (j.contains("problem")) c.problem = j["problem"].get<std::string>();
    if (j.contains("N")) c.N = j["N"].get<Index>();
    if (j.contains("n")) c.n = j["n"].get<Index>();
    if (j.contains("scale")) c.scale = j["scale"].get<double>();
    if (j.contains("eps1")) c.eps1 = j["eps1"].get<double>();
    if (j.contains("beta1")) c.beta1 = j["beta1"].get<double>();
    if (j.contains("t")) c.t = j["t"].get<double>();
    if (j.contains("ells")) {
      if (j["ells"].is_string()) c.ells = parse_ells(j["ells"].get<std::string>());
      else c.ells = j["ells"].get<std::vector<int>>();
    }
    if (j.contains("method")) c.method = j["method"].get<std::string>();
    if (j.contains("k")) c.k = j["k"].get<Index>();
    if (j.contains("q")) c.q = j["q"].get<Index>();
    if (j.contains("tol")) c.tol = j["tol"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].is_string() ? j["gamma"].get<std::string>() : fmt(j["gamma"].get<double>());
    if (j.contains("max_cycles")) c.max_cycles = j["max_cycles"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("vector")) c.vector = j["vector"].get<std::string>();
    if (j.contains("oracle")) c.oracle = j["oracle"].get<std::string>();
    if (j.contains("sector_a") && !j["sector_a"].is_null()) c.sector_a = j["sector_a"].get<double>();
    if (j.contains("epsilon") && !j["epsilon"].is_null()) c.epsilon = j["epsilon"].get<double>();
    if (j.contains("exact_correction")) c.exact_correction = j["exact_correction"].get<bool>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("--config: ") + e.what());
  }
  return c;
}

std::string config_to_json(const RunConfig& cfg) { return config_json(cfg).dump(2); }

}  // namespace phikrylov
