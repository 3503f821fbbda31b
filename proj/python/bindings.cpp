#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "phikrylov/errors.hpp"
#include "phikrylov/experiment.hpp"
#include "phikrylov/phi_krylov.hpp"

namespace py = pybind11;
using namespace phikrylov;

namespace {

py::tuple csr_tuple(const CsrMatrix& A) {
  return py::make_tuple(A.n(), A.row_offsets(), A.col_indices(), A.values());
}

CsrMatrix csr_from(Index n, std::vector<Index> indptr, std::vector<Index> indices, std::vector<double> data) {
  return CsrMatrix(n, std::move(indptr), std::move(indices), std::move(data));
}

py::dict solve(Index n, std::vector<Index> indptr, std::vector<Index> indices, std::vector<double> data,
               const Vector& v, double t, std::vector<int> ells, const std::string& method, Index k, Index q,
               double tol, std::optional<double> gamma, int max_cycles, bool exact_correction) {
  PhiRequest req;
  req.A = Operator(csr_from(n, std::move(indptr), std::move(indices), std::move(data)));
  req.v = v;
  req.t = t;
  req.ells = normalize_ells(std::move(ells));
  req.k = k;
  req.q = q;
  req.tol = tol;
  req.gamma = gamma;
  req.max_cycles = max_cycles;
  req.exact_correction = exact_correction;
  PhiResult res;
  {
    py::gil_scoped_release release;
    res = run_method(req, parse_method(method));
  }
  const MethodReport& rep = res.report;
  py::dict out;
  out["ells"] = rep.ells;
  out["solutions"] = res.solutions;
  out["residuals"] = rep.final_residuals();
  out["residual_history"] = rep.residuals;
  out["converged"] = rep.all_converged;
  out["cycles"] = rep.cycles;
  out["matvecs"] = rep.matvecs;
  out["solves"] = rep.solves;
  out["gamma"] = rep.gamma;
  out["retained"] = rep.retained;
  out["warnings"] = rep.warnings;
  out["wall_ms"] = rep.wall_ms;
  return out;
}

}  // namespace

PYBIND11_MODULE(_phikrylov, m) {
  m.doc() = "Simultaneous phi-function actions by (harmonic) Arnoldi with thick restarts";

  static py::exception<Error> error_type(m, "PhiKrylovError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type.ptr())(e.what());
      exc.attr("code") = error_code_name(e.code());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("solve", &solve, py::arg("n"), py::arg("indptr"), py::arg("indices"), py::arg("data"), py::arg("v"),
        py::arg("t") = 1.0, py::arg("ells") = std::vector<int>{0}, py::arg("method") = "trha", py::arg("k") = 30,
        py::arg("q") = 5, py::arg("tol") = 1e-8, py::arg("gamma") = py::none(), py::arg("max_cycles") = 100,
        py::arg("exact_correction") = false, "Evaluate phi_l(-tA) v for every requested order on a CSR matrix.");

  m.def(
      "run_json",
      [](const std::string& config) {
        const RunConfig cfg = config_from_json(config);
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = run(cfg);
        }
        return to_json({rec}, -1);
      },
      py::arg("config"), "Run one experiment configuration (JSON text) and return the JSON record.");

  m.def(
      "compare_json",
      [](const std::vector<std::string>& configs) {
        std::vector<RunConfig> cfgs;
        for (const auto& c : configs) cfgs.push_back(config_from_json(c));
        std::vector<RunRecord> recs;
        {
          py::gil_scoped_release release;
          recs = compare(cfgs);
        }
        return py::make_tuple(to_json(recs, -1), comparison_table(recs));
      },
      py::arg("configs"));

  m.def("laplacian2d", [](Index N, double scale) { return csr_tuple(gen_laplacian2d(N, scale)); }, py::arg("N"),
        py::arg("scale") = 1.0);
  m.def(
      "advdiff2d",
      [](Index N, double eps1, double beta1) {
        const AdvDiffProblem p = gen_advdiff2d(N, eps1, beta1);
        return py::make_tuple(csr_tuple(p.A), p.u0);
      },
      py::arg("N"), py::arg("eps1") = 0.02, py::arg("beta1") = -0.02);
  m.def("lesp", [](Index n) { return csr_tuple(gen_lesp(n)); }, py::arg("n"));
  m.def("rhs_poly", &gen_rhs_poly, py::arg("N"));
  m.def("load_matrix_market", [](const std::string& path) { return csr_tuple(load_matrix_market(path)); },
        py::arg("path"));

  m.def("phi_dense", [](const Matrix& M, const Vector& b, int s) { return phi_col(M, b, s); }, py::arg("M"),
        py::arg("b"), py::arg("s"), "phi_l(M) b for l = 0..s by one augmented exponential.");
}
