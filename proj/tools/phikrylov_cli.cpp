// Command-line harness: `run` solves one configuration, `compare` tabulates several.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "phikrylov/errors.hpp"
#include "phikrylov/experiment.hpp"

using namespace phikrylov;

namespace {

struct Flags {
  RunConfig cfg;
  std::string ells = "0";
  std::optional<double> sector_a;
  std::optional<double> epsilon;
  std::string output;
  std::string json_out;
};

void add_config_flags(CLI::App* app, Flags& f) {
  RunConfig& c = f.cfg;
  app->add_option("--problem", c.problem, "laplacian2d | advdiff2d | lesp | mtx:<path>")->capture_default_str();
  app->add_option("--N", c.N, "grid points per side")->capture_default_str();
  app->add_option("--n", c.n, "order for lesp")->capture_default_str();
  app->add_option("--scale", c.scale, "laplacian2d scaling")->capture_default_str();
  app->add_option("--eps1", c.eps1, "advdiff2d diffusion")->capture_default_str();
  app->add_option("--beta1", c.beta1, "advdiff2d advection")->capture_default_str();
  app->add_option("--t", c.t, "time")->capture_default_str();
  app->add_option("--ells", f.ells, "comma-separated orders")->capture_default_str();
  app->add_option("--method", c.method, "arnoldi | harmonic | si | tra | trha")->capture_default_str();
  app->add_option("--k", c.k, "Krylov dimension")->capture_default_str();
  app->add_option("--q", c.q, "retained Ritz vectors")->capture_default_str();
  app->add_option("--tol", c.tol, "residual tolerance")->capture_default_str();
  app->add_option("--gamma", c.gamma, "shift, absolute or '<c>t'")->capture_default_str();
  app->add_option("--max-cycles", c.max_cycles, "restart cycle limit")->capture_default_str();
  app->add_option("--seed", c.seed, "seed for --vector random")->capture_default_str();
  app->add_option("--vector", c.vector, "default | ones | random | rhs_poly | u0")->capture_default_str();
  app->add_option("--oracle", c.oracle, "none | dense | taylor")->capture_default_str();
  app->add_option("--sector-a", f.sector_a, "asserted sector vertex a; enables error bounds");
  app->add_option("--epsilon", f.epsilon, "bound parameter epsilon (default a/2, or 1 when a = 0)");
  app->add_flag("--exact-correction", c.exact_correction, "solve the restart correction by a dense phi evaluation");
}

RunConfig finish(const Flags& f) {
  RunConfig c = f.cfg;
  c.ells = parse_ells(f.ells);
  c.sector_a = f.sector_a;
  c.epsilon = f.epsilon;
  return c;
}

void emit(const std::vector<RunRecord>& recs, const std::string& output, const std::string& json_out) {
  const std::string csv = to_csv(recs);
  if (output.empty()) {
    std::cout << csv;
  } else {
    std::ofstream(output) << csv;
  }
  if (!json_out.empty()) std::ofstream(json_out) << to_json(recs) << "\n";
}

bool is_config_error(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError:
    case ErrorCode::UnsupportedField:
    case ErrorCode::DimensionMismatch:
      return true;
    default:
      return false;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phi-function Krylov solvers"};
  app.require_subcommand(1);

  Flags run_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "solve one configuration");
  add_config_flags(run_cmd, run_flags);
  run_cmd->add_option("--output", run_flags.output, "CSV output path (stdout when omitted)");
  run_cmd->add_option("--json", run_flags.json_out, "JSON output path");

  Flags cmp_flags;
  std::vector<std::string> methods;
  std::vector<std::string> config_files;
  bool sequential = false;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "run several configurations on one problem and tabulate");
  add_config_flags(cmp_cmd, cmp_flags);
  cmp_cmd->add_option("--methods", methods, "methods to compare on the shared configuration")->delimiter(',');
  cmp_cmd->add_option("--config", config_files, "JSON configuration files");
  cmp_cmd->add_flag("--sequential", sequential, "also run each order on its own and report matvec savings");
  cmp_cmd->add_option("--output", cmp_flags.output, "CSV output path");
  cmp_cmd->add_option("--json", cmp_flags.json_out, "JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      const RunConfig cfg = finish(run_flags);
      const RunRecord rec = run(cfg);
      for (const std::string& w : rec.warnings) std::cerr << "warning: " << w << "\n";
      emit({rec}, run_flags.output, run_flags.json_out);
      return 0;
    }
    std::vector<RunConfig> cfgs;
    for (const std::string& path : config_files) {
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::InvalidArgument, "--config: cannot open '" + path + "'");
      std::stringstream ss;
      ss << in.rdbuf();
      cfgs.push_back(config_from_json(ss.str()));
    }
    const RunConfig base = finish(cmp_flags);
    for (const std::string& m : methods) {
      RunConfig c = base;
      c.method = m;
      cfgs.push_back(c);
    }
    if (cfgs.empty()) cfgs.push_back(base);
    if (sequential) {
      std::vector<RunConfig> expanded;
      for (const RunConfig& c : cfgs) {
        for (RunConfig& v : sequential_variants(c)) expanded.push_back(std::move(v));
      }
      cfgs = std::move(expanded);
    }
    const std::vector<RunRecord> recs = compare(cfgs);
    std::cout << comparison_table(recs);
    if (!cmp_flags.output.empty()) std::ofstream(cmp_flags.output) << to_csv(recs);
    if (!cmp_flags.json_out.empty()) std::ofstream(cmp_flags.json_out) << to_json(recs) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
