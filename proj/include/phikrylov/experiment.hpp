#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phikrylov/phi_krylov.hpp"

namespace phikrylov {

inline constexpr const char* kRecordSchema = "phikrylov.run/1";
inline constexpr const char* kCsvSchema = "phikrylov.csv/1";

/** @brief One experiment: problem, starting vector, method and its parameters. */
struct RunConfig {
  std::string problem = "laplacian2d";  ///< laplacian2d | advdiff2d | lesp | mtx:<path>
  Index N = 10;                         ///< grid points per side (2-D problems)
  Index n = 100;                        ///< order (lesp)
  double scale = 1.0;                   ///< laplacian2d scaling
  double eps1 = 0.02;                   ///< advdiff2d diffusion
  double beta1 = -0.02;                 ///< advdiff2d advection
  double t = 1.0;
  std::vector<int> ells{0};
  std::string method = "trha";
  Index k = 30;
  Index q = 5;
  double tol = 1e-8;
  std::string gamma = "0.01t";  ///< absolute value or "<c>t"
  int max_cycles = 100;
  std::uint64_t seed = 0;
  std::string vector = "default";  ///< default | ones | random | rhs_poly | u0
  std::string oracle = "none";     ///< none | dense | taylor
  std::optional<double> sector_a;  ///< user-asserted sector vertex; enables bounds
  std::optional<double> epsilon;
  bool exact_correction = false;
};

struct Problem {
  Operator A;
  Vector v;
  std::string label;
  std::string vector_source;
};

struct EllRecord {
  int ell = 0;
  double residual = 0.0;
  std::optional<double> error;
  bool converged = false;
  std::optional<double> bound_closed;
  std::optional<double> bound_integral;
  std::optional<bool> bound_valid;
};

struct RunRecord {
  RunConfig config;
  std::string problem_hash;
  Index n = 0;
  double gamma = 0.0;
  std::vector<EllRecord> rows;
  int cycles = 0;
  std::int64_t matvecs = 0;
  std::int64_t solves = 0;
  double wall_ms = 0.0;
  bool all_converged = false;
  std::vector<Index> retained;
  std::vector<std::vector<double>> residual_history;
  std::vector<std::string> warnings;
  std::string rng = "mt19937_64";
};

/** @brief Parse "0.01t", "2t" or a plain number. */
double resolve_gamma(const std::string& spec, double t);

/** @brief Parse a comma-separated list of orders; throws InvalidArgument on malformed input. */
std::vector<int> parse_ells(const std::string& text);

Problem build_problem(const RunConfig& cfg);

/** @brief Reference phi_l(-tA) v for each order, by dense eigen-decomposition/expm or scaled Taylor. */
std::vector<Vector> reference_solution(const Operator& A, const Vector& v, double t, const std::vector<int>& ells,
                                       const std::string& kind);

RunRecord run(const RunConfig& cfg);

/** @brief Run several configurations that share problem and t; throws InvalidArgument otherwise. */
std::vector<RunRecord> compare(const std::vector<RunConfig>& cfgs);

/** @brief Split a configuration into one run per order followed by the simultaneous run. */
std::vector<RunConfig> sequential_variants(const RunConfig& cfg);

std::string csv_header();
std::string to_csv(const std::vector<RunRecord>& records);
std::string to_json(const std::vector<RunRecord>& records, int indent = 2);
std::string comparison_table(const std::vector<RunRecord>& records);

RunConfig config_from_json(const std::string& text);
std::string config_to_json(const RunConfig& cfg);

}  // namespace phikrylov
