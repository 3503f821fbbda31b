#include "phikrylov/errors.hpp"
#include "phikrylov/sparse.hpp"

namespace phikrylov {

namespace {

// 5-point stencil with separate weights for each neighbour direction.
CsrMatrix five_point(Index N, double diag, double west, double east, double south, double north, std::string name) {
  std::vector<std::tuple<Index, Index, double>> trip;
  trip.reserve(static_cast<std::size_t>(5 * N * N));
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i < N; ++i) {
      const Index row = j * N + i;
      if (j > 0) trip.emplace_back(row, row - N, south);
      if (i > 0) trip.emplace_back(row, row - 1, west);
      trip.emplace_back(row, row, diag);
      if (i + 1 < N) trip.emplace_back(row, row + 1, east);
      if (j + 1 < N) trip.emplace_back(row, row + N, north);
    }
  }
  return CsrMatrix::from_triplets(N * N, std::move(trip), std::move(name));
}

}  // namespace

CsrMatrix gen_laplacian2d(Index N, double scale) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "gen_laplacian2d: N must be >= 1");
  const double h = 1.0 / static_cast<double>(N + 1);
  const double c = scale / (h * h);
  return five_point(N, 4.0 * c, -c, -c, -c, -c, "laplacian2d");
}

AdvDiffProblem gen_advdiff2d(Index N, double eps1, double beta1) {
  if (N < 2) throw Error(ErrorCode::InvalidArgument, "gen_advdiff2d: N must be >= 2");
  const double h = 1.0 / static_cast<double>(N + 1);
  const double d = eps1 / (h * h);
  const double a = beta1 / (2.0 * h);
  AdvDiffProblem p;
  p.A = five_point(N, 4.0 * d, -d - a, -d + a, -d - a, -d + a, "advdiff2d");
  p.u0.resize(N * N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i < N; ++i) {
      const double x = static_cast<double>(i + 1) * h;
      const double y = static_cast<double>(j + 1) * h;
      const double s = x * y * (1.0 - x) * (1.0 - y);
      p.u0[j * N + i] = 256.0 * s * s + 0.3;
    }
  }
  return p;
}

CsrMatrix gen_lesp(Index n) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "gen_lesp: n must be >= 2");
  // gallery('lesp',n) = tridiag(2:n, -(5:2:2n+3), 1./(2:n)) with sub, diag, super order.
  std::vector<std::tuple<Index, Index, double>> trip;
  for (Index r = 0; r < n; ++r) {
    if (r > 0) trip.emplace_back(r, r - 1, -static_cast<double>(r + 1));
    trip.emplace_back(r, r, static_cast<double>(2 * r + 5));
    if (r + 1 < n) trip.emplace_back(r, r + 1, -1.0 / static_cast<double>(r + 2));
  }
  return CsrMatrix::from_triplets(n, std::move(trip), "lesp");
}

Vector gen_rhs_poly(Index N) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "gen_rhs_poly: N must be >= 1");
  const double h = 1.0 / static_cast<double>(N + 1);
  Vector g(N * N);
  for (Index j = 0; j < N; ++j) {
    for (Index i = 0; i < N; ++i) {
      const double x = static_cast<double>(i + 1) * h;
      const double y = static_cast<double>(j + 1) * h;
      g[j * N + i] = 30.0 * x * (1.0 - x) * y * (1.0 - y);
    }
  }
  return g;
}

}  // namespace phikrylov
