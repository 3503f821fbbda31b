#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "phikrylov/errors.hpp"
#include "phikrylov/sparse.hpp"

namespace phikrylov {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

double parse_value(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, "malformed number '" + tok + "'");
  return v;
}

long long parse_int(const std::string& tok, std::size_t line) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(line, "malformed integer '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

}  // namespace

CsrMatrix parse_matrix_market(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  const auto head = split(lower(line));
  if (head.size() != 5 || head[0] != "%%matrixmarket" || head[1] != "matrix") {
    throw ParseError(lineno, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
  }
  const std::string& format = head[2];
  const std::string& field = head[3];
  const std::string& symmetry = head[4];
  if (format != "coordinate" && format != "array") throw ParseError(lineno, "unknown format '" + format + "'");
  if (field == "complex" || field == "pattern" || field == "hermitian") {
    throw Error(ErrorCode::UnsupportedField, "field '" + field + "' is not supported");
  }
  if (field != "real" && field != "integer" && field != "double") throw ParseError(lineno, "unknown field '" + field + "'");
  if (symmetry != "general" && symmetry != "symmetric") {
    throw Error(ErrorCode::UnsupportedField, "symmetry '" + symmetry + "' is not supported");
  }
  const bool sym = symmetry == "symmetric";

  std::vector<std::string> size_tok;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    size_tok = split(line);
    break;
  }
  const std::size_t want = format == "coordinate" ? 3 : 2;
  if (size_tok.size() != want) throw ParseError(lineno, "malformed size line");
  const long long rows = parse_int(size_tok[0], lineno);
  const long long cols = parse_int(size_tok[1], lineno);
  if (rows != cols || rows < 0) throw ParseError(lineno, "matrix must be square");
  const Index n = static_cast<Index>(rows);

  std::vector<std::tuple<Index, Index, double>> trip;
  auto add = [&](Index i, Index j, double v) {
    trip.emplace_back(i, j, v);
    if (sym && i != j) trip.emplace_back(j, i, v);
  };

  if (format == "coordinate") {
    const long long nnz = parse_int(size_tok[2], lineno);
    long long seen = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line) || line[0] == '%') continue;
      if (seen == nnz) throw ParseError(lineno, "more entries than declared");
      const auto tok = split(line);
      if (tok.size() != 3) throw ParseError(lineno, "expected 'row col value'");
      const long long i = parse_int(tok[0], lineno);
      const long long j = parse_int(tok[1], lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError(lineno, "index out of range");
      if (sym && j > i) throw ParseError(lineno, "symmetric file stores an upper-triangle entry");
      add(static_cast<Index>(i - 1), static_cast<Index>(j - 1), parse_value(tok[2], lineno));
      ++seen;
    }
    if (seen != nnz) throw ParseError(lineno, "fewer entries than declared");
  } else {
    Index i = 0, j = 0;
    bool done = n == 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (blank(line) || line[0] == '%') continue;
      if (done) throw ParseError(lineno, "more entries than declared");
      const auto tok = split(line);
      if (tok.size() != 1) throw ParseError(lineno, "expected one value per line");
      const double v = parse_value(tok[0], lineno);
      if (v != 0.0) add(i, j, v);
      if (++i == n) {
        ++j;
        i = sym ? j : 0;
      }
      done = j == n;
    }
    if (!done) throw ParseError(lineno, "fewer entries than declared");
  }
  return CsrMatrix::from_triplets(n, std::move(trip));
}

CsrMatrix load_matrix_market(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError(0, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  CsrMatrix A = parse_matrix_market(ss.str());
  return CsrMatrix(A.n(), A.row_offsets(), A.col_indices(), A.values(), path);
}

std::string format_matrix_market(const CsrMatrix& A) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(A.n()) + " " + std::to_string(A.n()) + " " + std::to_string(A.nnz()) + "\n";
  char buf[64];
  for (Index i = 0; i < A.n(); ++i) {
    for (Index p = A.row_offsets()[i]; p < A.row_offsets()[i + 1]; ++p) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, A.values()[p]);
      out += std::to_string(i + 1) + " " + std::to_string(A.col_indices()[p] + 1) + " " + std::string(buf, end) + "\n";
    }
  }
  return out;
}

void write_matrix_market(const CsrMatrix& A, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  f << format_matrix_market(A);
}

}  // namespace phikrylov
