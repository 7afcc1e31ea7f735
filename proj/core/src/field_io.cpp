#include "ranklab/field_io.hpp"

#include "ranklab/errors.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace ranklab {

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spill(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write failed for " + path);
}

std::vector<std::string> tokens(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string t;
  while (is >> t) out.push_back(t);
  return out;
}

double to_double(const std::string& s, int line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
    throw InputError("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

int to_int(const std::string& s, int line) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < 0 || v > 1 << 20)
    throw InputError("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return static_cast<int>(v);
}

std::string strip_comment(const std::string& line) {
  const auto hash = line.find('#');
  return hash == std::string::npos ? line : line.substr(0, hash);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Polynomial parse_polynomial(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int n = -1;
  std::vector<std::pair<Exponents, double>> terms;
  std::vector<double> center;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tk = tokens(strip_comment(line));
    if (tk.empty()) continue;
    if (tk[0] == "center") {
      if (!center.empty()) throw InputError("line " + std::to_string(lineno) + ": repeated center");
      for (std::size_t i = 1; i < tk.size(); ++i) center.push_back(to_double(tk[i], lineno));
      if (center.empty()) throw InputError("line " + std::to_string(lineno) + ": empty center");
      continue;
    }
    if (tk.size() < 2) throw InputError("line " + std::to_string(lineno) + ": expected exponents and coefficient");
    const int width = static_cast<int>(tk.size()) - 1;
    if (n < 0) n = width;
    if (width != n) throw InputError("line " + std::to_string(lineno) + ": inconsistent number of exponents");
    Exponents e(n);
    for (int i = 0; i < n; ++i) e[i] = to_int(tk[i], lineno);
    terms.emplace_back(std::move(e), to_double(tk.back(), lineno));
  }
  if (n < 0) throw InputError("polynomial file has no terms");
  if (n > kMaxDim) throw InputError("polynomial dimension exceeds 8");
  int degree = 0;
  for (const auto& [e, c] : terms) {
    int d = 0;
    for (int v : e) d += v;
    degree = std::max(degree, d);
  }
  Vector c = Vector::Zero(n);
  if (!center.empty()) {
    if (static_cast<int>(center.size()) != n) throw InputError("center has wrong dimension");
    for (int i = 0; i < n; ++i) c(i) = center[static_cast<std::size_t>(i)];
  }
  Polynomial p(n, degree, c);
  std::vector<bool> seen(p.basis().size(), false);
  for (const auto& [e, v] : terms) {
    const std::size_t idx = p.basis().index_of(e);
    if (seen[idx]) throw InputError("monomial listed twice in polynomial file");
    seen[idx] = true;
    p.set_coefficient(e, v);
  }
  return p;
}

std::string format_polynomial(const Polynomial& p) {
  std::string out;
  if (!p.center().isZero(0.0)) {
    out += "center";
    for (int i = 0; i < p.dim(); ++i) out += " " + format_double(p.center()(i));
    out += "\n";
  }
  for (std::size_t m = 0; m < p.basis().size(); ++m) {
    for (int e : p.basis()[m]) out += std::to_string(e) + " ";
    out += format_double(p.coefficients()[m]) + "\n";
  }
  return out;
}

Polynomial read_polynomial_file(const std::string& path) { return parse_polynomial(slurp(path)); }

void write_polynomial_file(const Polynomial& p, const std::string& path) {
  spill(format_polynomial(p), path);
}

GridField parse_grid(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    header = tokens(strip_comment(line));
  }
  if (header.empty()) throw InputError("grid file is empty");
  const int n = to_int(header[0], lineno);
  if (n < 1 || n > kMaxDim) throw InputError("grid dimension out of range");
  const std::size_t plain = 2 + static_cast<std::size_t>(n);
  if (header.size() != plain && header.size() != plain + static_cast<std::size_t>(n))
    throw InputError("grid header must be `n h d1..dn [o1..on]`");
  const double h = to_double(header[1], lineno);
  std::vector<int> dims(n);
  for (int i = 0; i < n; ++i) dims[i] = to_int(header[2 + i], lineno);
  Vector origin = Vector::Zero(n);
  if (header.size() > plain)
    for (int i = 0; i < n; ++i) origin(i) = to_double(header[plain + i], lineno);
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++lineno;
    for (const auto& t : tokens(strip_comment(line))) values.push_back(to_double(t, lineno));
  }
  return GridField(h, std::move(dims), std::move(origin), std::move(values));
}

std::string format_grid(const GridField& g) {
  std::string out = std::to_string(g.dim()) + " " + format_double(g.spacing());
  for (int d : g.dims()) out += " " + std::to_string(d);
  for (int i = 0; i < g.dim(); ++i) out += " " + format_double(g.origin()(i));
  out += "\n";
  for (double v : g.values()) out += format_double(v) + "\n";
  return out;
}

GridField read_grid_file(const std::string& path) { return parse_grid(slurp(path)); }

void write_grid_file(const GridField& g, const std::string& path) { spill(format_grid(g), path); }

}  // namespace ranklab
