#include "json.hpp"

#include "ranklab/field_io.hpp"
#include "ranklab/scenario.hpp"

#include <cmath>
#include <cstdio>

namespace ranklab::detail {

Json& Json::operator[](const std::string& key) {
  if (is_null()) v_ = Object{};
  auto& o = std::get<Object>(v_);
  for (auto& [k, v] : o)
    if (k == key) return v;
  o.emplace_back(key, Json());
  return o.back().second;
}

void Json::push_back(Json v) {
  if (is_null()) v_ = Array{};
  std::get<Array>(v_).push_back(std::move(v));
}

namespace {

void escape(std::string& out, const std::string& s) {
  out += '"';
  for (const unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += static_cast<char>(c);
        }
    }
  }
  out += '"';
}

void newline(std::string& out, int indent, int depth) {
  if (indent < 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent * depth), ' ');
}

}  // namespace

void Json::write(std::string& out, int indent, int depth) const {
  if (std::holds_alternative<std::nullptr_t>(v_)) {
    out += "null";
  } else if (const bool* b = std::get_if<bool>(&v_)) {
    out += *b ? "true" : "false";
  } else if (const auto* i = std::get_if<std::int64_t>(&v_)) {
    out += std::to_string(*i);
  } else if (const double* d = std::get_if<double>(&v_)) {
    out += std::isfinite(*d) ? format_double(*d) : "null";
  } else if (const auto* s = std::get_if<std::string>(&v_)) {
    escape(out, *s);
  } else if (const auto* a = std::get_if<Array>(&v_)) {
    if (a->empty()) {
      out += "[]";
      return;
    }
    // Arrays of scalars stay on one line.
    bool flat = true;
    for (const auto& e : *a)
      flat = flat && !std::holds_alternative<Array>(e.v_) && !std::holds_alternative<Object>(e.v_);
    out += '[';
    for (std::size_t k = 0; k < a->size(); ++k) {
      if (k) out += indent >= 0 && flat ? ", " : ",";
      if (!flat) newline(out, indent, depth + 1);
      (*a)[k].write(out, indent, depth + 1);
    }
    if (!flat) newline(out, indent, depth);
    out += ']';
  } else {
    const auto& o = std::get<Object>(v_);
    if (o.empty()) {
      out += "{}";
      return;
    }
    out += '{';
    for (std::size_t k = 0; k < o.size(); ++k) {
      if (k) out += ',';
      newline(out, indent, depth + 1);
      escape(out, o[k].first);
      out += indent >= 0 ? ": " : ":";
      o[k].second.write(out, indent, depth + 1);
    }
    newline(out, indent, depth);
    out += '}';
  }
}

std::string Json::dump(int indent) const {
  std::string out;
  write(out, indent, 0);
  return out;
}

}  // namespace ranklab::detail

namespace ranklab {

std::string formats_help() {
  return R"(ranklab file formats

Scenario config (TOML, unknown keys are errors)
  [scenario]   name (string, required), description (string), seed (integer >= 0)
  [domain]     center (list), half_width (number or list), grid (points per axis, 3..257)
  [field]      kind = "builtin" | "polynomial_file" | "grid_file" | "solve"
               name, params = { key = number or list }     (builtin)
               path                                         (files, relative to the config)
  [field.solve] operator, params, boundary, boundary_params, initial, initial_params,
               tol (1e-10), max_iter (50), damping (1)
  [operator]   name, params
  [checks]     list: subset of convexity, ellipticity, rank, theorem2, ineq,
               semiconcavity, harnack, deru (run in the listed order)
  [tolerances] tau_zero, delta_gap, form_tol, slack_tol, pd_shift, theta_tol, eta_tol,
               cert_tol, deru_tol, solution_tol
  [ladder]     degrees, taus, level, alpha, harnack_q, harnack_eps_cells,
               certificate_points, state_points
  [output]     dir (relative to the working directory; default out/<name>)

Builtin fields: radial_r, quadratic (c), rank1 (c), convex_poly (seed, degree),
  polynomial (degree, coefficients, center)
Builtin operators: trace_laplace (c), logdet (c), example33, korevaar_lewis,
  inverse_trace_general (m g h k a b w s e v c), neg_trace

Polynomial file
  one monomial per line: `e1 ... en coefficient`; optional `center c1 ... cn`;
  `#` starts a comment. Written in graded-lex order with every monomial.

Grid file
  header `n h d1 ... dn [o1 ... on]` (origin defaults to 0), then d1*...*dn values,
  one per line, row-major with the last axis fastest.

Outputs (numbers use 17 significant digits; non-finite numbers are null)
  summary.json  scenario, description, seed, dimension, field, operator,
                strict_condition, fixed_null_directions, [solver], checks{name: {..., pass}},
                result, exit_code, first_failure; no timestamps
  audit.jsonl   one object per audit sample: rung, degree, tau, x, Q, dQ_norm, traceTerm,
                num1_gap, num2_gap, form_min, deru, masked (written when the ladder runs)
  rankmap.csv   header x1..xn,lambda1..lambdan,rank; one row per lattice point
                (written when ranks are computed)
  meta.json     version, config, started, finished, wall_seconds
  field.grid    solved field, grid format (kind = "solve" only)

Exit codes: 0 every check passes, 2 a check fails (first_failure names it),
  3 input or precondition error.
)";
}

}  // namespace ranklab
