#include "ranklab/scenario.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/operator.hpp"

#include <toml.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace ranklab {

namespace {

namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw InputError(key + ": " + what);
}

void allow_keys(const toml::table& t, const std::string& where, std::initializer_list<const char*> keys) {
  for (auto&& [k, v] : t) {
    const std::string key(k.str());
    bool ok = false;
    for (const char* a : keys) ok = ok || key == a;
    if (!ok) bad(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const toml::table* subtable(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) bad(where + key, "expected a table");
  return n->as_table();
}

double as_number(const toml::node& n, const std::string& key) {
  if (auto d = n.value_exact<double>()) return *d;
  if (auto i = n.value_exact<std::int64_t>()) return static_cast<double>(*i);
  bad(key, "expected a number");
}

std::int64_t as_integer(const toml::node& n, const std::string& key) {
  if (auto i = n.value_exact<std::int64_t>()) return *i;
  bad(key, "expected an integer");
}

std::string as_string(const toml::node& n, const std::string& key) {
  if (auto s = n.value_exact<std::string>()) return *s;
  bad(key, "expected a string");
}

std::vector<double> as_numbers(const toml::node& n, const std::string& key) {
  std::vector<double> out;
  if (const toml::array* a = n.as_array()) {
    for (std::size_t i = 0; i < a->size(); ++i)
      out.push_back(as_number(*a->get(i), key + "[" + std::to_string(i) + "]"));
    return out;
  }
  out.push_back(as_number(n, key));
  return out;
}

ParamMap as_params(const toml::node& n, const std::string& key) {
  const toml::table* t = n.as_table();
  if (!t) bad(key, "expected an inline table of numbers");
  ParamMap p;
  for (auto&& [k, v] : *t) p[std::string(k.str())] = as_numbers(v, key + "." + std::string(k.str()));
  return p;
}

template <class T, class Fn>
void read(const toml::table& t, const char* key, const std::string& where, T& out, Fn&& conv) {
  if (const toml::node* n = t.get(key)) out = conv(*n, where + key);
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& config_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config syntax error at line " << e.source().begin.line << ": " << e.description();
    throw InputError(os.str());
  }
  allow_keys(root, "", {"scenario", "domain", "field", "operator", "checks", "tolerances", "ladder", "output"});
  Scenario sc;
  sc.config_dir = config_dir;

  const toml::table* s = subtable(root, "scenario", "");
  if (!s) bad("scenario", "missing section");
  allow_keys(*s, "scenario", {"name", "description", "seed"});
  read(*s, "name", "scenario.", sc.name, as_string);
  read(*s, "description", "scenario.", sc.description, as_string);
  if (const toml::node* n = s->get("seed")) {
    const auto v = as_integer(*n, "scenario.seed");
    if (v < 0) bad("scenario.seed", "must be non-negative");
    sc.seed = static_cast<std::uint64_t>(v);
  }
  if (sc.name.empty()) bad("scenario.name", "missing");

  const toml::table* d = subtable(root, "domain", "");
  if (!d) bad("domain", "missing section");
  allow_keys(*d, "domain", {"center", "half_width", "grid"});
  std::vector<double> center, hw;
  std::int64_t grid = 0;
  read(*d, "center", "domain.", center, as_numbers);
  read(*d, "half_width", "domain.", hw, as_numbers);
  read(*d, "grid", "domain.", grid, as_integer);
  if (center.empty()) bad("domain.center", "missing");
  if (center.size() > static_cast<std::size_t>(kMaxDim)) bad("domain.center", "dimension above 8");
  if (hw.size() == 1) hw.assign(center.size(), hw.front());
  if (hw.size() != center.size()) bad("domain.half_width", "needs one value or one per axis");
  if (grid < 3 || grid > 257) bad("domain.grid", "must be in [3, 257]");
  const int n = static_cast<int>(center.size());
  try {
    sc.box = BoxDomain(Eigen::Map<const Vector>(center.data(), n), Eigen::Map<const Vector>(hw.data(), n),
                       static_cast<int>(grid));
  } catch (const InputError& e) {
    bad("domain", e.what());
  }

  const toml::table* f = subtable(root, "field", "");
  if (!f) bad("field", "missing section");
  allow_keys(*f, "field", {"kind", "name", "params", "path", "solve"});
  FieldSpec& fs_ = sc.field;
  read(*f, "kind", "field.", fs_.kind, as_string);
  read(*f, "name", "field.", fs_.name, as_string);
  read(*f, "params", "field.", fs_.params, as_params);
  read(*f, "path", "field.", fs_.path, as_string);
  if (fs_.kind == "builtin") {
    if (fs_.name.empty()) bad("field.name", "missing for builtin field");
    try {
      (void)builtin_field(fs_.name, fs_.params, n);
    } catch (const InputError& e) {
      bad("field.name", e.what());
    }
  } else if (fs_.kind == "polynomial_file" || fs_.kind == "grid_file") {
    if (fs_.path.empty()) bad("field.path", "missing");
    if (fs::path(fs_.path).is_relative()) fs_.path = (fs::path(config_dir) / fs_.path).string();
  } else if (fs_.kind == "solve") {
    const toml::table* sv = subtable(*f, "solve", "field.");
    if (!sv) bad("field.solve", "missing table for kind = \"solve\"");
    allow_keys(*sv, "field.solve",
               {"operator", "params", "boundary", "boundary_params", "initial", "initial_params", "tol",
                "max_iter", "damping"});
    read(*sv, "operator", "field.solve.", fs_.solve_operator, as_string);
    if (sv->get("params")) {
      read(*sv, "params", "field.solve.", fs_.solve_params, as_params);
      fs_.solve_params_set = true;
    }
    read(*sv, "boundary", "field.solve.", fs_.boundary, as_string);
    read(*sv, "boundary_params", "field.solve.", fs_.boundary_params, as_params);
    read(*sv, "initial", "field.solve.", fs_.initial, as_string);
    read(*sv, "initial_params", "field.solve.", fs_.initial_params, as_params);
    read(*sv, "tol", "field.solve.", fs_.solve_tol, as_number);
    std::int64_t it = fs_.solve_max_iter;
    read(*sv, "max_iter", "field.solve.", it, as_integer);
    fs_.solve_max_iter = static_cast<int>(it);
    read(*sv, "damping", "field.solve.", fs_.solve_damping, as_number);
    if (fs_.boundary.empty()) bad("field.solve.boundary", "missing");
    try {
      (void)builtin_field(fs_.boundary, fs_.boundary_params, n);
      if (!fs_.initial.empty()) (void)builtin_field(fs_.initial, fs_.initial_params, n);
    } catch (const InputError& e) {
      bad("field.solve", e.what());
    }
  } else {
    bad("field.kind", "expected builtin, polynomial_file, grid_file or solve");
  }
  if (fs_.kind != "solve" && f->get("solve")) bad("field.solve", "only allowed with kind = \"solve\"");

  if (const toml::table* o = subtable(root, "operator", "")) {
    allow_keys(*o, "operator", {"name", "params"});
    read(*o, "name", "operator.", sc.op_name, as_string);
    read(*o, "params", "operator.", sc.op_params, as_params);
    if (sc.op_name.empty()) bad("operator.name", "missing");
    try {
      (void)make_operator(sc.op_name, sc.op_params);
    } catch (const InputError& e) {
      bad("operator.name", e.what());
    }
  }
  if (fs_.kind == "solve") {
    if (fs_.solve_operator.empty()) {
      if (sc.op_name.empty()) bad("field.solve.operator", "missing and no [operator] section");
      fs_.solve_operator = sc.op_name;
      if (!fs_.solve_params_set) fs_.solve_params = sc.op_params;
    }
    try {
      (void)make_operator(fs_.solve_operator, fs_.solve_params);
    } catch (const InputError& e) {
      bad("field.solve.operator", e.what());
    }
  }

  if (const toml::table* c = subtable(root, "checks", "")) {
    allow_keys(*c, "checks", {"list"});
    if (const toml::node* l = c->get("list")) {
      const toml::array* a = l->as_array();
      if (!a) bad("checks.list", "expected an array of strings");
      std::set<std::string> seen;
      for (std::size_t i = 0; i < a->size(); ++i) {
        const std::string name = as_string(*a->get(i), "checks.list");
        const auto& k = known_checks();
        if (std::find(k.begin(), k.end(), name) == k.end()) bad("checks.list", "unknown check '" + name + "'");
        if (!seen.insert(name).second) bad("checks.list", "check '" + name + "' listed twice");
        sc.checks.push_back(name);
      }
    }
  }
  for (const auto& c : sc.checks)
    if (c != "rank" && sc.op_name.empty()) bad("operator", "check '" + c + "' needs an [operator] section");

  if (const toml::table* t = subtable(root, "tolerances", "")) {
    allow_keys(*t, "tolerances",
               {"tau_zero", "delta_gap", "form_tol", "slack_tol", "pd_shift", "theta_tol", "eta_tol",
                "cert_tol", "deru_tol", "solution_tol"});
    Tolerances& tl = sc.tol;
    read(*t, "tau_zero", "tolerances.", tl.tau_zero, as_number);
    read(*t, "delta_gap", "tolerances.", tl.delta_gap, as_number);
    read(*t, "form_tol", "tolerances.", tl.form_tol, as_number);
    read(*t, "slack_tol", "tolerances.", tl.slack_tol, as_number);
    read(*t, "pd_shift", "tolerances.", tl.pd_shift, as_number);
    read(*t, "theta_tol", "tolerances.", tl.theta_tol, as_number);
    read(*t, "eta_tol", "tolerances.", tl.eta_tol, as_number);
    read(*t, "cert_tol", "tolerances.", tl.cert_tol, as_number);
    read(*t, "deru_tol", "tolerances.", tl.deru_tol, as_number);
    read(*t, "solution_tol", "tolerances.", tl.solution_tol, as_number);
    if (!(tl.pd_shift >= 0.0)) bad("tolerances.pd_shift", "must be non-negative");
  }

  if (const toml::table* l = subtable(root, "ladder", "")) {
    allow_keys(*l, "ladder",
               {"degrees", "taus", "level", "alpha", "harnack_q", "harnack_eps_cells", "certificate_points",
                "state_points"});
    LadderSpec& ld = sc.ladder;
    if (const toml::node* v = l->get("degrees")) {
      ld.degrees.clear();
      for (double x : as_numbers(*v, "ladder.degrees")) {
        if (x != std::floor(x)) bad("ladder.degrees", "expected integers");
        ld.degrees.push_back(static_cast<int>(x));
      }
    }
    read(*l, "taus", "ladder.", ld.taus, as_numbers);
    std::int64_t level = ld.level, cert = ld.certificate_points, states = ld.state_points;
    read(*l, "level", "ladder.", level, as_integer);
    read(*l, "certificate_points", "ladder.", cert, as_integer);
    read(*l, "state_points", "ladder.", states, as_integer);
    ld.level = static_cast<int>(level);
    ld.certificate_points = static_cast<int>(cert);
    ld.state_points = static_cast<int>(states);
    read(*l, "alpha", "ladder.", ld.alpha, as_number);
    read(*l, "harnack_q", "ladder.", ld.harnack_q, as_number);
    read(*l, "harnack_eps_cells", "ladder.", ld.harnack_eps_cells, as_numbers);
    if (ld.degrees.size() != ld.taus.size() || ld.degrees.empty())
      bad("ladder", "degrees and taus must be non-empty and of equal length");
    if (ld.certificate_points < 1 || ld.state_points < 1) bad("ladder", "point counts must be positive");
  }

  if (const toml::table* o = subtable(root, "output", "")) {
    allow_keys(*o, "output", {"dir"});
    read(*o, "dir", "output.", sc.output_dir, as_string);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path);
  std::ostringstream os;
  os << in.rdbuf();
  const fs::path dir = fs::path(path).parent_path();
  return parse_scenario(os.str(), dir.empty() ? "." : dir.string());
}

}  // namespace ranklab
