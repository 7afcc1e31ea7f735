#pragma once

#include "ranklab/field.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ranklab {

struct FieldSpec {
  std::string kind = "builtin";  // builtin | polynomial_file | grid_file | solve
  std::string name;              // builtin name
  ParamMap params;
  std::string path;  // resolved against the config directory

  // kind = solve
  std::string solve_operator;  // empty: the scenario operator
  ParamMap solve_params;
  bool solve_params_set = false;
  std::string boundary;  // builtin field name
  ParamMap boundary_params;
  std::string initial;  // builtin field name, empty: boundary function
  ParamMap initial_params;
  double solve_tol = 1e-10;
  int solve_max_iter = 50;
  double solve_damping = 1.0;
};

struct Tolerances {
  double tau_zero = 0.0;   // <= 0: 1e-8 max(1, max eigenvalue)
  double delta_gap = -1.0;  // < 0: 1e-6 max(1, |D^2P|_F) per point
  double form_tol = 1e-8;
  double slack_tol = 1e-4;
  double pd_shift = 1e-3;  // A = D^2u + pd_shift I for form evaluation on solution data
  double theta_tol = 1e-6;
  double eta_tol = 1e-6;
  double cert_tol = 1e-7;
  double deru_tol = 1e-8;
  double solution_tol = 1e-6;
};

struct LadderSpec {
  std::vector<int> degrees{2, 4, 6};
  std::vector<double> taus{1e-2, 1e-3, 1e-4};
  int level = 1;
  double alpha = 1.0;
  double harnack_q = 0.5;
  std::vector<double> harnack_eps_cells{2, 4, 8};
  int certificate_points = 50;
  int state_points = 25;
};

inline const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> k{"convexity", "ellipticity",   "rank",    "theorem2",
                                          "ineq",      "semiconcavity", "harnack", "deru"};
  return k;
}

struct Scenario {
  std::string name;
  std::string description;
  std::uint64_t seed = 0;
  BoxDomain box;
  FieldSpec field;
  std::string op_name;
  ParamMap op_params;
  std::vector<std::string> checks;
  Tolerances tol;
  LadderSpec ladder;
  std::string output_dir;
  std::string config_dir;
};

/// Strict TOML parsing; unknown sections or keys raise InputError naming the key.
Scenario parse_scenario(const std::string& text, const std::string& config_dir = ".");
Scenario load_scenario(const std::string& path);

struct RunOptions {
  std::optional<std::string> output_dir;  // overrides [output] dir
  bool quiet = false;
};

struct RunOutcome {
  int exit_code = 0;  // 0 pass, 2 property violated, 3 input/precondition error
  std::string first_failure;
  std::string error;
  std::string output_dir;
  std::vector<std::pair<std::string, bool>> checks;
};

/// Runs the checks in declared order and writes summary.json, audit.jsonl,
/// rankmap.csv and meta.json into the output directory.
RunOutcome run_scenario(const std::string& path, const RunOptions& opt = {});
RunOutcome run_scenario(const Scenario& sc, const RunOptions& opt = {});

/// Human-readable description of every file format read or written.
std::string formats_help();

}  // namespace ranklab
