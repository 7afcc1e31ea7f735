#include "ranklab/errors.hpp"
#include "ranklab/field_io.hpp"
#include "ranklab/ineq.hpp"
#include "ranklab/operator.hpp"
#include "ranklab/rank.hpp"
#include "ranklab/regularity.hpp"
#include "ranklab/scenario.hpp"
#include "ranklab/solver.hpp"
#include "json.hpp"
#include "parallel.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#ifndef RANKLAB_VERSION
#define RANKLAB_VERSION "0.0.0"
#endif

namespace ranklab {

namespace {

namespace fs = std::filesystem;
using detail::Json;
using detail::json_array;

constexpr double kInf = std::numeric_limits<double>::infinity();

Json vec_json(const Vector& v) { return json_array(std::vector<double>(v.data(), v.data() + v.size())); }

Json params_json(const ParamMap& p) {
  Json o = Json::object();
  for (const auto& [k, v] : p) o[k] = v.size() == 1 ? Json(v.front()) : json_array(v);
  return o;
}

Json sym_json(const SymMatrix& m) {
  Json a = Json::array();
  for (int i = 0; i < m.dim(); ++i) a.push_back(vec_json(m.matrix().row(i).transpose()));
  return a;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw InputError("cannot write " + p.string());
  out << text;
  if (!out) throw InputError("cannot write " + p.string());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct CheckFailure {
  std::string check;
};

// Lazily computed pieces shared between checks.
class Run {
 public:
  Run(const Scenario& sc, const fs::path& out) : sc_(sc), out_(out) {}

  Json summary = Json::object();
  std::vector<std::pair<std::string, bool>> results;

  void prepare_field() {
    const int n = sc_.box.dim();
    const FieldSpec& f = sc_.field;
    Json desc = Json::object();
    desc["kind"] = f.kind;
    if (f.kind == "builtin") {
      field_ = std::make_unique<ScalarField>(builtin_field(f.name, f.params, n));
      desc["name"] = f.name;
      desc["params"] = params_json(f.params);
    } else if (f.kind == "polynomial_file") {
      field_ = std::make_unique<ScalarField>(read_polynomial_file(f.path));
      desc["path"] = fs::path(f.path).filename().string();
    } else if (f.kind == "grid_file") {
      field_ = std::make_unique<ScalarField>(read_grid_file(f.path));
      desc["path"] = fs::path(f.path).filename().string();
    } else {
      solve(desc);
    }
    if (field_->dim() != n)
      throw InputError("field: dimension " + std::to_string(field_->dim()) + " does not match the domain");
    desc["description"] = field_->describe();
    summary["field"] = desc;
    Json op = Json::object();
    if (!sc_.op_name.empty()) {
      op_ = make_operator(sc_.op_name, sc_.op_params);
      op["name"] = sc_.op_name;
      op["params"] = params_json(sc_.op_params);
    }
    summary["operator"] = op;
    summary["strict_condition"] = "not_evaluated";
    summary["fixed_null_directions"] = "not_evaluated";
  }

  void run_check(const std::string& name) {
    Json& c = summary["checks"][name];
    bool pass = false;
    if (name == "convexity")
      pass = convexity(c);
    else if (name == "ellipticity")
      pass = ellipticity(c);
    else if (name == "rank")
      pass = rank(c);
    else if (name == "theorem2")
      pass = theorem2(c);
    else if (name == "ineq")
      pass = ineq(c);
    else if (name == "semiconcavity")
      pass = semiconcavity(c);
    else if (name == "harnack")
      pass = harnack(c);
    else
      pass = deru(c);
    c["pass"] = pass;
    results.emplace_back(name, pass);
  }

  bool wrote_rankmap = false;
  bool wrote_audit = false;

 private:
  const Scenario& sc_;
  fs::path out_;
  std::unique_ptr<ScalarField> field_;
  std::unique_ptr<Operator> op_;

  std::optional<std::vector<Vector>> points_;
  std::optional<std::vector<OperatorState>> states_;
  struct Strictness {
    double form_min = kInf;
    double x_block_min = kInf;
    double direct_violation = -kInf;
    double probe_violation = -kInf;
    double eta_min = kInf;
    std::size_t eta_state = 0;
    StrictEta eta_witness;
  };
  std::optional<Strictness> strict_;
  std::optional<RankMap> rank_;
  std::optional<AuditResult> audit_;

  void solve(Json& desc) {
    const int n = sc_.box.dim();
    const FieldSpec& f = sc_.field;
    DiscreteProblem prob;
    prob.op = std::shared_ptr<const Operator>(make_operator(f.solve_operator, f.solve_params));
    prob.box = sc_.box;
    const ScalarField g = builtin_field(f.boundary, f.boundary_params, n);
    prob.boundary = [g](const Vector& x) { return g.value(x); };
    if (!f.initial.empty()) {
      const ScalarField u0 = builtin_field(f.initial, f.initial_params, n);
      prob.initial = [u0](const Vector& x) { return u0.value(x); };
    }
    NewtonOptions nopt;
    nopt.tol = f.solve_tol;
    nopt.max_iter = f.solve_max_iter;
    nopt.damping = f.solve_damping;
    NewtonResult res = newton_solve(prob, nopt);
    write_text(out_ / "field.grid", format_grid(res.field));
    desc["operator"] = f.solve_operator;
    desc["params"] = params_json(f.solve_params);
    desc["boundary"] = f.boundary;
    desc["initial"] = f.initial.empty() ? f.boundary : f.initial;
    Json s = Json::object();
    s["converged"] = res.trace.converged;
    s["iterations"] = res.trace.step_inf.size();
    s["achieved_residual"] = res.achieved_residual;
    s["residual_inf"] = json_array(res.trace.residual_inf);
    s["halvings"] = json_array(res.trace.halvings);
    solver_ = std::move(s);
    field_ = std::make_unique<ScalarField>(std::move(res.field));
  }

 public:
  std::optional<Json> solver_;

 private:
  const std::vector<Vector>& points() {
    if (!points_) {
      points_ = field_->sample_points(sc_.box);
      if (points_->empty()) throw InputError("field: no lattice point of the domain admits a jet");
    }
    return *points_;
  }

  // At most state_points lattice points, evenly strided; A is shifted by pd_shift I.
  const std::vector<OperatorState>& states() {
    if (!states_) {
      const auto& pts = points();
      const std::size_t m = std::min<std::size_t>(pts.size(), static_cast<std::size_t>(sc_.ladder.state_points));
      std::vector<OperatorState> s(m);
      detail::parallel_for(m, [&](std::size_t i) {
        const Vector& x = pts[i * pts.size() / m];
        const Jet4 j = field_->jet4(x);
        s[i] = OperatorState{j.d2u + sc_.tol.pd_shift * SymMatrix::identity(j.dim()), j.du, j.u, x};
      });
      states_ = std::move(s);
    }
    return *states_;
  }

  const Strictness& strictness() {
    if (!strict_) {
      const auto& st = states();
      struct Per {
        FormSpectrum fs;
        StrictEta eta;
        double direct = 0.0, probe = 0.0;
      };
      std::vector<Per> per(st.size());
      for (std::size_t i = 0; i < st.size(); ++i) {
        const OperatorJet oj = operator_jet(*op_, st[i]);
        per[i].fs = form_spectrum(oj);
        per[i].eta = strict_eta(oj);
        per[i].direct = direct_convexity_check(*op_, st[i].p, neighborhood_sampler(st[i], 0.05), 200,
                                               sc_.seed + i)
                            .max_violation;
        per[i].probe = local_convexity_probe(*op_, st[i]).max_violation;
      }
      Strictness s;
      for (std::size_t i = 0; i < per.size(); ++i) {
        s.form_min = std::min(s.form_min, per[i].fs.min_eigenvalue);
        s.x_block_min = std::min(s.x_block_min, per[i].fs.x_block_min);
        s.direct_violation = std::max(s.direct_violation, per[i].direct);
        s.probe_violation = std::max(s.probe_violation, per[i].probe);
        if (per[i].eta.eta < s.eta_min) {
          s.eta_min = per[i].eta.eta;
          s.eta_state = i;
          s.eta_witness = per[i].eta;
        }
      }
      strict_ = s;
      summary["strict_condition"] = s.eta_min > sc_.tol.eta_tol ? "passed" : "failed";
    }
    return *strict_;
  }

  double tau_zero() {
    return sc_.tol.tau_zero > 0.0 ? sc_.tol.tau_zero : default_tau_zero(*field_, sc_.box);
  }

  const RankMap& rankmap() {
    if (!rank_) {
      rank_ = rank_map(*field_, sc_.box, tau_zero());
      write_text(out_ / "rankmap.csv", format_rankmap_csv(rank_->samples));
      wrote_rankmap = true;
    }
    return *rank_;
  }

  const AuditResult& audit() {
    if (!audit_) {
      std::vector<std::pair<int, double>> ladder;
      for (std::size_t i = 0; i < sc_.ladder.degrees.size(); ++i)
        ladder.emplace_back(sc_.ladder.degrees[i], sc_.ladder.taus[i]);
      AuditOptions opt;
      opt.tau_zero = sc_.tol.tau_zero;
      opt.delta_gap = sc_.tol.delta_gap;
      opt.solution_tol = sc_.tol.solution_tol;
      opt.form_tol = sc_.tol.form_tol;
      opt.seed = sc_.seed;
      audit_ = differential_inequality_audit(*op_, *field_, sc_.box, sc_.ladder.level, ladder, opt);
      std::string lines;
      for (std::size_t r = 0; r < audit_->rungs.size(); ++r) {
        const AuditRung& rung = audit_->rungs[r];
        for (const AuditSample& s : rung.samples) {
          Json o = Json::object();
          o["rung"] = r;
          o["degree"] = rung.degree;
          o["tau"] = rung.tau;
          o["x"] = vec_json(s.x);
          o["Q"] = s.Q;
          o["dQ_norm"] = s.dQ_norm;
          o["traceTerm"] = s.traceTerm;
          o["num1_gap"] = s.num1_gap;
          o["num2_gap"] = s.num2_gap;
          o["form_min"] = s.form_min;
          o["deru"] = json_array(s.deru);
          o["masked"] = s.masked;
          lines += o.dump(-1);
          lines += '\n';
        }
      }
      write_text(out_ / "audit.jsonl", lines);
      wrote_audit = true;
    }
    return *audit_;
  }

  bool convexity(Json& c) {
    const Strictness& s = strictness();
    const double violation = std::max(s.direct_violation, s.probe_violation);
    c["states"] = states().size();
    c["pd_shift"] = sc_.tol.pd_shift;
    c["form_min_eigenvalue"] = s.form_min;
    c["form_x_block_min"] = s.x_block_min;
    c["direct_max_violation"] = s.direct_violation;
    c["probe_max_violation"] = s.probe_violation;
    c["strict_eta_min"] = s.eta_min;
    Json w = Json::object();
    w["x"] = vec_json(states()[s.eta_state].x);
    w["X"] = sym_json(s.eta_witness.witness_X);
    w["Z"] = vec_json(s.eta_witness.witness_Z);
    w["Y"] = s.eta_witness.witness_Y;
    c["strict_witness"] = w;
    return s.form_min >= -sc_.tol.form_tol && violation <= sc_.tol.form_tol;
  }

  bool ellipticity(Json& c) {
    const auto& st = states();
    std::vector<double> lo(st.size());
    detail::parallel_for(st.size(), [&](std::size_t i) {
      lo[i] = eigh(operator_jet(*op_, st[i]).Fab).eigenvalues(0);
    });
    double m = kInf;
    std::size_t at = 0;
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] < m) {
        m = lo[i];
        at = i;
      }
    c["states"] = st.size();
    c["min_eigenvalue"] = m;
    c["witness_x"] = vec_json(st[at].x);
    return m > 0.0;
  }

  bool rank(Json& c) {
    const RankMap& rm = rankmap();
    const RankVerdict v = rank_verdict(rm.samples, sc_.tol.theta_tol);
    c["points"] = rm.samples.size();
    c["tau_zero"] = rm.tau_zero;
    c["min_eigenvalue"] = rm.min_eigenvalue;
    c["constant"] = v.constant;
    c["min_rank"] = v.min_rank;
    c["max_rank"] = v.max_rank;
    c["max_principal_angle"] = v.max_principal_angle;
    Json dirs = Json::array();
    for (const Vector& d : v.fixed_null_directions) dirs.push_back(vec_json(d));
    c["fixed_null_directions"] = dirs;
    const bool has_null = v.constant && v.max_rank < sc_.box.dim();
    if (v.fixed_null_directions.empty() || !has_null)
      summary["fixed_null_directions"] = "none";
    else
      summary["fixed_null_directions"] = dirs;
    return v.constant;
  }

  bool theorem2(Json& c) {
    const RankMap& rm = rankmap();
    const std::string strict = strictness().eta_min > sc_.tol.eta_tol ? "passed" : "failed";
    const auto& pts = points();
    const std::size_t m =
        std::min<std::size_t>(pts.size(), static_cast<std::size_t>(sc_.ladder.certificate_points));
    std::vector<Theorem2Report> rep(m);
    detail::parallel_for(m, [&](std::size_t i) {
      rep[i] = theorem2_certificate(*op_, *field_, pts[i * pts.size() / m], rm.tau_zero);
    });
    double a = 0.0, b = 0.0, cc = 0.0;
    int k = 0;
    std::size_t empty = 0;
    for (const auto& r : rep) {
      if (r.empty) {
        ++empty;
        continue;
      }
      k = std::max(k, r.k);
      a = std::max(a, r.residual_a);
      b = std::max(b, r.residual_b);
      cc = std::max(cc, r.residual_c);
    }
    c["points"] = m;
    c["empty_points"] = empty;
    c["k"] = k;
    c["max_residual_a"] = a;
    c["max_residual_b"] = b;
    c["max_residual_c"] = cc;
    c["strict_condition"] = strict;
    c["counterexample_signature"] = strict == "failed" && b >= 1e-3;
    const double tol = sc_.tol.cert_tol;
    return a <= tol && cc <= tol && (strict == "failed" || b <= tol);
  }

  bool ineq(Json& c) {
    const AuditResult& res = audit();
    c["level"] = res.ell;
    c["k"] = res.k;
    c["tau_zero"] = res.tau_zero;
    c["max_abs_F"] = res.max_abs_F;
    c["monotone"] = res.monotone;
    bool valid = true;
    double num1 = kInf, num2 = kInf;
    Json rungs = Json::array();
    for (const AuditRung& r : res.rungs) {
      Json o = Json::object();
      o["degree"] = r.degree;
      o["tau"] = r.tau;
      o["fitted_C"] = r.fitted_C;
      o["slack_q50"] = r.slack.q50;
      o["slack_q90"] = r.slack.q90;
      o["slack_q99"] = r.slack.q99;
      o["slack_max"] = r.slack.max;
      o["masked"] = r.masked;
      o["masked_fraction"] = r.masked_fraction;
      o["valid"] = r.valid;
      o["sup_Q"] = r.sup_Q;
      o["max_dQ"] = r.max_dQ;
      o["min_num1_gap"] = r.min_num1_gap;
      o["min_num2_gap"] = r.min_num2_gap;
      o["min_form"] = r.min_form;
      o["max_deru"] = r.max_deru;
      o["sup_lower_dQ"] = json_array(r.sup_lower_dQ);
      o["fit_deviation"] = json_array(std::vector<double>(r.fit.deviation, r.fit.deviation + 4));
      rungs.push_back(std::move(o));
      valid = valid && r.valid;
      num1 = std::min(num1, r.min_num1_gap);
      num2 = std::min(num2, r.min_num2_gap);
    }
    c["ladder"] = rungs;
    const double q99 = res.rungs.back().slack.q99;
    c["final_slack_q99"] = q99;
    c["min_num1_gap"] = num1;
    c["min_num2_gap"] = num2;
    const double tol = sc_.tol.form_tol;
    // min over an empty set stays +inf and passes.
    return valid && q99 <= sc_.tol.slack_tol && num1 >= -tol && num2 >= -tol && res.monotone;
  }

  bool semiconcavity(Json& c) {
    const AuditResult& res = audit();
    const int ell = res.ell;
    bool pass = true;
    double lo = kInf, hi = 0.0;
    Json rungs = Json::array();
    for (std::size_t r = 0; r < res.rungs.size(); ++r) {
      const AuditRung& rung = res.rungs[r];
      const SemiconcavityReport sr = semiconcavity_audit(rung.P, ell, sc_.box, 512, sc_.seed + r);
      const DqBoundReport dq = dq_bound_audit(rung.P, ell, sc_.box, sc_.ladder.alpha, sc_.seed + r);
      Json o = Json::object();
      o["degree"] = rung.degree;
      o["tau"] = rung.tau;
      o["K"] = sr.K;
      o["max_violation"] = sr.max_violation;
      o["sup_Q"] = dq.sup_Q;
      o["max_dQ"] = dq.max_dQ;
      o["C_fit"] = dq.C_fit;
      o["C_lemma"] = dq.C_lemma;
      o["directional_violation"] = dq.directional_violation;
      o["masked"] = dq.masked;
      rungs.push_back(std::move(o));
      pass = pass && sr.max_violation <= 1e-8 && dq.directional_violation <= 1e-8 && dq.C_fit <= dq.C_lemma;
      // C_fit below the floor counts as the floor: |DQ| = 0 fits any constant.
      const double cf = std::max(dq.C_fit, 1e-10);
      lo = std::min(lo, cf);
      hi = std::max(hi, cf);
    }
    c["level"] = ell;
    c["alpha"] = sc_.ladder.alpha;
    c["ladder"] = rungs;
    c["C_fit_spread"] = hi / lo;
    return pass && hi <= 4.0 * lo;
  }

  bool harnack(Json& c) {
    const AuditResult& res = audit();
    const BoxDomain& box = sc_.box;
    const int n = box.dim();
    LatticeData Q{std::vector<int>(n, box.grid_per_axis), Vector(n), {}};
    for (int i = 0; i < n; ++i) Q.spacing(i) = box.spacing(i);
    LatticeData f = Q;
    std::vector<double> eps;
    for (double cells : sc_.ladder.harnack_eps_cells) eps.push_back(cells * Q.spacing.maxCoeff());

    double lo = kInf, hi = 0.0;
    Json rungs = Json::array();
    for (const AuditRung& rung : res.rungs) {
      Q.values.clear();
      f.values.clear();
      for (const AuditSample& s : rung.samples) {
        Q.values.push_back(s.Q);
        f.values.push_back(s.masked ? 0.0
                                    : std::max(0.0, s.traceTerm - rung.fitted_C * (s.dQ_norm + s.Q)));
      }
      const HarnackReport h = harnack_audit(Q, f, sc_.ladder.harnack_q, eps);
      Json o = Json::object();
      o["degree"] = rung.degree;
      o["tau"] = rung.tau;
      o["f_ln"] = h.f_ln;
      o["eps"] = json_array(h.eps);
      o["mean_q"] = json_array(h.mean_q);
      o["inf"] = json_array(h.inf_v);
      o["ratio"] = json_array(h.ratio);
      rungs.push_back(std::move(o));
      for (double r : h.ratio) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    c["q"] = sc_.ladder.harnack_q;
    c["ladder"] = rungs;
    c["ratio_min"] = lo;
    c["ratio_max"] = hi;
    return lo > 0.0 && std::isfinite(hi) && hi <= 4.0 * lo;
  }

  bool deru(Json& c) {
    const auto& pts = points();
    const int n = sc_.box.dim();
    std::vector<double> worst(pts.size());
    detail::parallel_for(pts.size(), [&](std::size_t i) {
      double w = 0.0;
      for (int j = 0; j < n; ++j) w = std::max(w, std::abs(deru_residual(*op_, *field_, pts[i], j)));
      worst[i] = w;
    });
    double m = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < worst.size(); ++i)
      if (!(worst[i] <= m)) {
        m = worst[i];
        at = i;
      }
    c["points"] = pts.size();
    c["max_residual"] = m;
    c["witness_x"] = vec_json(pts[at]);
    return m <= sc_.tol.deru_tol;
  }
};

}  // namespace

RunOutcome run_scenario(const Scenario& sc, const RunOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunOutcome outcome;
  fs::path out = opt.output_dir ? fs::path(*opt.output_dir)
                                : (sc.output_dir.empty() ? fs::path("out") / sc.name : fs::path(sc.output_dir));
  outcome.output_dir = out.string();
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    outcome.exit_code = 3;
    outcome.error = "cannot create output directory " + out.string() + ": " + ec.message();
    return outcome;
  }
  for (const char* stale : {"summary.json", "audit.jsonl", "rankmap.csv", "meta.json", "field.grid"})
    fs::remove(out / stale, ec);

  Run run(sc, out);
  Json& s = run.summary;
  s["scenario"] = sc.name;
  s["description"] = sc.description;
  s["seed"] = sc.seed;
  s["dimension"] = sc.box.dim();
  std::string current = "field";
  try {
    run.prepare_field();
    if (run.solver_) s["solver"] = *run.solver_;
    s["checks"] = Json::object();
    for (const std::string& name : sc.checks) {
      current = "checks." + name;
      run.run_check(name);
      const bool pass = run.results.back().second;
      if (!opt.quiet) std::cout << "  " << name << ": " << (pass ? "pass" : "FAIL") << '\n';
      if (!pass && outcome.first_failure.empty()) outcome.first_failure = current;
    }
    outcome.exit_code = outcome.first_failure.empty() ? 0 : 2;
    s["result"] = outcome.exit_code == 0 ? "pass" : "fail";
  } catch (const Error& e) {
    outcome.exit_code = 3;
    outcome.first_failure = current;
    outcome.error = current + ": " + e.what();
    s["result"] = "error";
    s["error"] = outcome.error;
  }
  outcome.checks = run.results;
  s["exit_code"] = outcome.exit_code;
  s["first_failure"] = outcome.first_failure.empty() ? Json() : Json(outcome.first_failure);

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Json meta = Json::object();
  meta["version"] = RANKLAB_VERSION;
  meta["scenario"] = sc.name;
  meta["config_dir"] = sc.config_dir;
  meta["started"] = started;
  meta["finished"] = utc_now();
  meta["wall_seconds"] = wall;
  try {
    write_text(out / "summary.json", s.dump(2) + "\n");
    write_text(out / "meta.json", meta.dump(2) + "\n");
  } catch (const Error& e) {
    outcome.exit_code = 3;
    outcome.error = e.what();
  }
  return outcome;
}

RunOutcome run_scenario(const std::string& path, const RunOptions& opt) {
  Scenario sc;
  try {
    sc = load_scenario(path);
  } catch (const Error& e) {
    RunOutcome o;
    o.exit_code = 3;
    o.first_failure = "config";
    o.error = e.what();
    return o;
  }
  return run_scenario(sc, opt);
}

}  // namespace ranklab
