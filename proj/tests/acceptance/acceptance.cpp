// One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

#include "oracles.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/ineq.hpp"
#include "ranklab/regularity.hpp"
#include "ranklab/scenario.hpp"
#include "ranklab/solver.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace ranklab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Tolerances, pinned.
constexpr double kEigRelTol = 1e-5;
constexpr double kWorkedTol = 1e-6;
constexpr double kEigRuntime = 10.0;
constexpr double kHConcavity = 1e-9;
constexpr double kFormThreshold = 1e-8;
constexpr double kFormUndecided = 1e-5;
constexpr double kDirectThreshold = 1e-8;
constexpr double kEtaLogdet = 1e-9;
constexpr double kEtaWeak = 1e-6;
constexpr double kDeru = 1e-8;
constexpr double kSlackEnd = 1e-4;
constexpr double kGap = 1e-8;
constexpr double kMasked = 0.05;
constexpr double kPipelineRuntime = 120.0;
constexpr double kCertificate = 1e-7;
constexpr double kFixedAngle = 1e-8;
constexpr double kMovingAngle = 0.01;
constexpr double kResidualB = 1e-3;
constexpr double kSemiconcavity = 1e-8;
constexpr double kSpread = 4.0;
constexpr double kCFloor = 1e-10;
constexpr double kNewtonExact = 1e-9;
constexpr double kLateRatio = 0.1;
constexpr double kRefineLo = 3.2, kRefineHi = 4.8;

const std::vector<std::string> kConvexCatalog{"trace_laplace", "logdet", "example33", "korevaar_lewis",
                                              "inverse_trace_general"};

struct Line {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const fs::path kOutA = fs::current_path() / "acceptance_out" / "a";
const fs::path kOutB = fs::current_path() / "acceptance_out" / "b";

struct ScenarioRun {
  RunOutcome outcome;
  double seconds = 0;
  json summary;
};

std::map<std::string, ScenarioRun> g_runs;

const ScenarioRun& run_once(const std::string& stem) {
  auto it = g_runs.find(stem);
  if (it != g_runs.end()) return it->second;
  ScenarioRun r;
  const auto t0 = std::chrono::steady_clock::now();
  r.outcome = run_scenario(std::string(RANKLAB_SCENARIO_DIR) + "/" + stem + ".toml",
                           RunOptions{(kOutA / stem).string(), true});
  r.seconds = seconds_since(t0);
  r.summary = json::parse(slurp(kOutA / stem / "summary.json"));
  return g_runs.emplace(stem, std::move(r)).first->second;
}

double rel_dev(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// 1 ------------------------------------------------------------------------
void eigenvalue_calculus(Line& L) {
  const auto t0 = std::chrono::steady_clock::now();
  int fields = 0;
  double worst = 0;
  for (std::uint64_t i = 0; fields < 50; ++i) {
    const int n = 2 + fields % 3;
    CounterRng rng(1001, static_cast<std::uint64_t>(n), i);
    const Polynomial P = oracle::random_polynomial(n, 4, rng);
    const Vector x = random_vector(n, rng, -0.5, 0.5);
    const Jet4 j4 = P.jet4(x);
    const HessianEigenJet ej = make_eigen_jet(j4.d2u, j4.d3u, j4.d4u);
    if (ej.gap_min() <= 1e-3) continue;
    ++fields;
    for (int k = 0; k < n; ++k) {
      const auto f = oracle::eigenvalue_fn(P, k);
      const Vector g = frame_to_world(ej.frame, dlambda(ej, k));
      worst = std::max(worst, rel_dev(g, oracle::fd_gradient_adaptive(f, x)));
      const SymMatrix h = frame_to_world(ej.frame, d2lambda(ej, k));
      worst = std::max(worst, rel_dev(h.matrix(), oracle::fd_hessian_adaptive(f, x)));
    }
  }
  Polynomial W(2, 3);
  W.set_coefficient({2, 0}, 0.5);
  W.set_coefficient({0, 2}, 1.5);
  W.set_coefficient({2, 1}, 1.0);
  const Jet4 wj = W.jet4(Vector::Zero(2));
  const HessianEigenJet we = make_eigen_jet(wj.d2u, wj.d3u, wj.d4u);
  const double worked = frame_to_world(we.frame, d2lambda(we, 0))(0, 0);
  const double secs = seconds_since(t0);
  L.detail << "fields=" << fields << " max_rel_dev=" << worst << " worked=" << worked << " runtime=" << secs << "s";
  L.require(worst <= kEigRelTol, "relative deviation");
  L.require(std::abs(worked + 4.0) <= kWorkedTol, "worked value");
  L.require(secs < kEigRuntime, "runtime");
}

// 2 ------------------------------------------------------------------------
void h_concavity(Line& L) {
  double lib = -1e300, orc = -1e300;
  for (int n = 1; n <= 5; ++n)
    for (int ell = 1; ell <= n; ++ell) {
      lib = std::max(lib, h_concavity_audit(n, ell, 10000, 2002));
      for (std::uint64_t i = 0; i < 10000; ++i) {
        CounterRng rng(2003, static_cast<std::uint64_t>(10 * n + ell), i);
        const Matrix a = random_symmetric(n, rng).matrix(), b = random_symmetric(n, rng).matrix();
        const double v = 0.5 * (oracle::weighted_small_sum(oracle::eigenvalues(a), ell) +
                                oracle::weighted_small_sum(oracle::eigenvalues(b), ell)) -
                         oracle::weighted_small_sum(oracle::eigenvalues(0.5 * (a + b)), ell);
        orc = std::max(orc, v);
      }
    }
  L.detail << "audit_max_violation=" << lib << " oracle_max_violation=" << orc;
  L.require(lib <= kHConcavity && orc <= kHConcavity, "midpoint violation");
}

// 3 ------------------------------------------------------------------------
void convexity_equivalence(Line& L) {
  int decided = 0, agree = 0, gray = 0, nonconvex = 0;
  for (std::size_t k = 0; k < kConvexCatalog.size(); ++k) {
    const auto op = make_operator(kConvexCatalog[k], {});
    for (std::uint64_t i = 0; i < 100; ++i) {
      CounterRng rng(3003, k, i);
      const int n = 2 + static_cast<int>(i % 2);
      const OperatorState s{random_spd(n, rng, 0.3, 2.0), random_vector(n, rng, -0.5, 0.5), rng.uniform(-0.5, 0.5),
                            random_vector(n, rng, 0.2, 1.0)};
      const double fmin = form_spectrum(operator_jet(*op, s)).min_eigenvalue;
      if (fmin < -kFormThreshold && fmin > -kFormUndecided) {
        ++gray;
        continue;
      }
      const bool form_convex = fmin >= -kFormThreshold;
      const double direct = std::max(direct_convexity_check(*op, s.p, neighborhood_sampler(s, 0.05), 200, 3004 + i).max_violation,
                                     local_convexity_probe(*op, s).max_violation);
      const bool direct_convex = direct <= kDirectThreshold;
      ++decided;
      nonconvex += !form_convex;
      agree += form_convex == direct_convex;
      if (form_convex != direct_convex)
        L.detail << " disagree(" << kConvexCatalog[k] << ", " << i << ": form " << fmin << ", direct " << direct << ")";
    }
  }
  L.detail << " decided=" << decided << " agree=" << agree << " undecided=" << gray << " form_nonconvex=" << nonconvex;
  L.require(decided > 0 && agree == decided, "sign agreement");
}

// 4 ------------------------------------------------------------------------
void strict_separation(Line& L) {
  double eta_logdet_dev = 0;
  for (int n = 2; n <= 4; ++n) {
    const OperatorState s{SymMatrix::identity(n), Vector::Zero(n), 0.0, Vector::Ones(n)};
    eta_logdet_dev = std::max(eta_logdet_dev, std::abs(strict_eta(operator_jet(*make_operator("logdet", {}), s)).eta - 1.0));
  }
  L.detail << "logdet |eta-1|=" << eta_logdet_dev;
  L.require(eta_logdet_dev <= kEtaLogdet, "logdet eta");
  // states from u = r on the radial box, A shifted by 1e-3 I
  const BoxDomain box((Vector(2) << 2.0, 0.0).finished(), 0.25, 5);
  for (const char* name : {"example33", "korevaar_lewis"}) {
    const auto op = make_operator(name, {});
    double fmin = 1e300, eta = -1e300, wit = -1e300;
    for (const Vector& x : box.points()) {
      const double r = x.norm();
      const Vector xh = x / r;
      const SymMatrix A =
          SymMatrix::symmetrized((Matrix::Identity(2, 2) - xh * xh.transpose()) / r) + 1e-3 * SymMatrix::identity(2);
      const double u = std::string(name) == "example33" ? r : 1.0 / A.trace();
      const OperatorJet j = operator_jet(*op, {A, xh, u, x});
      fmin = std::min(fmin, form_spectrum(j).min_eigenvalue);
      const StrictEta e = strict_eta(j);
      eta = std::max(eta, e.eta);
      if (std::abs(e.witness_X.frobenius() - 1.0) > 1e-12) wit = 1e300;
      wit = std::max(wit, keyco_form(j, e.witness_X, e.witness_Z, e.witness_Y));
    }
    L.detail << " " << name << ": form_min=" << fmin << " eta_max=" << eta << " witness_form_max=" << wit;
    L.require(fmin >= -kFormThreshold, std::string(name) + " form");
    L.require(eta <= kEtaWeak, std::string(name) + " eta");
    L.require(wit <= kEtaWeak, std::string(name) + " witness");
  }
}

// 5 ------------------------------------------------------------------------
void solution_identity(Line& L) {
  double lap = 0, ex = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(i % 2);
    CounterRng rng(5005, 0, i);
    const auto op = make_operator("trace_laplace", {{"c", {2.0 * n}}});
    std::vector<double> c(static_cast<std::size_t>(n), 2.0);
    const ScalarField u = builtin_field("quadratic", {{"c", c}}, n);
    const Vector x = random_vector(n, rng, -2, 2);
    for (int j = 0; j < n; ++j) lap = std::max(lap, std::abs(deru_residual(*op, u, x, j)));
  }
  const auto op = make_operator("example33", {});
  for (std::uint64_t i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(i % 2);
    CounterRng rng(5006, 0, i);
    const Vector x = random_vector(n, rng, -1, 1).normalized() * rng.uniform(1.0, 3.0);
    const ScalarField u = builtin_field("radial_r", {}, n);
    for (int j = 0; j < n; ++j) ex = std::max(ex, std::abs(deru_residual(*op, u, x, j)));
  }
  L.detail << "trace_laplace max=" << lap << " example33 max=" << ex;
  L.require(lap <= kDeru && ex <= kDeru, "residual");
}

// slack q99 recomputed from audit.jsonl with the reported C
double recomputed_q99(const fs::path& audit, int rung, double C) {
  std::ifstream in(audit);
  std::string line;
  std::vector<double> sl;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    if (j["rung"].get<int>() != rung || j["masked"].get<bool>()) continue;
    sl.push_back(std::max(0.0, j["traceTerm"].get<double>() - C * (j["dQ_norm"].get<double>() + j["Q"].get<double>())));
  }
  if (sl.empty()) return 0;
  std::sort(sl.begin(), sl.end());
  const double pos = 0.99 * static_cast<double>(sl.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sl.size() - 1);
  return sl[lo] + (pos - static_cast<double>(lo)) * (sl[hi] - sl[lo]);
}

// 6 ------------------------------------------------------------------------
void pipeline(Line& L) {
  for (const std::string stem : {"poisson_rank1", "poisson_rank1_n3"}) {
    const ScenarioRun& r = run_once(stem);
    const json& c = r.summary["checks"];
    const json& rank = c["rank"];
    const json& ineq = c["ineq"];
    const json& last = ineq["ladder"].back();
    const int rungs = static_cast<int>(ineq["ladder"].size());
    double masked = 0, num1 = 1e300, num2 = 1e300;
    for (const json& rung : ineq["ladder"]) {
      masked = std::max(masked, rung["masked_fraction"].get<double>());
      num1 = std::min(num1, rung["min_num1_gap"].get<double>());
      num2 = std::min(num2, rung["min_num2_gap"].get<double>());
    }
    const double q99 = last["slack_q99"].get<double>();
    const double q99_oracle = recomputed_q99(kOutA / stem / "audit.jsonl", rungs - 1, last["fitted_C"].get<double>());
    L.detail << " " << stem << ": exit=" << r.outcome.exit_code << " rank=" << rank["min_rank"] << ".." << rank["max_rank"]
             << " end(deg " << last["degree"] << ", tau " << last["tau"].get<double>() << ") q99=" << q99
             << " recomputed=" << q99_oracle << " num1_min=" << num1 << " num2_min=" << num2
             << " masked_max=" << masked << " runtime=" << r.seconds << "s";
    L.require(r.outcome.exit_code == 0, stem + " exit");
    L.require(rank["constant"].get<bool>() && rank["min_rank"] == 1 && rank["max_rank"] == 1, stem + " rank");
    L.require(last["degree"] == 6 && last["tau"].get<double>() == 1e-4, stem + " ladder end");
    L.require(q99 <= kSlackEnd && std::abs(q99 - q99_oracle) <= 1e-12 * std::max(1.0, q99), stem + " slack");
    L.require(num1 >= -kGap && num2 >= -kGap, stem + " proof-step gaps");
    L.require(masked < kMasked, stem + " masked fraction");
    L.require(r.seconds < kPipelineRuntime, stem + " runtime");
  }
}

// 7 ------------------------------------------------------------------------
void positive_case(Line& L) {
  for (const std::string stem : {"poisson_rank1", "poisson_rank1_n3"}) {
    const ScenarioRun& r = run_once(stem);
    const json& t = r.summary["checks"]["theorem2"];
    const json& rank = r.summary["checks"]["rank"];
    const double a = t["max_residual_a"], b = t["max_residual_b"], c = t["max_residual_c"];
    const double angle = rank["max_principal_angle"];
    const int n = r.summary["dimension"];
    // null space of c e1 e1^T: the span of e2..en
    const json& dirs = rank["fixed_null_directions"];
    double e1_component = 0;
    for (const json& d : dirs) e1_component = std::max(e1_component, std::abs(d[0].get<double>()));
    L.detail << " " << stem << ": points=" << t["points"] << " a=" << a << " b=" << b << " c=" << c
             << " angle=" << angle << " fixed=" << dirs.size() << " e1_component=" << e1_component;
    L.require(t["points"] == 50, stem + " certificate points");
    L.require(a <= kCertificate && b <= kCertificate && c <= kCertificate, stem + " residuals");
    L.require(angle <= kFixedAngle, stem + " principal angle");
    L.require(static_cast<int>(dirs.size()) == n - 1 && e1_component <= 1e-12, stem + " fixed directions");
  }
}

// 8 ------------------------------------------------------------------------
void counterexample(Line& L) {
  const ScenarioRun& r = run_once("radial_counterexample");
  const json& c = r.summary["checks"];
  const int n = r.summary["dimension"];
  const double angle = c["rank"]["max_principal_angle"];
  const double b = c["theorem2"]["max_residual_b"];
  // the null direction at x is x/|x|; widest pair of polar directions on the lattice
  const BoxDomain box((Vector(2) << 2.0, 0.0).finished(), 0.25, 21);
  double spread = 0;
  for (const Vector& x : box.points())
    for (const Vector& y : box.points())
      spread = std::max(spread, std::acos(std::min(1.0, std::abs(x.dot(y)) / (x.norm() * y.norm()))));
  L.detail << "rank=" << c["rank"]["min_rank"] << ".." << c["rank"]["max_rank"] << " angle=" << angle
           << " lattice_spread=" << spread << " residual_b=" << b << " convexity=" << c["convexity"]["pass"];
  L.require(c["rank"]["constant"].get<bool>() && c["rank"]["min_rank"] == n - 1 && c["rank"]["max_rank"] == n - 1,
            "rank");
  L.require(angle >= kMovingAngle && angle <= spread + 1e-12, "principal angle");
  L.require(b >= kResidualB, "residual b");
  L.require(c["convexity"]["pass"].get<bool>(), "convexity");
}

// 9 ------------------------------------------------------------------------
void regularity(Line& L) {
  for (const std::string stem : {"poisson_rank1", "poisson_rank1_n3"}) {
    const ScenarioRun& r = run_once(stem);
    const json& sc = r.summary["checks"]["semiconcavity"];
    double viol = -1e300, dir = -1e300, cmin = 1e300, cmax = 0;
    bool within_lemma = true;
    for (const json& rung : sc["ladder"]) {
      viol = std::max(viol, rung["max_violation"].get<double>());
      dir = std::max(dir, rung["directional_violation"].get<double>());
      const double C = std::max(kCFloor, rung["C_fit"].get<double>());
      cmin = std::min(cmin, C);
      cmax = std::max(cmax, C);
      within_lemma = within_lemma && rung["C_fit"].get<double>() <= rung["C_lemma"].get<double>();
    }
    const json& h = r.summary["checks"]["harnack"];
    double rmin = 1e300, rmax = 0;
    bool eps_ok = true;
    // half-width 0.5 on 21 (n = 2) or 13 (n = 3) points per axis
    const double hh = stem == "poisson_rank1" ? 1.0 / 20 : 1.0 / 12;
    for (const json& rung : h["ladder"]) {
      const auto eps = rung["eps"].get<std::vector<double>>();
      eps_ok = eps_ok && eps.size() == 3 && std::abs(eps[0] - 2 * hh) < 1e-12 && std::abs(eps[1] - 4 * hh) < 1e-12 &&
               std::abs(eps[2] - 8 * hh) < 1e-12;
      for (double v : rung["ratio"].get<std::vector<double>>()) {
        rmin = std::min(rmin, v);
        rmax = std::max(rmax, v);
      }
    }
    L.detail << " " << stem << ": violation=" << viol << " directional=" << dir << " C_fit_spread=" << cmax / cmin
             << " harnack_ratio=[" << rmin << ", " << rmax << "] q=" << h["q"];
    L.require(viol <= kSemiconcavity && dir <= kSemiconcavity, stem + " semiconcavity");
    L.require(within_lemma && cmax <= kSpread * cmin, stem + " C_fit");
    L.require(eps_ok && h["q"].get<double>() == 0.5, stem + " harnack radii");
    L.require(rmin > 0 && rmax <= kSpread * rmin, stem + " harnack ratio");
  }
}

// 10 -----------------------------------------------------------------------
void solver(Line& L) {
  {
    DiscreteProblem p{make_operator("trace_laplace", {{"c", {4.0}}}),
                      BoxDomain((Vector(2) << 0.2, -0.1).finished(), 0.5, 17),
                      [](const Vector& x) { return x.squaredNorm(); }, [](const Vector&) { return 0.0; }};
    const NewtonResult r = newton_solve(p);
    double err = 0;
    for (std::size_t i = 0; i < p.box.point_count(); ++i)
      err = std::max(err, std::abs(r.field.values()[i] - p.box.point(i).squaredNorm()));
    L.detail << "trace_laplace steps=" << r.trace.step_inf.size() << " error=" << err;
    L.require(r.trace.step_inf.size() == 1 && err <= kNewtonExact, "linear one step");
  }
  {
    const auto half = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    DiscreteProblem p{make_operator("logdet", {}), BoxDomain(Vector::Zero(2), 1.0, 17), half,
                      [&](const Vector& x) { return half(x) + 0.05 * (1 - x(0) * x(0)) * (1 - x(1) * x(1)); }};
    NewtonOptions opt;
    opt.keep_iterates = true;
    opt.tol = 1e-13;
    const NewtonResult r = newton_solve(p, opt);
    const Vector exact = lattice_values(p.box, half);
    std::vector<double> err;
    for (const Vector& u : r.trace.iterates) err.push_back((u - exact).cwiseAbs().maxCoeff());
    double worst = 0;
    int late = 0;
    for (std::size_t k = 1; k < err.size(); ++k)
      if (err[k - 1] < 1e-2 && err[k] > 1e-11) {
        worst = std::max(worst, err[k] / err[k - 1]);
        ++late;
      }
    L.detail << " logdet iterations=" << r.trace.step_inf.size() << " late_ratio_max=" << worst << " (" << late
             << " steps)";
    L.require(r.trace.converged && late >= 1 && worst <= kLateRatio, "logdet late ratio");
  }
  {
    const auto rad = [](const Vector& x) { return x.norm(); };
    double err[2];
    for (int k = 0; k < 2; ++k) {
      DiscreteProblem p{make_operator("example33", {}), BoxDomain((Vector(2) << 2.0, 0.0).finished(), 0.25, k ? 17 : 9),
                        rad, {}};
      const NewtonResult r = newton_solve(p);
      err[k] = 0;
      for (std::size_t i = 0; i < p.box.point_count(); ++i)
        err[k] = std::max(err[k], std::abs(r.field.values()[i] - rad(p.box.point(i))));
    }
    L.detail << " example33 refinement=" << err[0] / err[1];
    L.require(err[0] / err[1] >= kRefineLo && err[0] / err[1] <= kRefineHi, "refinement factor");
  }
}

// 11 -----------------------------------------------------------------------
void determinism(Line& L) {
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(RANKLAB_SCENARIO_DIR))
    if (e.path().extension() == ".toml") stems.push_back(e.path().stem().string());
  std::sort(stems.begin(), stems.end());
  for (const std::string& s : stems) {
    run_once(s);
    run_scenario(std::string(RANKLAB_SCENARIO_DIR) + "/" + s + ".toml", RunOptions{(kOutB / s).string(), true});
    const bool same = slurp(kOutA / s / "summary.json") == slurp(kOutB / s / "summary.json");
    L.detail << " " << s << (same ? "=identical" : "=DIFFERENT");
    L.require(same, s);
  }
  L.require(!stems.empty(), "no bundled scenarios");
}

}  // namespace

int main() {
  fs::remove_all(fs::current_path() / "acceptance_out");
  struct Criterion {
    int id;
    const char* name;
    void (*fn)(Line&);
  };
  const Criterion all[] = {
      {1, "eigenvalue calculus", eigenvalue_calculus},
      {2, "concavity of h", h_concavity},
      {3, "convexity-condition equivalence", convexity_equivalence},
      {4, "strict vs non-strict separation", strict_separation},
      {5, "solution identity", solution_identity},
      {6, "differential inequality pipeline", pipeline},
      {7, "fixed null directions", positive_case},
      {8, "counterexample detection", counterexample},
      {9, "regularity lemmas", regularity},
      {10, "solver", solver},
      {11, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    Line L;
    try {
      c.fn(L);
    } catch (const std::exception& e) {
      L.pass = false;
      L.detail << " [exception: " << e.what() << "]";
    }
    failed += !L.pass;
    std::printf("%s %2d %s: %s\n", L.pass ? "PASS" : "FAIL", c.id, c.name, L.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, std::size(all));
  return failed ? 1 : 0;
}
