#include "ranklab/ineq.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/field_io.hpp"
#include "ranklab/rank.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>

namespace ranklab {

std::vector<double> slack_c_grid() {
  std::vector<double> g{0.5};
  for (int k = 0; k <= 10; ++k) g.push_back(std::ldexp(1.0, k));
  return g;
}

double quantile(std::vector<double> data, double p) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(data.begin(), data.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  return data[lo] + (pos - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

AuditRung audit_rung(const Operator& op, const ScalarField& u, const BoxDomain& box, int ell,
                     int degree, double tau, const AuditOptions& opt) {
  AuditRung rung;
  rung.degree = degree;
  rung.tau = tau;
  auto [fit, report] = fit_polynomial(u, box, degree);
  rung.fit = report;
  PerturbOptions popt;
  popt.seed = opt.seed;
  rung.P = perturb_to_distinct(fit, box, tau, popt);
  const Polynomial& P = rung.P;
  const int n = box.dim();

  const auto pts = box.points();
  rung.samples.resize(pts.size());
  detail::parallel_for(pts.size(), [&](std::size_t i) {
    AuditSample& s = rung.samples[i];
    s.x = pts[i];
    const Jet4 jet = P.jet4(s.x);
    const QJet q = q_jet(jet, ell, opt.delta_gap);
    s.Q = q.Q;
    s.masked = q.masked;
    s.deru.assign(n, std::numeric_limits<double>::quiet_NaN());
    if (u.can_evaluate(s.x))
      for (int j = 0; j < n; ++j) s.deru[j] = deru_residual(op, u, s.x, j);
    if (s.masked) return;
    s.dQ_norm = q.dQ.norm();
    const OperatorJet oj = operator_jet(op, OperatorState{jet.d2u, jet.du, jet.u, s.x});
    s.traceTerm = (oj.Fab.matrix().array() * q.d2Q.matrix().array()).sum();
    const ProofStepCheck c = proof_step_check(oj, jet, ell, opt.delta_gap);
    s.num1_gap = c.num1_gap;
    s.num2_gap = c.num2_gap;
    s.form_min = form_spectrum(oj).min_eigenvalue;
    for (int m = 1; m < ell; ++m) s.lower_dQ.push_back(q_jet(jet, m, opt.delta_gap).dQ.norm());
  });

  std::vector<const AuditSample*> live;
  for (const auto& s : rung.samples) {
    if (s.masked)
      ++rung.masked;
    else
      live.push_back(&s);
  }
  rung.masked_fraction = static_cast<double>(rung.masked) / static_cast<double>(pts.size());
  rung.valid = rung.masked_fraction <= 0.2 && !live.empty();

  rung.min_num1_gap = rung.min_num2_gap = rung.min_form = std::numeric_limits<double>::infinity();
  rung.sup_lower_dQ.assign(static_cast<std::size_t>(ell - 1), 0.0);
  for (const AuditSample* s : live) {
    rung.sup_Q = std::max(rung.sup_Q, s->Q);
    rung.max_dQ = std::max(rung.max_dQ, s->dQ_norm);
    rung.min_form = std::min(rung.min_form, s->form_min);
    rung.min_num2_gap = std::min(rung.min_num2_gap, s->num2_gap);
    // The star bound is only implied where the form is non-negative.
    if (s->form_min >= -opt.form_tol) rung.min_num1_gap = std::min(rung.min_num1_gap, s->num1_gap);
    for (std::size_t m = 0; m < s->lower_dQ.size(); ++m)
      rung.sup_lower_dQ[m] = std::max(rung.sup_lower_dQ[m], s->lower_dQ[m]);
  }
  for (const auto& s : rung.samples)
    for (double d : s.deru)
      if (std::isfinite(d)) rung.max_deru = std::max(rung.max_deru, std::abs(d));

  auto slacks = [&](double C) {
    std::vector<double> out;
    out.reserve(live.size());
    for (const AuditSample* s : live) out.push_back(std::max(0.0, s->traceTerm - C * (s->dQ_norm + s->Q)));
    return out;
  };
  double best = std::numeric_limits<double>::infinity();
  for (double C : slack_c_grid()) {
    const auto sl = slacks(C);
    const double worst = sl.empty() ? 0.0 : *std::max_element(sl.begin(), sl.end());
    if (worst < best) {
      best = worst;
      rung.fitted_C = C;
    }
  }
  const auto sl = slacks(rung.fitted_C);
  rung.slack = SlackQuantiles{quantile(sl, 0.5), quantile(sl, 0.9), quantile(sl, 0.99),
                              sl.empty() ? 0.0 : *std::max_element(sl.begin(), sl.end())};
  return rung;
}

AuditResult differential_inequality_audit(const Operator& op, const ScalarField& u,
                                          const BoxDomain& box, int ell,
                                          const std::vector<std::pair<int, double>>& ladder,
                                          const AuditOptions& opt) {
  if (ladder.empty()) throw InputError("audit ladder is empty");
  AuditResult res;
  res.ell = ell;
  const auto pts = u.sample_points(box);
  if (pts.empty()) throw InputError("audit: no lattice point admits a jet");
  std::vector<double> F(pts.size());
  detail::parallel_for(pts.size(), [&](std::size_t i) {
    const Jet4 j = u.jet4(pts[i]);
    F[i] = std::abs(op.value(OperatorState{j.d2u, j.du, j.u, pts[i]}));
  });
  res.max_abs_F = *std::max_element(F.begin(), F.end());
  if (res.max_abs_F > opt.solution_tol)
    throw PreconditionError("audit: field does not solve F = 0 on the box (max |F| = " +
                            format_double(res.max_abs_F) + ")");

  res.tau_zero = opt.tau_zero > 0.0 ? opt.tau_zero : default_tau_zero(u, box);
  const RankMap rm = rank_map(u, box, res.tau_zero);
  int max_rank = 0;
  for (const auto& s : rm.samples) max_rank = std::max(max_rank, s.rank);
  res.k = box.dim() - max_rank;
  if (ell < 1 || ell > res.k)
    throw PreconditionError("audit: level " + std::to_string(ell) + " needs 1 <= ell <= k = " +
                            std::to_string(res.k) + " (number of null eigenvalues)");

  for (const auto& [degree, tau] : ladder) res.rungs.push_back(audit_rung(op, u, box, ell, degree, tau, opt));
  for (std::size_t i = 1; i < res.rungs.size(); ++i)
    if (res.rungs[i].slack.q99 > 1.1 * res.rungs[i - 1].slack.q99 + 1e-12) res.monotone = false;
  return res;
}

}  // namespace ranklab
