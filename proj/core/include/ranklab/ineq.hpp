#pragma once

#include "ranklab/field.hpp"
#include "ranklab/operator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ranklab {

/// Q = sum_{j<=ell} (ell+1-j) Lambda_j of D^2P with gradient and Hessian in world
/// coordinates. When masked (an eigenvalue gap below delta_gap) only Q is set.
struct QJet {
  Vector x;
  int ell = 0;
  double Q = 0.0;
  Vector dQ;
  SymMatrix d2Q;
  bool masked = false;
  /// max |naive - cancelled| / max(1, |naive|) for the two Hessian assemblies.
  double selfcheck = 0.0;
};

/// Naive assembly: sum_j (ell+1-j) d2lambda(j), eigenframe coordinates.
SymMatrix q_hessian_naive(const HessianEigenJet& jet, int ell);
/// Cancelled assembly, eigenframe coordinates:
/// sum_j w_j P_jjab + 2 sum_{j<m<=ell} (m-j) P_maj P_mbj / (Lambda_j - Lambda_m)
///                 + 2 sum_{j<=ell<m} w_j P_maj P_mbj / (Lambda_j - Lambda_m).
SymMatrix q_hessian_cancelled(const HessianEigenJet& jet, int ell);

QJet q_jet(const Jet4& jet, int ell, double delta_gap = -1.0);
QJet q_jet(const ScalarField& p, const Vector& x, int ell, double delta_gap = -1.0);

/// Second x_j derivative of F(D^2u, Du, u, x) expanded by the chain rule (13 terms).
/// Vanishes when u solves F = 0 on a neighborhood. j is 0-based.
double deru_residual(const Operator& op, const Jet4& jet, int j);
double deru_residual(const Operator& op, const ScalarField& f, const Vector& x, int j);

/// Proof-step quantities at one point; all sums in the eigenframe of D^2P.
struct ProofStepCheck {
  double star = 0.0;    // -sum_j w_j (form_j - S_j)
  double bound1 = 0.0;  // sum_j w_j S_j, S_j = 2 sum_{a,b,m>ell} F^{ab} P_maj P_mbj / Lambda_m
  double bound2 = 0.0;  // same with 1/(Lambda_m - Lambda_j)
  double num1_gap = 0.0;  // min(bound1 - star, bound2 - bound1)
  double num2_lhs = 0.0;
  double num2_rhs = 0.0;
  double num2_gap = 0.0;  // lhs - rhs
};

/// Evaluates the form at X_pq = -P_pqj (p,q > ell), Z = e_j, Y = P_j for each j <= ell,
/// and the second-order bound comparing pair terms with Q^{-1} |P_abi|^2.
ProofStepCheck proof_step_check(const OperatorJet& oj, const Jet4& pjet, int ell,
                                double delta_gap = -1.0);

struct AuditOptions {
  double tau_zero = 0.0;   // <= 0: default_tau_zero
  double delta_gap = -1.0;  // < 0: default per point
  double solution_tol = 1e-6;
  double form_tol = 1e-8;
  std::uint64_t seed = 0x5eed;
};

struct AuditSample {
  Vector x;
  double Q = 0.0;
  double dQ_norm = 0.0;
  double traceTerm = 0.0;
  std::vector<double> deru;  // per j, NaN where u has no jet
  double num1_gap = 0.0;
  double num2_gap = 0.0;
  double form_min = 0.0;
  std::vector<double> lower_dQ;  // |dQ^{(m)}| for m = 1..ell-1
  bool masked = false;
};

struct SlackQuantiles {
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max = 0.0;
};

struct AuditRung {
  int degree = 0;
  double tau = 0.0;
  FitReport fit;
  std::vector<AuditSample> samples;
  double fitted_C = 0.0;
  SlackQuantiles slack;
  std::size_t masked = 0;
  double masked_fraction = 0.0;
  bool valid = true;  // masked fraction <= 20%
  double sup_Q = 0.0;
  double max_dQ = 0.0;
  double min_num1_gap = 0.0;
  double min_num2_gap = 0.0;
  double min_form = 0.0;
  double max_deru = 0.0;
  std::vector<double> sup_lower_dQ;
  Polynomial P;

  AuditRung() : P(1, 0) {}
};

struct AuditResult {
  int ell = 0;
  int k = 0;
  double tau_zero = 0.0;
  double max_abs_F = 0.0;
  std::vector<AuditRung> rungs;
  bool monotone = true;  // q99 non-increasing along the ladder, 10% noise allowed
};

/// C candidates 0.5, 1, 2, ..., 2^10.
std::vector<double> slack_c_grid();
/// Linear-interpolation quantile of unsorted data, p in [0, 1].
double quantile(std::vector<double> data, double p);

/// One rung: fit, perturb, per-point pipeline and the C fit.
AuditRung audit_rung(const Operator& op, const ScalarField& u, const BoxDomain& box, int ell,
                     int degree, double tau, const AuditOptions& opt);

/// Checks the hypotheses (u solves F = 0, u convex, 1 <= ell <= k) and runs the
/// ladder of (degree, tau) rungs in order.
AuditResult differential_inequality_audit(const Operator& op, const ScalarField& u,
                                          const BoxDomain& box, int ell,
                                          const std::vector<std::pair<int, double>>& ladder,
                                          const AuditOptions& opt = {});

}  // namespace ranklab
