#include "ranklab/ineq.hpp"

#include "ranklab/errors.hpp"

#include <cmath>

namespace ranklab {

SymMatrix q_hessian_naive(const HessianEigenJet& jet, int ell) {
  SymMatrix h(jet.dim());
  for (int j = 0; j < ell; ++j) h += q_weight(ell, j) * d2lambda(jet, j);
  return h;
}

SymMatrix q_hessian_cancelled(const HessianEigenJet& jet, int ell) {
  const int n = jet.dim();
  const Vector& lam = jet.eigenvalues;
  SymMatrix h(n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double v = 0.0;
      for (int j = 0; j < ell; ++j) {
        v += q_weight(ell, j) * jet.d4(j, j, a, b);
        for (int m = j + 1; m < ell; ++m)
          v += 2.0 * (m - j) * jet.d3(m, a, j) * jet.d3(m, b, j) / (lam(j) - lam(m));
        for (int m = ell; m < n; ++m)
          v += 2.0 * q_weight(ell, j) * jet.d3(m, a, j) * jet.d3(m, b, j) / (lam(j) - lam(m));
      }
      h.set(a, b, v);
    }
  return h;
}

QJet q_jet(const Jet4& jet, int ell, double delta_gap) {
  const int n = jet.dim();
  if (ell < 1 || ell > n) throw InputError("q_jet: level out of range");
  const HessianEigenJet ej = make_eigen_jet(jet.d2u, jet.d3u, jet.d4u, delta_gap);
  QJet q;
  q.x = jet.x;
  q.ell = ell;
  q.Q = q_ell(ej.eigenvalues, ell);
  q.dQ = Vector::Zero(n);
  q.d2Q = SymMatrix(n);
  q.masked = ej.gap_min() < ej.delta_gap;
  if (q.masked) return q;

  Vector g = Vector::Zero(n);
  for (int j = 0; j < ell; ++j) g += q_weight(ell, j) * dlambda(ej, j);
  const SymMatrix naive = q_hessian_naive(ej, ell);
  const SymMatrix cancelled = q_hessian_cancelled(ej, ell);
  const double scale = std::max(1.0, naive.matrix().cwiseAbs().maxCoeff());
  q.selfcheck = (naive.matrix() - cancelled.matrix()).cwiseAbs().maxCoeff() / scale;
  q.dQ = frame_to_world(ej.frame, g);
  q.d2Q = frame_to_world(ej.frame, cancelled);
  return q;
}

QJet q_jet(const ScalarField& p, const Vector& x, int ell, double delta_gap) {
  return q_jet(p.jet4(x), ell, delta_gap);
}

double deru_residual(const Operator& op, const Jet4& jet, int j) {
  const int n = jet.dim();
  if (j < 0 || j >= n) throw InputError("deru_residual: direction out of range");
  const OperatorJet f = operator_jet(op, OperatorState{jet.d2u, jet.du, jet.u, jet.x});
  const Tensor3& u3 = jet.d3u;
  const Tensor4& u4 = jet.d4u;
  const Matrix& u2 = jet.d2u.matrix();
  const double uj = jet.du(j);

  double s = f.Fu * u2(j, j) + f.Fuu * uj * uj + 2.0 * f.Fux(j) * uj + f.Fxx(j, j);
  for (int a = 0; a < n; ++a) {
    s += f.Fp(a) * u3(a, j, j);
    s += 2.0 * f.Fpu(a) * u2(a, j) * uj + 2.0 * f.Fpx(a, j) * u2(a, j);
    for (int r = 0; r < n; ++r) s += f.Fpp(a, r) * u2(a, j) * u2(r, j);
    for (int b = 0; b < n; ++b) {
      const double uabj = u3(a, b, j);
      s += f.Fab(a, b) * u4(a, b, j, j);
      s += 2.0 * f.Fab_u(a, b) * uabj * uj + 2.0 * f.Fab_x(a, b, j) * uabj;
      for (int r = 0; r < n; ++r) {
        s += 2.0 * f.Fab_p(a, b, r) * uabj * u2(r, j);
        for (int t = 0; t < n; ++t) s += f.Fabrs(a, b, r, t) * uabj * u3(r, t, j);
      }
    }
  }
  return s;
}

double deru_residual(const Operator& op, const ScalarField& f, const Vector& x, int j) {
  return deru_residual(op, f.jet4(x), j);
}

ProofStepCheck proof_step_check(const OperatorJet& oj, const Jet4& pjet, int ell,
                                double delta_gap) {
  const int n = pjet.dim();
  if (ell < 1 || ell > n) throw InputError("proof_step_check: level out of range");
  const HessianEigenJet ej = make_eigen_jet(pjet.d2u, pjet.d3u, pjet.d4u, delta_gap);
  if (ej.gap_min() < ej.delta_gap) throw DegeneracyError("proof_step_check: repeated eigenvalue");
  const Matrix& V = ej.frame;
  const Vector& lam = ej.eigenvalues;
  const Tensor3& d3 = ej.d3;
  const Matrix Fe = V.transpose() * oj.Fab.matrix() * V;
  const Vector dp = V.transpose() * pjet.du;

  // F-weighted pair sum sum_{a,b in range} Fe_ab P_maj P_mbj.
  auto pair = [&](int m, int j, int lo) {
    double s = 0.0;
    for (int a = lo; a < n; ++a)
      for (int b = lo; b < n; ++b) s += Fe(a, b) * d3(m, a, j) * d3(m, b, j);
    return s;
  };

  ProofStepCheck c;
  for (int j = 0; j < ell; ++j) {
    const double w = q_weight(ell, j);
    Matrix Xf = Matrix::Zero(n, n);
    for (int p = ell; p < n; ++p)
      for (int q = ell; q < n; ++q) Xf(p, q) = -d3(p, q, j);
    const SymMatrix X = SymMatrix::symmetrized(V * Xf * V.transpose());
    const double form = keyco_form(oj, X, V.col(j), dp(j));
    double s1 = 0.0, s2 = 0.0;
    for (int m = ell; m < n; ++m) {
      const double t = 2.0 * pair(m, j, ell);
      s1 += t / lam(m);
      s2 += t / (lam(m) - lam(j));
    }
    c.star -= w * (form - s1);
    c.bound1 += w * s1;
    c.bound2 += w * s2;
  }
  c.num1_gap = std::min(c.bound1 - c.star, c.bound2 - c.bound1);

  for (int j = 0; j < ell; ++j)
    for (int m = j + 1; m < ell; ++m)
      c.num2_lhs += 2.0 * (m - j) * pair(m, j, 0) / (lam(m) - lam(j));
  double third = 0.0;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < ell; ++a)
      for (int b = a + 1; b < ell; ++b) third += d3(a, b, i) * d3(a, b, i);
  const double Q = q_ell(lam, ell);
  const double cmin = eigh(oj.Fab).eigenvalues(0);
  if (third == 0.0)
    c.num2_rhs = 0.0;
  else
    c.num2_rhs = Q > 0.0 ? cmin * third / Q : std::numeric_limits<double>::infinity();
  c.num2_gap = c.num2_lhs - c.num2_rhs;
  return c;
}

}  // namespace ranklab
