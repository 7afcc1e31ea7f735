#include "ranklab/operator.hpp"

#include "ranklab/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>

namespace ranklab {

double keyco_form(const OperatorJet& j, const SymMatrix& X, const Vector& Z, double Y) {
  const int n = j.dim();
  if (j.Ainv.dim() != n) throw PreconditionError("form needs A^{-1}; A is singular");
  if (X.dim() != n || Z.size() != n) throw InputError("form arguments have wrong dimension");
  const Matrix& x = X.matrix();
  double quartic = 0.0, cross_u = 0.0, cross_x = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double xab = x(a, b);
      if (xab == 0.0) continue;
      for (int r = 0; r < n; ++r) {
        for (int s = 0; s < n; ++s) quartic += j.Fabrs(a, b, r, s) * xab * x(r, s);
        cross_x += j.Fab_x(a, b, r) * xab * Z(r);
      }
      cross_u += j.Fab_u(a, b) * xab;
    }
  const double inverse_term = 2.0 * (j.Fab.matrix() * x * j.Ainv.matrix() * x).trace();
  return quartic + inverse_term + Z.dot(j.Fxx.matrix() * Z) - 2.0 * cross_u * Y - 2.0 * cross_x +
         2.0 * Y * j.Fux.dot(Z) + j.Fuu * Y * Y;
}

int form_dimension(int n) { return n * (n + 1) / 2 + n + 1; }

Vector form_coordinates(const SymMatrix& X, const Vector& Z, double Y) {
  const int n = X.dim();
  Vector v(form_dimension(n));
  int k = 0;
  for (int a = 0; a < n; ++a) v(k++) = X(a, a);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) v(k++) = std::sqrt(2.0) * X(a, b);
  for (int a = 0; a < n; ++a) v(k++) = Z(a);
  v(k) = Y;
  return v;
}

void form_from_coordinates(const Vector& v, int n, SymMatrix& X, Vector& Z, double& Y) {
  if (v.size() != form_dimension(n)) throw InputError("form coordinate vector has wrong size");
  X = SymMatrix(n);
  Z = Vector(n);
  int k = 0;
  for (int a = 0; a < n; ++a) X.set(a, a, v(k++));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) X.set(a, b, v(k++) / std::sqrt(2.0));
  for (int a = 0; a < n; ++a) Z(a) = v(k++);
  Y = v(k);
}

namespace {

double form_at(const OperatorJet& j, const Vector& v) {
  SymMatrix X;
  Vector Z;
  double Y;
  form_from_coordinates(v, j.dim(), X, Z, Y);
  return keyco_form(j, X, Z, Y);
}

}  // namespace

FormSpectrum form_spectrum(const OperatorJet& j) {
  const int n = j.dim();
  const int N = form_dimension(n);
  FormSpectrum out;
  out.n = n;
  out.matrix = Matrix::Zero(N, N);
  Vector diag(N);
  for (int i = 0; i < N; ++i) {
    Vector e = Vector::Zero(N);
    e(i) = 1.0;
    diag(i) = form_at(j, e);
    out.matrix(i, i) = diag(i);
  }
  // Polarization: M_ik = (q(e_i + e_k) - q(e_i) - q(e_k)) / 2.
  for (int i = 0; i < N; ++i)
    for (int k = i + 1; k < N; ++k) {
      Vector e = Vector::Zero(N);
      e(i) = e(k) = 1.0;
      out.matrix(i, k) = out.matrix(k, i) = 0.5 * (form_at(j, e) - diag(i) - diag(k));
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(out.matrix);
  out.min_eigenvalue = es.eigenvalues()(0);
  form_from_coordinates(es.eigenvectors().col(0), n, out.min_X, out.min_Z, out.min_Y);
  const int mx = n * (n + 1) / 2;
  out.x_block_min =
      Eigen::SelfAdjointEigenSolver<Matrix>(out.matrix.topLeftCorner(mx, mx), Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  return out;
}

StrictEta strict_eta(const OperatorJet& j) {
  const int n = j.dim();
  const int mx = n * (n + 1) / 2;
  const int mw = n + 1;
  const FormSpectrum fs = form_spectrum(j);
  const Matrix& M = fs.matrix;
  const Matrix Mxx = M.topLeftCorner(mx, mx);
  const Matrix Mxw = M.topRightCorner(mx, mw);
  const Matrix Mww = M.bottomRightCorner(mw, mw);
  const double tol = 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());

  StrictEta out;
  auto unpack = [&](const Vector& xpart, const Vector& wpart) {
    Vector v(mx + mw);
    v << xpart, wpart;
    form_from_coordinates(v, n, out.witness_X, out.witness_Z, out.witness_Y);
  };

  Eigen::SelfAdjointEigenSolver<Matrix> ew(Mww);
  const Vector& mu = ew.eigenvalues();
  const Matrix& U = ew.eigenvectors();
  if (mu(0) < -tol) {
    out.eta = -std::numeric_limits<double>::infinity();
    unpack(Vector::Zero(mx), U.col(0));
    return out;
  }
  Matrix pinv = Matrix::Zero(mw, mw);
  for (int i = 0; i < mw; ++i) {
    if (mu(i) > tol) {
      pinv += U.col(i) * U.col(i).transpose() / mu(i);
      continue;
    }
    out.zy_block_singular = true;
    const Vector c = Mxw * U.col(i);
    if (c.norm() > 1e-10 * std::max(1.0, M.cwiseAbs().maxCoeff())) {
      // Form is linear in t along (c, -t w0) for large t: unbounded below.
      out.eta = -std::numeric_limits<double>::infinity();
      unpack(c.normalized(), -U.col(i));
      return out;
    }
  }
  const Matrix S = Mxx - Mxw * pinv * Mxw.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (S + S.transpose()));
  out.eta = es.eigenvalues()(0);
  const Vector xv = es.eigenvectors().col(0);
  unpack(xv, -pinv * Mxw.transpose() * xv);
  return out;
}

// ---------------------------------------------------------------- direct check

double g_value(const Operator& op, const Vector& p, const GPoint& pt) {
  const int n = pt.B.dim();
  Eigen::LLT<Matrix> llt(pt.B.matrix());
  if (llt.info() != Eigen::Success) throw PreconditionError("sampler produced a singular or indefinite A");
  const SymMatrix A = SymMatrix::symmetrized(llt.solve(Matrix::Identity(n, n)));
  return op.value(OperatorState{A, p, pt.u, pt.x});
}

namespace {

GPoint midpoint(const GPoint& a, const GPoint& b) {
  return GPoint{0.5 * (a.B + b.B), 0.5 * (a.u + b.u), 0.5 * (a.x + b.x)};
}

double midpoint_violation(const Operator& op, const Vector& p, const GPoint& a, const GPoint& b) {
  return g_value(op, p, midpoint(a, b)) - 0.5 * (g_value(op, p, a) + g_value(op, p, b));
}

}  // namespace

ConvexityReport direct_convexity_check(const Operator& op, const Vector& p,
                                       const PairSampler& sampler, std::size_t trials,
                                       std::uint64_t seed) {
  ConvexityReport rep;
  for (std::size_t i = 0; i < trials; ++i) {
    CounterRng rng(seed, stream_id("direct_convexity"), i);
    auto pair = sampler(rng);
    const double v = midpoint_violation(op, p, pair.first, pair.second);
    ++rep.trials;
    if (v > rep.max_violation) {
      rep.max_violation = v;
      rep.witness = std::move(pair);
    }
  }
  return rep;
}

PairSampler neighborhood_sampler(const OperatorState& s, double radius) {
  const int n = s.dim();
  Eigen::LLT<Matrix> llt(s.A.matrix());
  if (llt.info() != Eigen::Success) throw PreconditionError("neighborhood sampler needs A positive definite");
  const SymMatrix B0 = SymMatrix::symmetrized(llt.solve(Matrix::Identity(n, n)));
  const double lmin = eigh(B0).eigenvalues(0);
  const double su = radius * std::max(1.0, std::abs(s.u));
  const double sx = radius * std::max(1.0, s.x.norm());
  return [B0, lmin, su, sx, radius, u0 = s.u, x0 = s.x, n](CounterRng& rng) {
    auto draw = [&]() {
      SymMatrix E = random_symmetric(n, rng);
      E *= radius * lmin / std::max(E.frobenius(), 1e-300);
      return GPoint{B0 + E, u0 + su * rng.uniform(-1.0, 1.0),
                    x0 + sx * random_vector(n, rng, -1.0, 1.0) / std::sqrt(static_cast<double>(n))};
    };
    GPoint a = draw();
    GPoint b = draw();
    return std::make_pair(std::move(a), std::move(b));
  };
}

ConvexityReport local_convexity_probe(const Operator& op, const OperatorState& s) {
  const int n = s.dim();
  const int N = form_dimension(n);
  Eigen::LLT<Matrix> llt(s.A.matrix());
  if (llt.info() != Eigen::Success) throw PreconditionError("convexity probe needs A positive definite");
  const SymMatrix B = SymMatrix::symmetrized(llt.solve(Matrix::Identity(n, n)));
  const Spectrum sb = eigh(B);
  const double bmax = sb.eigenvalues(n - 1);
  const GPoint c{B, s.u, s.x};

  // Direction d = (X', Z, Y) moves B by B X' B, which makes the second-difference
  // matrix comparable to the form in its own coordinates.
  auto shifted = [&](const Vector& d, double t) {
    SymMatrix X;
    Vector Z;
    double Y;
    form_from_coordinates(d, n, X, Z, Y);
    const Matrix W = B.matrix() * X.matrix() * B.matrix();
    return GPoint{B + t * SymMatrix::symmetrized(W), s.u + t * Y, s.x + t * Z};
  };
  double delta = 0.5 * sb.eigenvalues(0) / (bmax * bmax);
  if (s.x.norm() > 0.0) delta = std::min(delta, 0.25 * s.x.norm());
  delta = std::min(delta, 0.5);

  const double h = 1e-2 * delta;
  const double g0 = g_value(op, s.p, c);
  Matrix H(N, N);
  auto unit = [&](int i) {
    Vector e = Vector::Zero(N);
    e(i) = 1.0;
    return e;
  };
  for (int i = 0; i < N; ++i) {
    const Vector e = unit(i);
    H(i, i) = (g_value(op, s.p, shifted(e, h)) - 2.0 * g0 + g_value(op, s.p, shifted(e, -h))) / (h * h);
  }
  for (int i = 0; i < N; ++i)
    for (int k = i + 1; k < N; ++k) {
      const Vector pp = unit(i) + unit(k), pm = unit(i) - unit(k);
      const double v = g_value(op, s.p, shifted(pp, h)) + g_value(op, s.p, shifted(pp, -h)) -
                       g_value(op, s.p, shifted(pm, h)) - g_value(op, s.p, shifted(pm, -h));
      H(i, k) = H(k, i) = v / (4.0 * h * h);
    }
  Eigen::SelfAdjointEigenSolver<Matrix> es(H);
  const Vector v = es.eigenvectors().col(0);

  ConvexityReport rep;
  for (double t : {delta, 0.5 * delta, 0.25 * delta}) {
    const GPoint a = shifted(v, t), b = shifted(v, -t);
    double viol;
    try {
      viol = g0 - 0.5 * (g_value(op, s.p, a) + g_value(op, s.p, b));
    } catch (const ValidityError&) {
      continue;
    }
    ++rep.trials;
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.witness = std::make_pair(a, b);
    }
  }
  return rep;
}

}  // namespace ranklab
