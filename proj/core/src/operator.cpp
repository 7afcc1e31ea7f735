#include "ranklab/operator.hpp"

#include "ranklab/errors.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace ranklab {

OperatorJet OperatorJet::zero(int n) {
  OperatorJet j;
  j.Fab = SymMatrix(n);
  j.Fp = Vector::Zero(n);
  j.Fx = Vector::Zero(n);
  j.Fabrs = Tensor4(n);
  j.Fab_p = Tensor3(n);
  j.Fab_u = SymMatrix(n);
  j.Fab_x = Tensor3(n);
  j.Fpp = SymMatrix(n);
  j.Fpu = Vector::Zero(n);
  j.Fpx = Matrix::Zero(n, n);
  j.Fux = Vector::Zero(n);
  j.Fxx = SymMatrix(n);
  return j;
}

std::optional<OperatorJet> Operator::analytic_jet(const OperatorState&) const {
  return std::nullopt;
}

namespace {

void check_state(const OperatorState& s) {
  const int n = s.dim();
  if (n < 1) throw InputError("operator state has empty A");
  if (s.p.size() != n || s.x.size() != n) throw InputError("operator state dimensions differ");
  if (!s.A.all_finite() || !s.p.allFinite() || !std::isfinite(s.u) || !s.x.allFinite())
    throw InputError("operator state has non-finite entries");
}

double param(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw InputError("operator parameter '" + key + "' must be a scalar");
  return it->second.front();
}

void reject_unknown(const ParamMap& p, std::initializer_list<const char*> known,
                    const std::string& op) {
  for (const auto& [key, _] : p) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InputError("unknown parameter '" + key + "' for operator " + op);
  }
}

double positive_trace(const OperatorState& s, const char* who) {
  const double t = s.A.trace();
  if (!(t > 0.0)) throw ValidityError(std::string(who) + ": tr A must be positive");
  return t;
}

void fill_identity_pairs(OperatorJet& j, int n, double diag, double pair) {
  for (int a = 0; a < n; ++a) {
    j.Fab.set(a, a, diag);
    for (int r = 0; r < n; ++r) j.Fabrs(a, a, r, r) = pair;
  }
}

class TraceLaplace : public Operator {
 public:
  explicit TraceLaplace(double c) : c_(c) {}
  std::string name() const override { return "trace_laplace"; }
  bool requires_positive_definite() const override { return false; }
  double value(const OperatorState& s) const override { return s.A.trace() - c_; }
  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    OperatorJet j = OperatorJet::zero(s.dim());
    j.F = value(s);
    fill_identity_pairs(j, s.dim(), 1.0, 0.0);
    return j;
  }

 private:
  double c_;
};

class NegTrace : public Operator {
 public:
  std::string name() const override { return "neg_trace"; }
  bool requires_positive_definite() const override { return false; }
  double value(const OperatorState& s) const override { return -s.A.trace(); }
  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    OperatorJet j = OperatorJet::zero(s.dim());
    j.F = value(s);
    fill_identity_pairs(j, s.dim(), -1.0, 0.0);
    return j;
  }
};

class LogDet : public Operator {
 public:
  explicit LogDet(double c) : c_(c) {}
  std::string name() const override { return "logdet"; }
  double value(const OperatorState& s) const override {
    Eigen::LLT<Matrix> llt(s.A.matrix());
    if (llt.info() != Eigen::Success) throw ValidityError("logdet: A is not positive definite");
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum() - c_;
  }
  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    const int n = s.dim();
    OperatorJet j = OperatorJet::zero(n);
    j.F = value(s);
    const Matrix inv = Eigen::LLT<Matrix>(s.A.matrix()).solve(Matrix::Identity(n, n));
    j.Fab = SymMatrix::symmetrized(inv);
    const Matrix& ai = j.Fab.matrix();
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int r = 0; r < n; ++r)
          for (int t = 0; t < n; ++t)
            j.Fabrs(a, b, r, t) = -0.5 * (ai(a, r) * ai(t, b) + ai(a, t) * ai(r, b));
    return j;
  }

 private:
  double c_;
};

class Example33 : public Operator {
 public:
  std::string name() const override { return "example33"; }
  double value(const OperatorState& s) const override {
    const double t = positive_trace(s, "example33");
    const double r = s.x.norm();
    if (!(r > 0.0)) throw ValidityError("example33: x must be nonzero");
    return r - (s.dim() - 1) / t;
  }
  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    const int n = s.dim();
    OperatorJet j = OperatorJet::zero(n);
    j.F = value(s);
    const double t = s.A.trace();
    const double r = s.x.norm();
    const double k = n - 1;
    fill_identity_pairs(j, n, k / (t * t), -2.0 * k / (t * t * t));
    j.Fx = s.x / r;
    const Vector xh = s.x / r;
    j.Fxx = SymMatrix::symmetrized((Matrix::Identity(n, n) - xh * xh.transpose()) / r);
    return j;
  }
};

class KorevaarLewis : public Operator {
 public:
  std::string name() const override { return "korevaar_lewis"; }
  double value(const OperatorState& s) const override {
    return s.u - 1.0 / positive_trace(s, "korevaar_lewis");
  }
  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    const int n = s.dim();
    OperatorJet j = OperatorJet::zero(n);
    j.F = value(s);
    const double t = s.A.trace();
    fill_identity_pairs(j, n, 1.0 / (t * t), -2.0 / (t * t * t));
    j.Fu = 1.0;
    return j;
  }
};

class InverseTraceGeneral : public Operator {
 public:
  struct Coeffs {
    double m = 1.0, g = 0.0, h = 0.0, k = 0.0;
    double a = 0.0, b = 0.0, w = 0.0, s = 0.0, e = 0.0, v = 0.0, c = 0.0;
  };
  explicit InverseTraceGeneral(Coeffs k) : k_(k) {}
  std::string name() const override { return "inverse_trace_general"; }

  double mu(const OperatorState& s) const { return k_.m + k_.g * s.u + k_.h * s.x(0) + k_.k * s.p(0); }

  double value(const OperatorState& s) const override {
    const double t = positive_trace(s, "inverse_trace_general");
    const double m = mu(s);
    if (!(m > 0.0)) throw ValidityError("inverse_trace_general: mu must be positive");
    return -m / t + k_.a * s.u + 0.5 * k_.b * s.u * s.u + 0.5 * k_.w * s.x.squaredNorm() +
           k_.s * s.u * s.x(0) + 0.5 * k_.e * s.p.squaredNorm() + k_.v * s.p(0) * (s.u + s.x(0)) -
           k_.c;
  }

  std::optional<OperatorJet> analytic_jet(const OperatorState& s) const override {
    const int n = s.dim();
    OperatorJet j = OperatorJet::zero(n);
    j.F = value(s);
    const double t = s.A.trace();
    const double m = mu(s);
    const double t2 = t * t;
    fill_identity_pairs(j, n, m / t2, -2.0 * m / (t2 * t));
    for (int a = 0; a < n; ++a) {
      j.Fab_u.set(a, a, k_.g / t2);
      j.Fab_x(a, a, 0) = k_.h / t2;
      j.Fab_p(a, a, 0) = k_.k / t2;
    }
    j.Fp = k_.e * s.p;
    j.Fp(0) += -k_.k / t + k_.v * (s.u + s.x(0));
    j.Fu = -k_.g / t + k_.a + k_.b * s.u + k_.s * s.x(0) + k_.v * s.p(0);
    j.Fx = k_.w * s.x;
    j.Fx(0) += -k_.h / t + k_.s * s.u + k_.v * s.p(0);
    j.Fpp = k_.e * SymMatrix::identity(n);
    j.Fpu(0) = k_.v;
    j.Fpx(0, 0) = k_.v;
    j.Fuu = k_.b;
    j.Fux(0) = k_.s;
    j.Fxx = k_.w * SymMatrix::identity(n);
    return j;
  }

 private:
  Coeffs k_;
};

// Coordinates of the finite-difference state vector.
struct Layout {
  int n;
  int m;  // n(n+1)/2 symmetric A coordinates, diagonal first
  std::vector<std::pair<int, int>> pairs;

  explicit Layout(int n_) : n(n_), m(n_ * (n_ + 1) / 2) {
    for (int a = 0; a < n; ++a) pairs.emplace_back(a, a);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  int size() const { return m + 2 * n + 1; }
  int p(int i) const { return m + i; }
  int u() const { return m + n; }
  int x(int i) const { return m + n + 1 + i; }
  double weight(int k) const { return pairs[k].first == pairs[k].second ? 1.0 : 2.0; }

  Vector pack(const OperatorState& s) const {
    Vector v(size());
    for (int k = 0; k < m; ++k) v(k) = s.A(pairs[k].first, pairs[k].second);
    for (int i = 0; i < n; ++i) {
      v(p(i)) = s.p(i);
      v(x(i)) = s.x(i);
    }
    v(u()) = s.u;
    return v;
  }
  OperatorState unpack(const Vector& v) const {
    OperatorState s{SymMatrix(n), Vector(n), v(u()), Vector(n)};
    for (int k = 0; k < m; ++k) s.A.set(pairs[k].first, pairs[k].second, v(k));
    for (int i = 0; i < n; ++i) {
      s.p(i) = v(p(i));
      s.x(i) = v(x(i));
    }
    return s;
  }
};

std::optional<SymMatrix> safe_inverse(const SymMatrix& a) {
  const Spectrum sp = eigh(a);
  const double scale = std::max(1.0, sp.eigenvalues.cwiseAbs().maxCoeff());
  if (sp.eigenvalues.cwiseAbs().minCoeff() <= 1e-14 * scale) return std::nullopt;
  const Vector inv = sp.eigenvalues.cwiseInverse();
  return SymMatrix::symmetrized(sp.frame * inv.asDiagonal() * sp.frame.transpose());
}

}  // namespace

std::unique_ptr<Operator> make_operator(const std::string& name, const ParamMap& params) {
  if (name == "trace_laplace") {
    reject_unknown(params, {"c"}, name);
    return std::make_unique<TraceLaplace>(param(params, "c", 0.0));
  }
  if (name == "logdet") {
    reject_unknown(params, {"c"}, name);
    return std::make_unique<LogDet>(param(params, "c", 0.0));
  }
  if (name == "example33") {
    reject_unknown(params, {}, name);
    return std::make_unique<Example33>();
  }
  if (name == "korevaar_lewis") {
    reject_unknown(params, {}, name);
    return std::make_unique<KorevaarLewis>();
  }
  if (name == "inverse_trace_general") {
    reject_unknown(params, {"m", "g", "h", "k", "a", "b", "w", "s", "e", "v", "c"}, name);
    InverseTraceGeneral::Coeffs k;
    k.m = param(params, "m", 1.0);
    k.g = param(params, "g", 0.5);
    k.h = param(params, "h", 0.3);
    k.k = param(params, "k", 0.2);
    k.a = param(params, "a", 0.0);
    k.b = param(params, "b", 0.2);
    k.w = param(params, "w", 0.1);
    k.s = param(params, "s", 0.1);
    k.e = param(params, "e", 0.0);
    k.v = param(params, "v", 0.0);
    k.c = param(params, "c", 0.0);
    return std::make_unique<InverseTraceGeneral>(k);
  }
  if (name == "neg_trace") {
    reject_unknown(params, {}, name);
    return std::make_unique<NegTrace>();
  }
  throw InputError("unknown operator '" + name + "'");
}

std::vector<std::string> builtin_operator_names() {
  return {"trace_laplace", "logdet", "example33", "korevaar_lewis", "inverse_trace_general",
          "neg_trace"};
}

OperatorJet operator_jet(const Operator& op, const OperatorState& s) {
  check_state(s);
  std::optional<OperatorJet> j = op.analytic_jet(s);
  OperatorJet out = j ? std::move(*j) : fd_operator_jet(op, s);
  if (auto inv = safe_inverse(s.A)) out.Ainv = std::move(*inv);
  return out;
}

OperatorJet fd_operator_jet(const Operator& op, const OperatorState& s) {
  check_state(s);
  const int n = s.dim();
  const Layout L(n);
  const Vector v0 = L.pack(s);
  const int N = L.size();

  double scale_a = std::max(1.0, s.A.frobenius());
  if (op.requires_positive_definite()) {
    const double lmin = eigh(s.A).eigenvalues(0);
    if (!(lmin > 0.0)) throw ValidityError(op.name() + ": A is not positive definite");
    scale_a = std::min(scale_a, 0.1 * lmin);
  }
  auto scale = [&](int i) { return i < L.m ? scale_a : std::max(1.0, std::abs(v0(i))); };
  auto f = [&](const Vector& v) { return op.value(L.unpack(v)); };

  OperatorJet j = OperatorJet::zero(n);
  j.F = f(v0);
  Vector g(N);
  Matrix H(N, N);
  for (int i = 0; i < N; ++i) {
    const double h1 = 1e-4 * scale(i);
    Vector vp = v0, vm = v0;
    vp(i) += h1;
    vm(i) -= h1;
    g(i) = (f(vp) - f(vm)) / (2.0 * h1);

    const double h2 = 1e-3 * scale(i);
    vp = v0;
    vm = v0;
    vp(i) += h2;
    vm(i) -= h2;
    H(i, i) = (f(vp) - 2.0 * j.F + f(vm)) / (h2 * h2);
  }
  for (int i = 0; i < N; ++i)
    for (int k = i + 1; k < N; ++k) {
      const double hi = 1e-3 * scale(i), hk = 1e-3 * scale(k);
      auto at = [&](double si, double sk) {
        Vector v = v0;
        v(i) += si * hi;
        v(k) += sk * hk;
        return f(v);
      };
      H(i, k) = H(k, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hk);
    }

  for (int q = 0; q < L.m; ++q) {
    const auto [a, b] = L.pairs[q];
    const double cq = L.weight(q);
    j.Fab.set(a, b, g(q) / cq);
    for (int t = 0; t < L.m; ++t) {
      const auto [r, w] = L.pairs[t];
      j.Fabrs.set_pair_symmetric(a, b, r, w, H(q, t) / (cq * L.weight(t)));
    }
    for (int r = 0; r < n; ++r) {
      j.Fab_p(a, b, r) = j.Fab_p(b, a, r) = H(q, L.p(r)) / cq;
      j.Fab_x(a, b, r) = j.Fab_x(b, a, r) = H(q, L.x(r)) / cq;
    }
    j.Fab_u.set(a, b, H(q, L.u()) / cq);
  }
  for (int a = 0; a < n; ++a) {
    j.Fp(a) = g(L.p(a));
    j.Fx(a) = g(L.x(a));
    j.Fpu(a) = H(L.p(a), L.u());
    j.Fux(a) = H(L.u(), L.x(a));
    for (int b = 0; b < n; ++b) {
      if (b >= a) {
        j.Fpp.set(a, b, H(L.p(a), L.p(b)));
        j.Fxx.set(a, b, H(L.x(a), L.x(b)));
      }
      j.Fpx(a, b) = H(L.p(a), L.x(b));
    }
  }
  j.Fu = g(L.u());
  j.Fuu = H(L.u(), L.u());
  return j;
}

double jet_relative_deviation(const OperatorJet& a, const OperatorJet& b) {
  double worst = 0.0;
  auto cmp = [&](double x, double y) {
    worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::max(std::abs(x), std::abs(y))));
  };
  const int n = a.dim();
  cmp(a.F, b.F);
  cmp(a.Fu, b.Fu);
  cmp(a.Fuu, b.Fuu);
  for (int i = 0; i < n; ++i) {
    cmp(a.Fp(i), b.Fp(i));
    cmp(a.Fx(i), b.Fx(i));
    cmp(a.Fpu(i), b.Fpu(i));
    cmp(a.Fux(i), b.Fux(i));
    for (int k = 0; k < n; ++k) {
      cmp(a.Fab(i, k), b.Fab(i, k));
      cmp(a.Fab_u(i, k), b.Fab_u(i, k));
      cmp(a.Fpp(i, k), b.Fpp(i, k));
      cmp(a.Fpx(i, k), b.Fpx(i, k));
      cmp(a.Fxx(i, k), b.Fxx(i, k));
      for (int r = 0; r < n; ++r) {
        cmp(a.Fab_p(i, k, r), b.Fab_p(i, k, r));
        cmp(a.Fab_x(i, k, r), b.Fab_x(i, k, r));
        for (int t = 0; t < n; ++t) cmp(a.Fabrs(i, k, r, t), b.Fabrs(i, k, r, t));
      }
    }
  }
  return worst;
}

}  // namespace ranklab
