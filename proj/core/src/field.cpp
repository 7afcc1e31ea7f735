#include "ranklab/field.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ranklab {

// ---------------------------------------------------------------- Jet4

bool Jet4::all_finite() const {
  if (!std::isfinite(u) || !du.allFinite() || !d2u.all_finite()) return false;
  return std::isfinite(d3u.max_abs()) && std::isfinite(d4u.max_abs());
}

Jet4 Jet4::zero(const Vector& x) {
  const int n = static_cast<int>(x.size());
  Jet4 j;
  j.x = x;
  j.du = Vector::Zero(n);
  j.d2u = SymMatrix(n);
  j.d3u = Tensor3(n);
  j.d4u = Tensor4(n);
  return j;
}

JetDeviation jet_deviation(const Jet4& a, const Jet4& b) {
  JetDeviation d;
  d.order[0] = std::abs(a.u - b.u);
  d.order[1] = (a.du - b.du).cwiseAbs().maxCoeff();
  d.order[2] = (a.d2u.matrix() - b.d2u.matrix()).cwiseAbs().maxCoeff();
  Tensor3 t3 = a.d3u;
  t3 -= b.d3u;
  d.order[3] = t3.max_abs();
  Tensor4 t4 = a.d4u;
  t4 -= b.d4u;
  d.order[4] = t4.max_abs();
  return d;
}

// ---------------------------------------------------------------- BoxDomain

BoxDomain::BoxDomain(Vector c, Vector hw, int g)
    : center(std::move(c)), half_width(std::move(hw)), grid_per_axis(g) {
  if (center.size() < 1 || center.size() > kMaxDim)
    throw InputError("box dimension out of range");
  if (half_width.size() != center.size()) throw InputError("box half_width has wrong dimension");
  for (int i = 0; i < half_width.size(); ++i)
    if (!(half_width(i) > 0.0)) throw InputError("box half_width must be positive");
  if (grid_per_axis < 3) throw InputError("box grid_per_axis must be at least 3");
}

BoxDomain::BoxDomain(Vector c, double hw, int g)
    : BoxDomain(c, Vector::Constant(c.size(), hw), g) {}

double BoxDomain::spacing(int axis) const {
  return 2.0 * half_width(axis) / static_cast<double>(grid_per_axis - 1);
}

std::size_t BoxDomain::point_count() const {
  std::size_t c = 1;
  for (int i = 0; i < dim(); ++i) c *= static_cast<std::size_t>(grid_per_axis);
  return c;
}

Vector BoxDomain::point(std::size_t flat) const {
  const int n = dim();
  Vector x(n);
  for (int i = n - 1; i >= 0; --i) {
    const auto k = static_cast<int>(flat % static_cast<std::size_t>(grid_per_axis));
    flat /= static_cast<std::size_t>(grid_per_axis);
    x(i) = center(i) - half_width(i) + k * spacing(i);
  }
  return x;
}

std::vector<Vector> BoxDomain::points() const {
  std::vector<Vector> pts;
  pts.reserve(point_count());
  for (std::size_t i = 0; i < point_count(); ++i) pts.push_back(point(i));
  return pts;
}

bool BoxDomain::contains(const Vector& x, double slack) const {
  for (int i = 0; i < dim(); ++i)
    if (std::abs(x(i) - center(i)) > half_width(i) * (1.0 + slack)) return false;
  return true;
}

BoxDomain BoxDomain::scaled(double factor) const {
  return BoxDomain(center, half_width * factor, grid_per_axis);
}

// ---------------------------------------------------------------- GridField

namespace {

// 1-D central stencils on offsets -2..2 for derivative orders 0..4; all O(h^2).
constexpr double kStencil[5][5] = {
    {0.0, 0.0, 1.0, 0.0, 0.0},
    {0.0, -0.5, 0.0, 0.5, 0.0},
    {0.0, 1.0, -2.0, 1.0, 0.0},
    {-0.5, 1.0, 0.0, -1.0, 0.5},
    {1.0, -4.0, 6.0, -4.0, 1.0},
};

}  // namespace

GridField::GridField(double h, std::vector<int> dims, Vector origin, std::vector<double> values)
    : h_(h), dims_(std::move(dims)), origin_(std::move(origin)), values_(std::move(values)) {
  if (!(h_ > 0.0) || !std::isfinite(h_)) throw InputError("grid spacing must be positive");
  if (dims_.empty() || static_cast<int>(dims_.size()) > kMaxDim)
    throw InputError("grid dimension out of range");
  if (origin_.size() != static_cast<Eigen::Index>(dims_.size()))
    throw InputError("grid origin has wrong dimension");
  std::size_t count = 1;
  for (int d : dims_) {
    if (d < 1) throw InputError("grid extent must be positive");
    count *= static_cast<std::size_t>(d);
  }
  if (values_.size() != count)
    throw InputError("grid expects " + std::to_string(count) + " values, got " +
                     std::to_string(values_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("grid field has non-finite values");
}

std::size_t GridField::flat_index(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= dims_[i]) throw InputError("grid index out of range");
    f = f * static_cast<std::size_t>(dims_[i]) + static_cast<std::size_t>(idx[i]);
  }
  return f;
}

std::vector<int> GridField::multi_index(std::size_t flat) const {
  std::vector<int> idx(dims_.size());
  for (int i = dim() - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % static_cast<std::size_t>(dims_[i]));
    flat /= static_cast<std::size_t>(dims_[i]);
  }
  return idx;
}

Vector GridField::node(const std::vector<int>& idx) const {
  Vector x(dim());
  for (int i = 0; i < dim(); ++i) x(i) = origin_(i) + idx[i] * h_;
  return x;
}

std::optional<std::vector<int>> GridField::lattice_index(const Vector& x) const {
  if (x.size() != dim()) return std::nullopt;
  std::vector<int> idx(dims_.size());
  for (int i = 0; i < dim(); ++i) {
    const double t = (x(i) - origin_(i)) / h_;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-7) return std::nullopt;
    if (r < 0 || r >= dims_[i]) return std::nullopt;
    idx[i] = static_cast<int>(r);
  }
  return idx;
}

bool GridField::stencil_fits(const std::vector<int>& idx) const {
  for (int i = 0; i < dim(); ++i)
    if (idx[i] < 2 || idx[i] > dims_[i] - 3) return false;
  return true;
}

Jet4 GridField::jet4_at(const std::vector<int>& idx) const {
  if (!stencil_fits(idx)) throw InputError("grid stencil out of range at " + [&] {
    std::ostringstream os;
    for (int v : idx) os << v << ' ';
    return os.str();
  }());
  const int n = dim();
  Jet4 jet = Jet4::zero(node(idx));
  std::vector<int> kappa(n, 0);

  // Tensor product of 1-D stencils over the axes with nonzero derivative order.
  auto derivative = [&]() {
    std::vector<int> axes;
    int order = 0;
    for (int i = 0; i < n; ++i)
      if (kappa[i] > 0) {
        axes.push_back(i);
        order += kappa[i];
      }
    const std::size_t m = axes.size();
    std::vector<int> off(m, -2);
    std::vector<int> probe = idx;
    double s = 0.0;
    while (true) {
      double w = 1.0;
      for (std::size_t k = 0; k < m; ++k) {
        w *= kStencil[kappa[axes[k]]][off[k] + 2];
        probe[axes[k]] = idx[axes[k]] + off[k];
      }
      if (w != 0.0) s += w * values_[flat_index(probe)];
      std::size_t k = 0;
      while (k < m && off[k] == 2) off[k++] = -2;
      if (k == m) break;
      ++off[k];
    }
    return s / std::pow(h_, order);
  };

  jet.u = derivative();
  for (int a = 0; a < n; ++a) {
    ++kappa[a];
    jet.du(a) = derivative();
    for (int b = a; b < n; ++b) {
      ++kappa[b];
      jet.d2u.set(a, b, derivative());
      for (int c = b; c < n; ++c) {
        ++kappa[c];
        jet.d3u.set_symmetric(a, b, c, derivative());
        for (int e = c; e < n; ++e) {
          ++kappa[e];
          jet.d4u.set_symmetric(a, b, c, e, derivative());
          --kappa[e];
        }
        --kappa[c];
      }
      --kappa[b];
    }
    --kappa[a];
  }
  return jet;
}

Jet4 GridField::jet4(const Vector& x) const {
  const auto idx = lattice_index(x);
  if (!idx) throw InputError("grid field queried off the lattice");
  return jet4_at(*idx);
}

GridField GridField::sample(const std::function<double(const Vector&)>& f, const BoxDomain& box) {
  const double h = box.spacing(0);
  for (int i = 1; i < box.dim(); ++i)
    if (std::abs(box.spacing(i) - h) > 1e-12 * h)
      throw InputError("grid sampling needs equal spacing on every axis");
  std::vector<double> values;
  values.reserve(box.point_count());
  for (std::size_t i = 0; i < box.point_count(); ++i) values.push_back(f(box.point(i)));
  return GridField(h, std::vector<int>(box.dim(), box.grid_per_axis), box.center - box.half_width,
                   std::move(values));
}

bool GridField::operator==(const GridField& o) const {
  return h_ == o.h_ && dims_ == o.dims_ && origin_ == o.origin_ && values_ == o.values_;
}

// ---------------------------------------------------------------- ScalarField

int ScalarField::dim() const {
  return std::visit(
      [](const auto& f) -> int {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AnalyticField>)
          return f.n;
        else
          return f.dim();
      },
      impl_);
}

std::string ScalarField::describe() const {
  switch (kind()) {
    case Kind::analytic:
      return "analytic:" + std::get<AnalyticField>(impl_).name;
    case Kind::polynomial:
      return "polynomial(degree " + std::to_string(std::get<Polynomial>(impl_).degree()) + ")";
    case Kind::grid:
      return "grid";
  }
  return "unknown";
}

Jet4 ScalarField::jet4(const Vector& x) const {
  if (x.size() != dim()) throw InputError("field queried with point of wrong dimension");
  return std::visit(
      [&](const auto& f) -> Jet4 {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, AnalyticField>) {
          if (f.valid && !f.valid(x)) throw InputError("point outside domain of field " + f.name);
          return f.jet(x);
        } else {
          return f.jet4(x);
        }
      },
      impl_);
}

double ScalarField::value(const Vector& x) const {
  if (const auto* p = polynomial()) return p->value(x);
  if (const auto* g = grid()) {
    const auto idx = g->lattice_index(x);
    if (!idx) throw InputError("grid field queried off the lattice");
    return g->value_at(*idx);
  }
  return jet4(x).u;
}

bool ScalarField::can_evaluate(const Vector& x) const {
  if (x.size() != dim()) return false;
  switch (kind()) {
    case Kind::analytic: {
      const auto& f = std::get<AnalyticField>(impl_);
      return !f.valid || f.valid(x);
    }
    case Kind::polynomial:
      return true;
    case Kind::grid: {
      const auto idx = grid()->lattice_index(x);
      return idx && grid()->stencil_fits(*idx);
    }
  }
  return false;
}

std::vector<Vector> ScalarField::sample_points(const BoxDomain& box) const {
  std::vector<Vector> out;
  for (const Vector& x : box.points())
    if (can_evaluate(x)) out.push_back(x);
  return out;
}

// ---------------------------------------------------------------- builtins

namespace {

double param(const ParamMap& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (it->second.size() != 1) throw InputError("field parameter '" + key + "' must be a scalar");
  return it->second.front();
}

void reject_unknown(const ParamMap& p, std::initializer_list<const char*> known,
                    const std::string& field) {
  for (const auto& [key, _] : p) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw InputError("unknown parameter '" + key + "' for field " + field);
  }
}

Jet4 radial_jet(const Vector& x) {
  const int n = static_cast<int>(x.size());
  const double r = x.norm();
  const Vector nh = x / r;
  auto delta = [](int i, int j) { return i == j ? 1.0 : 0.0; };
  Jet4 j = Jet4::zero(x);
  j.u = r;
  j.du = nh;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      j.d2u.set(a, b, (delta(a, b) - nh(a) * nh(b)) / r);
      for (int c = b; c < n; ++c) {
        const double t3 = -(delta(a, b) * nh(c) + delta(a, c) * nh(b) + delta(b, c) * nh(a)) +
                          3.0 * nh(a) * nh(b) * nh(c);
        j.d3u.set_symmetric(a, b, c, t3 / (r * r));
        for (int d = c; d < n; ++d) {
          const double dd = delta(a, b) * delta(c, d) + delta(a, c) * delta(b, d) +
                            delta(a, d) * delta(b, c);
          const double dn = delta(a, b) * nh(c) * nh(d) + delta(a, c) * nh(b) * nh(d) +
                            delta(b, c) * nh(a) * nh(d) + delta(a, d) * nh(b) * nh(c) +
                            delta(b, d) * nh(a) * nh(c) + delta(c, d) * nh(a) * nh(b);
          const double t4 = -dd + 3.0 * dn - 15.0 * nh(a) * nh(b) * nh(c) * nh(d);
          j.d4u.set_symmetric(a, b, c, d, t4 / (r * r * r));
        }
      }
    }
  return j;
}

Polynomial convex_poly(int n, std::uint64_t seed, int degree) {
  if (degree < 2 || degree > kMaxPolynomialDegree)
    throw InputError("convex_poly degree must be in [2, 8]");
  const int top = degree - degree % 2;
  const Vector origin = Vector::Zero(n);
  Polynomial p(n, top, origin);
  const int terms = n + 2;
  for (int k = 0; k < terms; ++k) {
    CounterRng rng(seed, stream_id("convex_poly"), static_cast<std::uint64_t>(k));
    Vector a(n);
    for (int i = 0; i < n; ++i) a(i) = rng.normal() / std::sqrt(static_cast<double>(n));
    const double b = rng.uniform(-0.5, 0.5);
    const double w = rng.uniform(0.1, 1.0);
    const int power = 2 + 2 * (k % (top / 2));
    p += w * Polynomial::affine(origin, a, b).pow(power);
  }
  // Keep the Hessian uniformly positive definite.
  p += Polynomial::quadratic(origin, 0.02 * SymMatrix::identity(n));
  return p;
}

}  // namespace

ScalarField builtin_field(const std::string& name, const ParamMap& params, int n) {
  if (n < 1 || n > kMaxDim) throw InputError("field dimension out of range");
  const Vector origin = Vector::Zero(n);
  if (name == "radial_r") {
    reject_unknown(params, {}, name);
    return AnalyticField{"radial_r", n, radial_jet, [](const Vector& x) { return x.norm() > 0.0; }};
  }
  if (name == "quadratic") {
    reject_unknown(params, {"c"}, name);
    auto it = params.find("c");
    if (it == params.end()) throw InputError("quadratic field needs parameter 'c'");
    const auto& c = it->second;
    SymMatrix m(n);
    if (c.size() == static_cast<std::size_t>(n)) {
      for (int i = 0; i < n; ++i) m.set(i, i, c[i]);
    } else if (c.size() == static_cast<std::size_t>(n * n)) {
      Matrix full(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) full(i, j) = c[static_cast<std::size_t>(i * n + j)];
      if ((full - full.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw InputError("quadratic field matrix 'c' is not symmetric");
      m = SymMatrix::from_upper(full);
    } else {
      throw InputError("quadratic field 'c' needs n or n*n entries");
    }
    return Polynomial::quadratic(origin, m);
  }
  if (name == "rank1") {
    reject_unknown(params, {"c"}, name);
    SymMatrix m(n);
    m.set(0, 0, param(params, "c", 1.0));
    return Polynomial::quadratic(origin, m);
  }
  if (name == "convex_poly") {
    reject_unknown(params, {"seed", "degree"}, name);
    return convex_poly(n, static_cast<std::uint64_t>(param(params, "seed", 0.0)),
                       static_cast<int>(param(params, "degree", 4.0)));
  }
  if (name == "polynomial") {
    reject_unknown(params, {"degree", "coefficients", "center"}, name);
    const int degree = static_cast<int>(param(params, "degree", 2.0));
    auto it = params.find("coefficients");
    if (it == params.end()) throw InputError("polynomial field needs 'coefficients'");
    Vector center = origin;
    if (auto c = params.find("center"); c != params.end()) {
      if (c->second.size() != static_cast<std::size_t>(n))
        throw InputError("polynomial 'center' has wrong dimension");
      center = Eigen::Map<const Vector>(c->second.data(), n);
    }
    return Polynomial(n, degree, center, it->second);
  }
  throw InputError("unknown field '" + name + "'");
}

// ---------------------------------------------------------------- fitting

std::pair<Polynomial, FitReport> fit_polynomial(const ScalarField& f, const BoxDomain& box,
                                                int degree) {
  const int n = box.dim();
  if (f.dim() != n) throw InputError("fit_polynomial: field and box dimensions differ");
  if (degree < 0 || degree > kMaxPolynomialDegree)
    throw InputError("fit_polynomial: degree outside [0, 8]");

  std::vector<Vector> value_points;
  std::vector<double> values;
  for (const Vector& x : box.points()) {
    if (const auto* g = f.grid()) {
      const auto idx = g->lattice_index(x);
      if (!idx) continue;
      value_points.push_back(x);
      values.push_back(g->value_at(*idx));
    } else if (f.can_evaluate(x)) {
      value_points.push_back(x);
      values.push_back(f.value(x));
    }
  }
  const double needed = std::pow(static_cast<double>(degree + 2), n);
  if (static_cast<double>(value_points.size()) < needed)
    throw InputError("fit_polynomial: " + std::to_string(value_points.size()) +
                     " samples, need at least (degree+2)^n = " +
                     std::to_string(static_cast<long long>(needed)) +
                     "; increase the grid or lower the degree");

  const auto basis = monomial_basis(n, degree);
  const auto rows = static_cast<Eigen::Index>(value_points.size());
  const auto cols = static_cast<Eigen::Index>(basis->size());
  Matrix vander(rows, cols);
  Vector rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector s = (value_points[r] - box.center).cwiseQuotient(box.half_width);
    for (Eigen::Index c = 0; c < cols; ++c) {
      double t = 1.0;
      const Exponents& e = (*basis)[c];
      for (int i = 0; i < n; ++i) t *= std::pow(s(i), e[i]);
      vander(r, c) = t;
    }
    rhs(r) = values[r];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(vander);
  if (qr.rank() < cols)
    throw InputError("fit_polynomial: rank-deficient least-squares system; increase samples or "
                     "lower the degree");
  const Vector scaled = qr.solve(rhs);

  std::vector<double> coeffs(basis->size());
  for (std::size_t c = 0; c < basis->size(); ++c) {
    double s = 1.0;
    for (int i = 0; i < n; ++i) s *= std::pow(box.half_width(i), (*basis)[c][i]);
    coeffs[c] = scaled(static_cast<Eigen::Index>(c)) / s;
  }
  Polynomial p(n, degree, box.center, std::move(coeffs));

  FitReport report;
  report.degree = degree;
  report.samples = value_points.size();
  for (const Vector& x : f.sample_points(box)) {
    const JetDeviation d = jet_deviation(p.jet4(x), f.jet4(x));
    for (int m = 0; m < 4; ++m) report.deviation[m] = std::max(report.deviation[m], d.order[m]);
    ++report.derivative_samples;
  }
  return {std::move(p), report};
}

double perturbation_epsilon(int j, int n) { return 0.1 * j / n; }

Polynomial perturb_to_distinct(const Polynomial& p, const BoxDomain& box, double tau,
                               const PerturbOptions& options) {
  if (!(tau >= 0.0)) throw InputError("perturb_to_distinct: tau must be non-negative");
  if (tau == 0.0) return p;
  const int n = p.dim();
  if (box.dim() != n) throw InputError("perturb_to_distinct: box dimension mismatch");

  SymMatrix split(n);
  for (int j = 1; j <= n; ++j) split.set(j - 1, j - 1, 2.0 * j * perturbation_epsilon(j, n));
  CounterRng rng(options.seed, stream_id("perturb_to_distinct"), 0);
  const SymMatrix random = random_spd(n, rng, 0.5, 1.0);

  Polynomial out = p.degree() >= 2 ? p.recentered(box.center) : p.recentered(box.center).with_degree(2);
  out += Polynomial::quadratic(box.center, tau * (split + options.random_scale * random));

  double min_eig = std::numeric_limits<double>::infinity();
  for (const Vector& x : box.points())
    min_eig = std::min(min_eig, eigh(out.jet4(x).d2u).eigenvalues(0));
  if (min_eig <= 0.0) out += Polynomial::quadratic(box.center, tau * 2.0 * SymMatrix::identity(n));
  return out;
}

}  // namespace ranklab
