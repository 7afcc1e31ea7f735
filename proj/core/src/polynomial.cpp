#include "ranklab/polynomial.hpp"

#include "ranklab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace ranklab {

namespace {

void generate_degree(int n, int i, int remaining, Exponents& cur, std::vector<Exponents>& out) {
  if (i == n - 1) {
    cur[i] = remaining;
    out.push_back(cur);
    return;
  }
  for (int e = remaining; e >= 0; --e) {
    cur[i] = e;
    generate_degree(n, i + 1, remaining - e, cur, out);
  }
}

int total_degree(const Exponents& e) {
  int s = 0;
  for (int v : e) s += v;
  return s;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Falling factorial e (e-1) ... (e-k+1).
double falling(int e, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= (e - i);
  return r;
}

}  // namespace

MonomialBasis::MonomialBasis(int n, int degree) : n_(n), degree_(degree) {
  if (n < 1 || n > kMaxDim) throw InputError("polynomial dimension out of range");
  if (degree < 0 || degree > kMaxPolynomialDegree)
    throw InputError("polynomial degree " + std::to_string(degree) + " outside [0, " +
                     std::to_string(kMaxPolynomialDegree) + "]");
  Exponents cur(n, 0);
  for (int k = 0; k <= degree; ++k) generate_degree(n, 0, k, cur, monomials_);
}

std::size_t MonomialBasis::index_of(const Exponents& e) const {
  if (static_cast<int>(e.size()) != n_) throw InputError("monomial has wrong number of exponents");
  for (int v : e)
    if (v < 0) throw InputError("negative monomial exponent");
  const int k = total_degree(e);
  if (k > degree_) throw InputError("monomial degree exceeds polynomial degree");
  // Monomials of lower degree precede; within degree k the order is lex-descending,
  // so a binary search with the reversed comparator finds the slot.
  std::size_t first = 0;
  for (int d = 0; d < k; ++d) first += static_cast<std::size_t>(binomial(d + n_ - 1, n_ - 1) + 0.5);
  const std::size_t count = static_cast<std::size_t>(binomial(k + n_ - 1, n_ - 1) + 0.5);
  auto begin = monomials_.begin() + static_cast<std::ptrdiff_t>(first);
  auto end = begin + static_cast<std::ptrdiff_t>(count);
  auto it = std::lower_bound(begin, end, e, [](const Exponents& a, const Exponents& b) {
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  });
  if (it == end || *it != e) throw InputError("monomial not found in basis");
  return static_cast<std::size_t>(it - monomials_.begin());
}

std::shared_ptr<const MonomialBasis> monomial_basis(int n, int degree) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, degree}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(n, degree);
  return slot;
}

Polynomial::Polynomial(int n, int degree) : Polynomial(n, degree, Vector::Zero(n)) {}

Polynomial::Polynomial(int n, int degree, Vector center)
    : basis_(monomial_basis(n, degree)), center_(std::move(center)), coeffs_(basis_->size(), 0.0) {
  if (center_.size() != n) throw InputError("polynomial center has wrong dimension");
}

Polynomial::Polynomial(int n, int degree, Vector center, std::vector<double> coefficients)
    : Polynomial(n, degree, std::move(center)) {
  if (coefficients.size() != coeffs_.size())
    throw InputError("expected " + std::to_string(coeffs_.size()) +
                     " coefficients for graded-lex basis, got " +
                     std::to_string(coefficients.size()));
  for (double c : coefficients)
    if (!std::isfinite(c)) throw InputError("non-finite polynomial coefficient");
  coeffs_ = std::move(coefficients);
}

double Polynomial::coefficient(const Exponents& e) const {
  if (total_degree(e) > degree()) return 0.0;
  return coeffs_[basis_->index_of(e)];
}

void Polynomial::set_coefficient(const Exponents& e, double c) { coeffs_[basis_->index_of(e)] = c; }

void Polynomial::add_coefficient(const Exponents& e, double c) { coeffs_[basis_->index_of(e)] += c; }

double Polynomial::value(const Vector& x) const {
  const int n = dim();
  const Vector y = x - center_;
  double s = 0.0;
  for (std::size_t m = 0; m < coeffs_.size(); ++m) {
    if (coeffs_[m] == 0.0) continue;
    double t = coeffs_[m];
    const Exponents& e = (*basis_)[m];
    for (int i = 0; i < n; ++i)
      for (int p = 0; p < e[i]; ++p) t *= y(i);
    s += t;
  }
  return s;
}

Jet4 Polynomial::jet4(const Vector& x) const {
  const int n = dim();
  const int d = degree();
  if (x.size() != n) throw InputError("jet4: point has wrong dimension");
  const Vector y = x - center_;

  // table[i][k][e] = d^k/dy_i^k y_i^e
  std::vector<double> table(static_cast<std::size_t>(n) * 5 * (d + 1), 0.0);
  auto at = [&](int i, int k, int e) -> double& {
    return table[(static_cast<std::size_t>(i) * 5 + k) * (d + 1) + e];
  };
  for (int i = 0; i < n; ++i)
    for (int e = 0; e <= d; ++e)
      for (int k = 0; k <= std::min(4, e); ++k) at(i, k, e) = falling(e, k) * std::pow(y(i), e - k);

  Jet4 jet = Jet4::zero(x);
  std::vector<int> kappa(n, 0);
  // Derivative of the polynomial for the multiset of axes encoded in kappa.
  auto derivative = [&]() {
    double s = 0.0;
    for (std::size_t m = 0; m < coeffs_.size(); ++m) {
      const double c = coeffs_[m];
      if (c == 0.0) continue;
      const Exponents& e = (*basis_)[m];
      double t = c;
      for (int i = 0; i < n && t != 0.0; ++i) t *= kappa[i] <= e[i] ? at(i, kappa[i], e[i]) : 0.0;
      s += t;
    }
    return s;
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

Polynomial Polynomial::with_degree(int degree) const {
  if (degree < this->degree()) {
    for (std::size_t m = 0; m < coeffs_.size(); ++m)
      if (coeffs_[m] != 0.0 && total_degree((*basis_)[m]) > degree)
        throw InputError("with_degree: polynomial has nonzero terms above requested degree");
  }
  Polynomial out(dim(), degree, center_);
  for (std::size_t m = 0; m < coeffs_.size(); ++m)
    if (total_degree((*basis_)[m]) <= degree) out.set_coefficient((*basis_)[m], coeffs_[m]);
  return out;
}

Polynomial Polynomial::recentered(const Vector& center) const {
  const int n = dim();
  if (center.size() != n) throw InputError("recentered: center has wrong dimension");
  if (center == center_) return *this;
  const Vector shift = center - center_;  // (x - c_old) = (x - c_new) + shift
  Polynomial out(n, degree(), center);
  Exponents beta(n, 0);
  for (std::size_t m = 0; m < coeffs_.size(); ++m) {
    const double c = coeffs_[m];
    if (c == 0.0) continue;
    const Exponents& alpha = (*basis_)[m];
    // Enumerate beta <= alpha componentwise.
    std::fill(beta.begin(), beta.end(), 0);
    while (true) {
      double t = c;
      for (int i = 0; i < n; ++i)
        t *= binomial(alpha[i], beta[i]) * std::pow(shift(i), alpha[i] - beta[i]);
      out.add_coefficient(beta, t);
      int i = 0;
      while (i < n && beta[i] == alpha[i]) beta[i++] = 0;
      if (i == n) break;
      ++beta[i];
    }
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.dim() != dim()) throw InputError("polynomial sum: dimension mismatch");
  const Polynomial other = o.recentered(center_);
  if (other.degree() > degree()) *this = with_degree(other.degree());
  for (std::size_t m = 0; m < other.coeffs_.size(); ++m)
    if (other.coeffs_[m] != 0.0) add_coefficient(other.basis()[m], other.coeffs_[m]);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.dim() != b.dim()) throw InputError("polynomial product: dimension mismatch");
  const int n = a.dim();
  const Polynomial bb = b.recentered(a.center());
  Polynomial out(n, std::min(kMaxPolynomialDegree, a.degree() + bb.degree()), a.center());
  Exponents e(n);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i) {
    if (a.coeffs_[i] == 0.0) continue;
    for (std::size_t j = 0; j < bb.coeffs_.size(); ++j) {
      if (bb.coeffs_[j] == 0.0) continue;
      for (int k = 0; k < n; ++k) e[k] = a.basis()[i][k] + bb.basis()[j][k];
      if (total_degree(e) > kMaxPolynomialDegree)
        throw InputError("polynomial product exceeds maximum degree");
      out.add_coefficient(e, a.coeffs_[i] * bb.coeffs_[j]);
    }
  }
  return out;
}

Polynomial Polynomial::pow(int k) const {
  Polynomial out(dim(), 0, center_);
  out.coeffs_[0] = 1.0;
  for (int i = 0; i < k; ++i) out = out * *this;
  return out;
}

Polynomial Polynomial::affine(const Vector& center, const Vector& a, double b) {
  const int n = static_cast<int>(center.size());
  Polynomial p(n, 1, center);
  p.coeffs_[0] = b;
  for (int i = 0; i < n; ++i) p.coeffs_[1 + i] = a(i);  // degree-1 block is x1, x2, ...
  return p;
}

Polynomial Polynomial::quadratic(const Vector& center, const SymMatrix& m) {
  const int n = static_cast<int>(center.size());
  Polynomial p(n, 2, center);
  Exponents e(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      std::fill(e.begin(), e.end(), 0);
      ++e[i];
      ++e[j];
      p.set_coefficient(e, i == j ? 0.5 * m(i, i) : m(i, j));
    }
  return p;
}

bool Polynomial::operator==(const Polynomial& o) const {
  return dim() == o.dim() && degree() == o.degree() && center_ == o.center_ && coeffs_ == o.coeffs_;
}

}  // namespace ranklab
