#pragma once

#include "ranklab/jet.hpp"

#include <memory>
#include <vector>

namespace ranklab {

using Exponents = std::vector<int>;

inline constexpr int kMaxPolynomialDegree = 8;

/// Graded-lexicographic monomial basis in n variables up to a total degree:
/// by total degree first, then lexicographically with x1 dominant, e.g. for
/// n = 2, degree 2: 1, x1, x2, x1^2, x1 x2, x2^2.
class MonomialBasis {
 public:
  MonomialBasis(int n, int degree);

  int dim() const { return n_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const Exponents& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<Exponents>& monomials() const { return monomials_; }
  /// Position of e in the basis; throws InputError if absent.
  std::size_t index_of(const Exponents& e) const;

 private:
  int n_;
  int degree_;
  std::vector<Exponents> monomials_;
};

/// Shared, cached basis instance.
std::shared_ptr<const MonomialBasis> monomial_basis(int n, int degree);

/// Polynomial sum_alpha c_alpha (x - center)^alpha with coefficients in
/// graded-lex order. Jets are exact up to rounding.
class Polynomial {
 public:
  Polynomial(int n, int degree);
  Polynomial(int n, int degree, Vector center);
  Polynomial(int n, int degree, Vector center, std::vector<double> coefficients);

  int dim() const { return basis_->dim(); }
  int degree() const { return basis_->degree(); }
  const Vector& center() const { return center_; }
  const MonomialBasis& basis() const { return *basis_; }
  const std::vector<double>& coefficients() const { return coeffs_; }

  double coefficient(const Exponents& e) const;
  void set_coefficient(const Exponents& e, double c);
  void add_coefficient(const Exponents& e, double c);

  double value(const Vector& x) const;
  Jet4 jet4(const Vector& x) const;

  /// Same polynomial on a larger basis.
  Polynomial with_degree(int degree) const;
  /// Same polynomial expanded around a new center.
  Polynomial recentered(const Vector& center) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  Polynomial pow(int k) const;

  /// a . (x - center) + b
  static Polynomial affine(const Vector& center, const Vector& a, double b);
  /// (x - center)^T M (x - center) / 2
  static Polynomial quadratic(const Vector& center, const SymMatrix& m);

  bool operator==(const Polynomial& o) const;

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  Vector center_;
  std::vector<double> coeffs_;
};

}  // namespace ranklab
