#pragma once

#include "ranklab/jet.hpp"
#include "ranklab/params.hpp"
#include "ranklab/polynomial.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ranklab {

/// Axis-aligned box with a uniform sample lattice of grid_per_axis points per axis.
struct BoxDomain {
  Vector center;
  Vector half_width;
  int grid_per_axis = 3;

  BoxDomain() = default;
  BoxDomain(Vector center, Vector half_width, int grid_per_axis);
  BoxDomain(Vector center, double half_width, int grid_per_axis);

  int dim() const { return static_cast<int>(center.size()); }
  double spacing(int axis) const;
  double diameter() const { return 2.0 * half_width.norm(); }
  std::size_t point_count() const;
  /// Lattice point for a row-major multi-index (last axis fastest).
  Vector point(std::size_t flat) const;
  std::vector<Vector> points() const;
  bool contains(const Vector& x, double slack = 1e-12) const;
  /// Same center, half widths scaled by factor; the lattice keeps grid_per_axis points.
  BoxDomain scaled(double factor) const;
};

/// Lattice-sampled field. Jets come from 5-point-per-axis central differences,
/// second-order accurate; queries must sit on the lattice at least two cells
/// from every face.
class GridField {
 public:
  GridField(double h, std::vector<int> dims, Vector origin, std::vector<double> values);

  int dim() const { return static_cast<int>(dims_.size()); }
  double spacing() const { return h_; }
  const std::vector<int>& dims() const { return dims_; }
  const Vector& origin() const { return origin_; }
  const std::vector<double>& values() const { return values_; }

  std::size_t flat_index(const std::vector<int>& idx) const;
  std::vector<int> multi_index(std::size_t flat) const;
  Vector node(const std::vector<int>& idx) const;
  double value_at(const std::vector<int>& idx) const { return values_[flat_index(idx)]; }
  /// Multi-index of a lattice point, or nullopt when x is off the lattice.
  std::optional<std::vector<int>> lattice_index(const Vector& x) const;
  bool stencil_fits(const std::vector<int>& idx) const;

  Jet4 jet4_at(const std::vector<int>& idx) const;
  Jet4 jet4(const Vector& x) const;

  /// Samples f at every node of the box lattice; the box lattice spacing must be
  /// the same on every axis.
  static GridField sample(const std::function<double(const Vector&)>& f, const BoxDomain& box);

  bool operator==(const GridField& o) const;

 private:
  double h_;
  std::vector<int> dims_;
  Vector origin_;
  std::vector<double> values_;
};

/// Field with closed-form jets.
struct AnalyticField {
  std::string name;
  int n = 0;
  std::function<Jet4(const Vector&)> jet;
  std::function<bool(const Vector&)> valid;  // empty: valid everywhere
};

/// Scalar field u or P: analytic builtin, polynomial, or grid samples.
class ScalarField {
 public:
  enum class Kind { analytic, polynomial, grid };

  ScalarField(AnalyticField f) : impl_(std::move(f)) {}
  ScalarField(Polynomial p) : impl_(std::move(p)) {}
  ScalarField(GridField g) : impl_(std::move(g)) {}

  Kind kind() const { return static_cast<Kind>(impl_.index()); }
  int dim() const;
  std::string describe() const;

  /// Throws InputError for points outside the field's domain or grid stencil.
  Jet4 jet4(const Vector& x) const;
  double value(const Vector& x) const;
  bool can_evaluate(const Vector& x) const;

  const Polynomial* polynomial() const { return std::get_if<Polynomial>(&impl_); }
  const GridField* grid() const { return std::get_if<GridField>(&impl_); }

  /// Points of the box at which jets are available (grid fields drop nodes
  /// within two cells of the lattice boundary). Row-major order.
  std::vector<Vector> sample_points(const BoxDomain& box) const;

 private:
  std::variant<AnalyticField, Polynomial, GridField> impl_;
};

/// Builtins: radial_r (u = |x|), quadratic (c: diagonal or full n*n list,
/// u = x^T C x / 2), rank1 (c: u = c x1^2 / 2), convex_poly (seed, degree),
/// polynomial (degree, coefficients[, center]).
ScalarField builtin_field(const std::string& name, const ParamMap& params, int n);

struct FitReport {
  int degree = 0;
  std::size_t samples = 0;
  std::size_t derivative_samples = 0;
  /// max over the sample lattice of |D^m (P - u)|, componentwise, m = 0..3
  double deviation[4] = {0, 0, 0, 0};
};

/// Discrete least-squares fit on the box lattice in scaled coordinates, with P
/// expanded around the box center. Requires at least (degree+2)^n samples.
std::pair<Polynomial, FitReport> fit_polynomial(const ScalarField& f, const BoxDomain& box,
                                                int degree);

struct PerturbOptions {
  std::uint64_t seed = 0x5eed;
  /// Scale of the random positive definite quadratic relative to tau.
  double random_scale = 0.1;
};

/// Adds tau * sum_j j eps_j (x_j - c_j)^2 (eps_j distinct) plus tau times a seeded
/// random positive definite quadratic, and tau |x - c|^2 when the smallest sampled
/// Hessian eigenvalue is not positive. tau = 0 returns P unchanged.
Polynomial perturb_to_distinct(const Polynomial& p, const BoxDomain& box, double tau,
                               const PerturbOptions& options = {});

/// eps_j used by perturb_to_distinct, j = 1..n.
double perturbation_epsilon(int j, int n);

}  // namespace ranklab
