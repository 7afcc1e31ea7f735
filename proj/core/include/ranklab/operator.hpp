#pragma once

#include "ranklab/params.hpp"
#include "ranklab/random.hpp"
#include "ranklab/symmat.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace ranklab {

/// Argument (A, p, u, x) of F.
struct OperatorState {
  SymMatrix A;
  Vector p;
  double u = 0.0;
  Vector x;

  int dim() const { return A.dim(); }
};

/// F and its first and second partial derivatives at a state. Derivatives with
/// respect to A treat the n^2 entries as independent and are symmetrized, so
/// F^{ab} = dF/dA_ab with the symmetric extension (e.g. log det gives A^{-1}).
struct OperatorJet {
  double F = 0.0;
  SymMatrix Fab;
  Vector Fp;
  double Fu = 0.0;
  Vector Fx;

  Tensor4 Fabrs;  // d^2F/dA_ab dA_rs
  Tensor3 Fab_p;  // (a,b,r): d^2F/dA_ab dp_r
  SymMatrix Fab_u;
  Tensor3 Fab_x;  // (a,b,r): d^2F/dA_ab dx_r
  SymMatrix Fpp;
  Vector Fpu;
  Matrix Fpx;  // (a,b): d^2F/dp_a dx_b
  double Fuu = 0.0;
  Vector Fux;
  SymMatrix Fxx;

  /// A^{-1}; empty (dimension 0) when A is singular.
  SymMatrix Ainv;

  int dim() const { return Fab.dim(); }
  static OperatorJet zero(int n);
};

/// Fully nonlinear operator F(A, p, u, x).
class Operator {
 public:
  virtual ~Operator() = default;

  virtual std::string name() const = 0;
  /// Throws ValidityError outside the validity region.
  virtual double value(const OperatorState& s) const = 0;
  /// Closed-form jet, or nullopt to fall back to finite differences.
  virtual std::optional<OperatorJet> analytic_jet(const OperatorState& s) const;
  /// Whether the validity region requires A positive definite.
  virtual bool requires_positive_definite() const { return true; }
};

/// Operator from a plain value function; jets always come from finite differences.
class FunctionOperator : public Operator {
 public:
  FunctionOperator(std::string name, std::function<double(const OperatorState&)> f,
                   bool requires_pd = true)
      : name_(std::move(name)), f_(std::move(f)), requires_pd_(requires_pd) {}

  std::string name() const override { return name_; }
  double value(const OperatorState& s) const override { return f_(s); }
  bool requires_positive_definite() const override { return requires_pd_; }

 private:
  std::string name_;
  std::function<double(const OperatorState&)> f_;
  bool requires_pd_;
};

/// Builtins:
///   trace_laplace   c         F = tr A - c
///   logdet          c         F = log det A - c
///   example33                 F = |x| - (n-1)/tr A
///   korevaar_lewis            F = u - 1/tr A
///   inverse_trace_general     F = -mu/tr A + a u + b u^2/2 + w |x|^2/2 + s u x1
///                                 + e |p|^2/2 + v p1 (u + x1) - c,
///                             mu = m + g u + h x1 + k p1
///   neg_trace                 F = -tr A (not elliptic; negative control)
std::unique_ptr<Operator> make_operator(const std::string& name, const ParamMap& params);
std::vector<std::string> builtin_operator_names();

/// Analytic jet when the operator provides one, finite differences otherwise.
OperatorJet operator_jet(const Operator& op, const OperatorState& s);
/// Central differences in symmetric coordinates: step 1e-4 (first) and 1e-3
/// (second derivatives) times the state scale.
OperatorJet fd_operator_jet(const Operator& op, const OperatorState& s);

/// Largest relative entry deviation between two jets, relative to max(1, |entry|).
double jet_relative_deviation(const OperatorJet& a, const OperatorJet& b);

// ---------------------------------------------------------------- the form

/// F^{ab,rs} X_ab X_rs + 2 F^{ar} A^{bs} X_ab X_rs + F^{x_a x_b} Z_a Z_b
/// - 2 F^{ab,u} X_ab Y - 2 F^{ab,x_r} X_ab Z_r + 2 F^{u,x_a} Y Z_a + F^{uu} Y^2.
/// Throws PreconditionError when the jet carries no A^{-1}.
double keyco_form(const OperatorJet& j, const SymMatrix& X, const Vector& Z, double Y);

/// Orthonormal coordinates on (X, Z, Y): diagonal X entries, then off-diagonal
/// entries (a<b) carried as sqrt(2) X_ab, then Z, then Y.
int form_dimension(int n);
Vector form_coordinates(const SymMatrix& X, const Vector& Z, double Y);
void form_from_coordinates(const Vector& v, int n, SymMatrix& X, Vector& Z, double& Y);

struct FormSpectrum {
  int n = 0;
  Matrix matrix;  // symmetric, form_dimension(n) square
  double min_eigenvalue = 0.0;
  SymMatrix min_X;
  Vector min_Z;
  double min_Y = 0.0;
  double x_block_min = 0.0;  // smallest eigenvalue restricted to the X block
};

FormSpectrum form_spectrum(const OperatorJet& j);

struct StrictEta {
  /// Largest eta with form >= eta |X|_F^2; -infinity when the (Z,Y) block
  /// is inconsistent or indefinite.
  double eta = 0.0;
  SymMatrix witness_X;  // unit Frobenius norm
  Vector witness_Z;
  double witness_Y = 0.0;
  bool zy_block_singular = false;
};

StrictEta strict_eta(const OperatorJet& j);

// ---------------------------------------------------------------- direct check

/// Point (B, u, x) of G(B, u, x) = F(B^{-1}, p, u, x).
struct GPoint {
  SymMatrix B;
  double u = 0.0;
  Vector x;
};

/// G at a point; throws PreconditionError when B is not positive definite.
double g_value(const Operator& op, const Vector& p, const GPoint& pt);

using PairSampler = std::function<std::pair<GPoint, GPoint>(CounterRng&)>;

struct ConvexityReport {
  double max_violation = -std::numeric_limits<double>::infinity();
  std::size_t trials = 0;
  std::optional<std::pair<GPoint, GPoint>> witness;
};

/// max over trials of G(mid) - (G(s1) + G(s2))/2. Trial i draws from the stream
/// (seed, i), so the result does not depend on scheduling.
ConvexityReport direct_convexity_check(const Operator& op, const Vector& p,
                                       const PairSampler& sampler, std::size_t trials,
                                       std::uint64_t seed);

/// Pairs within a relative radius of the state (B = A^{-1}); endpoints stay
/// positive definite.
PairSampler neighborhood_sampler(const OperatorState& s, double radius);

/// Midpoint test centred at the state along the most negative direction of a
/// second-difference matrix of G built from G values alone, over a few step sizes.
ConvexityReport local_convexity_probe(const Operator& op, const OperatorState& s);

}  // namespace ranklab
