#pragma once

#include "ranklab/tensor.hpp"

#include <vector>

namespace ranklab {

inline constexpr int kMaxDim = 8;

/// Dense real symmetric matrix, 1 <= n <= kMaxDim. Every mutation writes both
/// (i,j) and (j,i), so the stored array is exactly symmetric.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n);

  static SymMatrix identity(int n);
  static SymMatrix diagonal(const Vector& d);
  /// Copies the upper triangle of m into both triangles.
  static SymMatrix from_upper(const Matrix& m);
  /// (m + m^T)/2.
  static SymMatrix symmetrized(const Matrix& m);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  void add(int i, int j, double v);

  const Matrix& matrix() const { return m_; }

  double frobenius() const { return m_.norm(); }
  double trace() const { return m_.trace(); }
  bool all_finite() const { return m_.allFinite(); }

  /// R^T A R.
  SymMatrix conjugated(const Matrix& R) const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);
  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  Matrix m_;
};

/// Eigen-decomposition with ascending eigenvalues and a sign-normalized frame:
/// in every column the entry of largest magnitude is non-negative.
struct Spectrum {
  Vector eigenvalues;
  Matrix frame;  // columns are eigenvectors
  double gap_min = 0.0;

  int dim() const { return static_cast<int>(eigenvalues.size()); }
};

/// Throws InputError on non-finite entries.
Spectrum eigh(const SymMatrix& a);

/// Weighted sum of the ell smallest eigenvalues, sum_{j=1..ell} (ell+1-j) lambda_j.
/// Concave and Lipschitz as a function of the matrix.
double q_ell(const Spectrum& spec, int ell);
double q_ell(const Vector& ascending_eigenvalues, int ell);

/// Weight of 0-based eigenvalue j in q_ell.
inline double q_weight(int ell, int j) { return static_cast<double>(ell - j); }

/// Lipschitz constant of A -> q_ell(eigh(A)) with respect to the Frobenius norm,
/// ell(ell+1)/2 * sqrt(n).
double q_ell_lipschitz(int n, int ell);

/// Default eigenvalue-gap threshold below which derivative formulas are not used:
/// 1e-6 * max(1, |A|_F).
double default_delta_gap(const SymMatrix& a);

/// Point-local data of a Hessian field D^2P expressed in the eigenframe of D^2P.
struct HessianEigenJet {
  Vector eigenvalues;  // ascending
  Matrix frame;
  Tensor3 d3;  // P_{abc} in eigenframe coordinates
  Tensor4 d4;  // P_{abcd} in eigenframe coordinates
  double delta_gap = 0.0;
  std::vector<std::vector<bool>> gap_flag;  // |Lambda_j - Lambda_m| < delta_gap

  int dim() const { return static_cast<int>(eigenvalues.size()); }
  bool simple(int j) const;
  double gap_min() const;
};

/// Builds the eigenframe jet. A negative delta_gap selects default_delta_gap(d2).
HessianEigenJet make_eigen_jet(const SymMatrix& d2, const Tensor3& d3, const Tensor4& d4,
                               double delta_gap = -1.0);

/// Gradient of Lambda_j in eigenframe coordinates: (Lambda_j)_a = P_{jja}.
/// Throws DegeneracyError when Lambda_j is not simple.
Vector dlambda(const HessianEigenJet& jet, int j);

/// Hessian of Lambda_j in eigenframe coordinates:
/// (Lambda_j)_{ab} = P_{jjab} + 2 sum_{m != j} P_{maj} P_{mbj} / (Lambda_j - Lambda_m).
SymMatrix d2lambda(const HessianEigenJet& jet, int j);

/// Eigenframe -> world coordinates.
Vector frame_to_world(const Matrix& frame, const Vector& v);
SymMatrix frame_to_world(const Matrix& frame, const SymMatrix& m);

}  // namespace ranklab
