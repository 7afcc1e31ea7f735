#include "ranklab/symmat.hpp"

#include "ranklab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>

namespace ranklab {

namespace {

void check_dim(Eigen::Index n) {
  if (n < 1 || n > kMaxDim)
    throw InputError("SymMatrix dimension " + std::to_string(n) + " outside [1, " +
                     std::to_string(kMaxDim) + "]");
}

}  // namespace

SymMatrix::SymMatrix(int n) {
  check_dim(n);
  m_ = Matrix::Zero(n, n);
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix s(n);
  s.m_.setIdentity();
  return s;
}

SymMatrix SymMatrix::diagonal(const Vector& d) {
  SymMatrix s(static_cast<int>(d.size()));
  s.m_.diagonal() = d;
  return s;
}

SymMatrix SymMatrix::from_upper(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("SymMatrix::from_upper: matrix is not square");
  check_dim(m.rows());
  SymMatrix s;
  s.m_ = m.selfadjointView<Eigen::Upper>();
  return s;
}

SymMatrix SymMatrix::symmetrized(const Matrix& m) {
  if (m.rows() != m.cols()) throw InputError("SymMatrix::symmetrized: matrix is not square");
  check_dim(m.rows());
  SymMatrix s;
  s.m_ = 0.5 * (m + m.transpose());
  // (x + y)/2 and (y + x)/2 round identically, but make it exact regardless.
  s.m_ = Matrix(s.m_.selfadjointView<Eigen::Upper>());
  return s;
}

void SymMatrix::add(int i, int j, double v) {
  m_(i, j) += v;
  if (i != j) m_(j, i) += v;
}

SymMatrix SymMatrix::conjugated(const Matrix& R) const {
  return symmetrized(R.transpose() * m_ * R);
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  m_ += o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  m_ -= o.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

Spectrum eigh(const SymMatrix& a) {
  if (!a.all_finite()) throw InputError("eigh: matrix has non-finite entries");
  const int n = a.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw InputError("eigh: eigensolver did not converge");

  Spectrum s;
  s.eigenvalues = solver.eigenvalues();  // ascending
  s.frame = solver.eigenvectors();
  for (int c = 0; c < n; ++c) {
    Eigen::Index imax = 0;
    s.frame.col(c).cwiseAbs().maxCoeff(&imax);
    if (s.frame(imax, c) < 0.0) s.frame.col(c) *= -1.0;
  }
  s.gap_min = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < n; ++j)
    s.gap_min = std::min(s.gap_min, s.eigenvalues(j + 1) - s.eigenvalues(j));
  return s;
}

double q_ell(const Vector& lambda, int ell) {
  if (ell < 1 || ell > lambda.size())
    throw InputError("q_ell: level " + std::to_string(ell) + " outside [1, " +
                     std::to_string(lambda.size()) + "]");
  double q = 0.0;
  for (int j = 0; j < ell; ++j) q += q_weight(ell, j) * lambda(j);
  return q;
}

double q_ell(const Spectrum& spec, int ell) { return q_ell(spec.eigenvalues, ell); }

double q_ell_lipschitz(int n, int ell) {
  return 0.5 * ell * (ell + 1) * std::sqrt(static_cast<double>(n));
}

double default_delta_gap(const SymMatrix& a) { return 1e-6 * std::max(1.0, a.frobenius()); }

bool HessianEigenJet::simple(int j) const {
  for (int m = 0; m < dim(); ++m)
    if (m != j && gap_flag[j][m]) return false;
  return true;
}

double HessianEigenJet::gap_min() const {
  double g = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < dim(); ++j) g = std::min(g, eigenvalues(j + 1) - eigenvalues(j));
  return g;
}

HessianEigenJet make_eigen_jet(const SymMatrix& d2, const Tensor3& d3, const Tensor4& d4,
                               double delta_gap) {
  const int n = d2.dim();
  if (d3.dim() != n || d4.dim() != n) throw InputError("make_eigen_jet: dimension mismatch");
  const Spectrum spec = eigh(d2);
  HessianEigenJet jet;
  jet.eigenvalues = spec.eigenvalues;
  jet.frame = spec.frame;
  jet.d3 = d3.rotated(spec.frame);
  jet.d4 = d4.rotated(spec.frame);
  jet.delta_gap = delta_gap < 0.0 ? default_delta_gap(d2) : delta_gap;
  jet.gap_flag.assign(n, std::vector<bool>(n, false));
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      jet.gap_flag[j][m] =
          m != j && std::abs(jet.eigenvalues(j) - jet.eigenvalues(m)) < jet.delta_gap;
  return jet;
}

Vector dlambda(const HessianEigenJet& jet, int j) {
  if (!jet.simple(j))
    throw DegeneracyError("dlambda: eigenvalue " + std::to_string(j) + " is not simple");
  const int n = jet.dim();
  Vector g(n);
  for (int a = 0; a < n; ++a) g(a) = jet.d3(j, j, a);
  return g;
}

SymMatrix d2lambda(const HessianEigenJet& jet, int j) {
  if (!jet.simple(j))
    throw DegeneracyError("d2lambda: eigenvalue " + std::to_string(j) + " is not simple");
  const int n = jet.dim();
  SymMatrix h(n);
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      double v = jet.d4(j, j, a, b);
      for (int m = 0; m < n; ++m) {
        if (m == j) continue;
        v += 2.0 * jet.d3(m, a, j) * jet.d3(m, b, j) /
             (jet.eigenvalues(j) - jet.eigenvalues(m));
      }
      h.set(a, b, v);
    }
  return h;
}

Vector frame_to_world(const Matrix& frame, const Vector& v) { return frame * v; }

SymMatrix frame_to_world(const Matrix& frame, const SymMatrix& m) {
  return m.conjugated(frame.transpose());
}

}  // namespace ranklab
