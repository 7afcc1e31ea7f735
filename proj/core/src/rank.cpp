#include "ranklab/rank.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/field_io.hpp"
#include "parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace ranklab {

double default_tau_zero(const ScalarField& f, const BoxDomain& box) {
  const auto pts = f.sample_points(box);
  std::vector<double> top(pts.size(), 0.0);
  detail::parallel_for(pts.size(), [&](std::size_t i) {
    top[i] = eigh(f.jet4(pts[i]).d2u).eigenvalues.maxCoeff();
  });
  double m = 1.0;
  for (double t : top) m = std::max(m, t);
  return 1e-8 * m;
}

RankMap rank_map(const ScalarField& f, const BoxDomain& box, double tau_zero) {
  if (!(tau_zero > 0.0)) throw InputError("rank_map: tau_zero must be positive");
  if (f.dim() != box.dim()) throw InputError("rank_map: field and box dimensions differ");
  const auto pts = f.sample_points(box);
  if (pts.empty()) throw InputError("rank_map: no lattice point admits a jet");
  RankMap out;
  out.tau_zero = tau_zero;
  out.samples.resize(pts.size());
  detail::parallel_for(pts.size(), [&](std::size_t i) {
    const Spectrum sp = eigh(f.jet4(pts[i]).d2u);
    RankSample& s = out.samples[i];
    s.x = pts[i];
    s.eigenvalues = sp.eigenvalues;
    int k = 0;
    while (k < sp.dim() && sp.eigenvalues(k) <= tau_zero) ++k;
    s.rank = sp.dim() - k;
    s.null_basis = sp.frame.leftCols(k);
  });
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& s : out.samples)
    if (s.eigenvalues(0) < out.min_eigenvalue) {
      out.min_eigenvalue = s.eigenvalues(0);
      out.min_point = s.x;
    }
  if (out.min_eigenvalue < -tau_zero) {
    std::ostringstream os;
    os << "field is not convex on the box: Hessian eigenvalue " << format_double(out.min_eigenvalue)
       << " at x = (";
    for (int i = 0; i < out.min_point.size(); ++i)
      os << (i ? ", " : "") << format_double(out.min_point(i));
    os << ")";
    throw PreconditionError(os.str());
  }
  return out;
}

double max_principal_angle(const Matrix& b0, const Matrix& b1) {
  if (b0.cols() != b1.cols()) throw InputError("principal angles need subspaces of equal dimension");
  if (b0.cols() == 0) return 0.0;
  // sin of the largest angle is the largest singular value of the part of b1
  // outside span(b0); the cosine form loses accuracy near zero.
  const Matrix resid = b1 - b0 * (b0.transpose() * b1);
  const double s = Eigen::JacobiSVD<Matrix>(resid).singularValues()(0);
  if (s < 0.7) return std::asin(s);
  const Vector c = Eigen::JacobiSVD<Matrix>(b0.transpose() * b1).singularValues();
  return std::acos(std::min(1.0, c(c.size() - 1)));
}

RankVerdict rank_verdict(const std::vector<RankSample>& samples, double theta_tol) {
  if (samples.empty()) throw InputError("rank_verdict: no samples");
  RankVerdict v;
  v.min_rank = v.max_rank = samples.front().rank;
  for (const auto& s : samples) {
    v.min_rank = std::min(v.min_rank, s.rank);
    v.max_rank = std::max(v.max_rank, s.rank);
  }
  v.constant = v.min_rank == v.max_rank;
  if (!v.constant) {
    v.max_principal_angle = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  const Matrix& b0 = samples.front().null_basis;
  const int n = static_cast<int>(samples.front().eigenvalues.size());
  const int k = static_cast<int>(b0.cols());
  v.max_principal_angle = 0.0;
  Matrix proj = Matrix::Zero(n, n);
  for (const auto& s : samples) {
    v.max_principal_angle = std::max(v.max_principal_angle, max_principal_angle(b0, s.null_basis));
    proj += s.null_basis * s.null_basis.transpose();
  }
  if (k > 0 && v.max_principal_angle <= theta_tol) {
    proj /= static_cast<double>(samples.size());
    const Spectrum sp = eigh(SymMatrix::symmetrized(proj));
    for (int c = n - 1; c >= n - k; --c) v.fixed_null_directions.push_back(sp.frame.col(c));
  }
  return v;
}

Theorem2Report theorem2_certificate(const Operator& op, const ScalarField& f, const Vector& x,
                                    double tau_zero) {
  if (!(tau_zero > 0.0)) throw InputError("theorem2_certificate: tau_zero must be positive");
  const Jet4 jet = f.jet4(x);
  const int n = jet.dim();
  const Spectrum sp = eigh(jet.d2u);
  Theorem2Report rep;
  rep.eigenvalues = sp.eigenvalues;
  int k = 0;
  while (k < n && sp.eigenvalues(k) <= tau_zero) ++k;
  rep.k = k;
  if (k == 0) {
    rep.empty = true;
    return rep;
  }
  if (k < n && !(sp.eigenvalues(k) > 10.0 * tau_zero))
    throw PreconditionError("theorem2_certificate: no strict gap above the null eigenvalues");

  const Tensor3 d3 = jet.d3u.rotated(sp.frame);
  const Tensor4 d4 = jet.d4u.rotated(sp.frame);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int i = 0; i < n; ++i) {
        const double t = std::abs(d3(p, q, i));
        if (p < k && q < k) rep.residual_a = std::max(rep.residual_a, t);
        if (i < k && p >= k && q >= k) rep.residual_b = std::max(rep.residual_b, t);
      }

  Matrix R = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double r = 0.0;
      for (int j = 0; j < k; ++j) {
        r += d4(j, j, a, b);
        for (int m = k; m < n; ++m) r -= 2.0 * d3(m, a, j) * d3(m, b, j) / sp.eigenvalues(m);
      }
      R(a, b) = r;
    }
  const OperatorJet oj = operator_jet(op, OperatorState{jet.d2u, jet.du, jet.u, x});
  const Matrix F = sp.frame.transpose() * oj.Fab.matrix() * sp.frame;
  rep.residual_c = std::abs((F.array() * R.array()).sum());
  rep.r_norm = R.norm();
  return rep;
}

std::string format_rankmap_csv(const std::vector<RankSample>& samples) {
  std::string out;
  if (samples.empty()) return out;
  const int n = static_cast<int>(samples.front().x.size());
  for (int i = 1; i <= n; ++i) out += "x" + std::to_string(i) + ",";
  for (int i = 1; i <= n; ++i) out += "lambda" + std::to_string(i) + ",";
  out += "rank\n";
  for (const auto& s : samples) {
    for (int i = 0; i < n; ++i) out += format_double(s.x(i)) + ",";
    for (int i = 0; i < n; ++i) out += format_double(s.eigenvalues(i)) + ",";
    out += std::to_string(s.rank) + "\n";
  }
  return out;
}

}  // namespace ranklab
