#pragma once

#include "ranklab/field.hpp"
#include "ranklab/operator.hpp"

#include <string>
#include <vector>

namespace ranklab {

struct RankSample {
  Vector x;
  Vector eigenvalues;  // ascending
  int rank = 0;        // eigenvalues > tau_zero
  Matrix null_basis;   // n x k, orthonormal
};

struct RankMap {
  std::vector<RankSample> samples;  // row-major over the box lattice
  double tau_zero = 0.0;
  double min_eigenvalue = 0.0;  // convexity scan
  Vector min_point;
};

/// 1e-8 * max(1, largest Hessian eigenvalue over the box).
double default_tau_zero(const ScalarField& f, const BoxDomain& box);

/// Hessian rank at every jet-capable lattice point. Throws PreconditionError
/// naming the witness point when the smallest eigenvalue drops below -tau_zero.
RankMap rank_map(const ScalarField& f, const BoxDomain& box, double tau_zero);

struct RankVerdict {
  bool constant = true;
  int min_rank = 0;
  int max_rank = 0;
  std::vector<Vector> fixed_null_directions;
  /// Largest principal angle (radians) between the first null space and the
  /// others; NaN when the rank is not constant.
  double max_principal_angle = 0.0;
};

/// Largest principal angle between the column spans of two orthonormal bases
/// of equal width.
double max_principal_angle(const Matrix& b0, const Matrix& b1);

RankVerdict rank_verdict(const std::vector<RankSample>& samples, double theta_tol = 1e-6);

struct Theorem2Report {
  bool empty = false;  // k = 0: nothing to certify
  int k = 0;
  Vector eigenvalues;
  double residual_a = 0.0;  // max |u_pqi|, p,q < k, all i (eigenframe)
  double residual_b = 0.0;  // max |u_pqi|, i < k, p,q >= k
  double residual_c = 0.0;  // |F^{ab} R_ab|, R_ab = sum_j u_jjab - 2 sum u_maj u_mbj / lambda_m
  double r_norm = 0.0;      // |R|_F
};

/// Requires lambda_{k+1} > 10 tau_zero where k counts eigenvalues <= tau_zero.
Theorem2Report theorem2_certificate(const Operator& op, const ScalarField& f, const Vector& x,
                                    double tau_zero);

/// `x1,...,xn,lambda1,...,lambdan,rank` header, then one row per sample.
std::string format_rankmap_csv(const std::vector<RankSample>& samples);

}  // namespace ranklab
