#pragma once

#include "ranklab/field.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace ranklab {

struct SemiconcavityReport {
  double K = 0.0;
  double lipschitz = 0.0;
  double max_d4 = 0.0;  // max |D^4P|_F over lattice and sampled segment points
  double max_violation = 0.0;
  std::size_t pairs = 0;
};

/// Chord test (1-t)Q(x) + tQ(y) - Q(x_t) - K t(1-t)|y-x|^2 over sampled pairs in
/// the box, Q = q_ell(eigh(D^2P)). K = Lip(h) * max |D^4P|_F.
SemiconcavityReport semiconcavity_audit(const Polynomial& P, int ell, const BoxDomain& box,
                                        std::size_t pairs, std::uint64_t seed);

/// Midpoint concavity of h = q_ell on random symmetric pairs: max over trials of
/// (h(A) + h(B))/2 - h((A+B)/2).
double h_concavity_audit(int n, int ell, std::size_t trials, std::uint64_t seed);

/// Q, DQ at a point; masked points are skipped.
struct QSample {
  double Q = 0.0;
  Vector dQ;
  bool masked = false;
};
using QSampler = std::function<QSample(const Vector&)>;

struct DqBoundReport {
  double alpha = 1.0;
  double K = 0.0;
  double sup_Q = 0.0;   // over the inner half-box
  double max_dQ = 0.0;  // |DQ| Euclidean, inner half-box
  double C_fit = 0.0;   // max |DQ|^{1+1/alpha} / sup Q
  double C_lemma = 0.0;
  std::size_t points = 0;
  std::size_t masked = 0;
  /// max over sampled (x, unit xi, r) of (Q(x + r xi) - Q(x))/r - DQ(x).xi - K r^alpha;
  /// positive values contradict semi-concavity with constant K.
  double directional_violation = 0.0;
};

/// Throws InputError when every inner point is masked.
DqBoundReport dq_bound_audit(const QSampler& q, const BoxDomain& box, double alpha, double K,
                             std::uint64_t seed, std::size_t directions = 64);
DqBoundReport dq_bound_audit(const Polynomial& P, int ell, const BoxDomain& box, double alpha,
                             std::uint64_t seed);

/// Values on a row-major lattice with per-axis spacing.
struct LatticeData {
  std::vector<int> dims;
  Vector spacing;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct HarnackReport {
  double q = 0.5;
  double f_ln = 0.0;  // |f|_{L^n} over the whole lattice
  std::vector<double> eps;
  std::vector<double> mean_q;  // (mean over inner half-box of v_eps^q)^{1/q}
  std::vector<double> inf_v;
  std::vector<double> ratio;
};

/// Mollifies Q by a bump kernel exp(-1/(1-s^2)) of radius eps (renormalized near
/// the boundary) and reports mean/(inf + |f|_{L^n} + 1e-12) on the inner half-box.
/// Requires eps >= 2 * max spacing and Q >= -1e-10 (negative values clamp to 0).
HarnackReport harnack_audit(const LatticeData& Q, const LatticeData& f, double q,
                            const std::vector<double>& eps_list);

}  // namespace ranklab
