#include "ranklab/regularity.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/ineq.hpp"
#include "ranklab/random.hpp"
#include "parallel.hpp"

#include <cmath>

namespace ranklab {

namespace {

double q_value(const Polynomial& P, const Vector& x, int ell) {
  return q_ell(eigh(P.jet4(x).d2u), ell);
}

Vector random_point(const BoxDomain& box, CounterRng& rng) {
  Vector x(box.dim());
  for (int i = 0; i < box.dim(); ++i)
    x(i) = box.center(i) + box.half_width(i) * rng.uniform(-1.0, 1.0);
  return x;
}

Vector random_unit(int n, CounterRng& rng) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v / v.norm();
}

bool in_inner_half(const BoxDomain& box, const Vector& x) {
  for (int i = 0; i < box.dim(); ++i)
    if (std::abs(x(i) - box.center(i)) > 0.5 * box.half_width(i) * (1.0 + 1e-12)) return false;
  return true;
}

}  // namespace

SemiconcavityReport semiconcavity_audit(const Polynomial& P, int ell, const BoxDomain& box,
                                        std::size_t pairs, std::uint64_t seed) {
  const int n = P.dim();
  if (box.dim() != n) throw InputError("semiconcavity_audit: dimension mismatch");
  SemiconcavityReport rep;
  rep.pairs = pairs;
  rep.lipschitz = q_ell_lipschitz(n, ell);

  struct Trial {
    Vector x, y;
    double t;
  };
  std::vector<Trial> trials(pairs);
  for (std::size_t i = 0; i < pairs; ++i) {
    CounterRng rng(seed, stream_id("semiconcavity"), i);
    trials[i].x = random_point(box, rng);
    trials[i].y = random_point(box, rng);
    trials[i].t = i % 2 == 0 ? 0.5 : rng.uniform(0.05, 0.95);
  }

  std::vector<double> d4(box.point_count() + pairs, 0.0);
  detail::parallel_for(box.point_count(), [&](std::size_t i) { d4[i] = P.jet4(box.point(i)).d4u.frobenius(); });
  detail::parallel_for(pairs, [&](std::size_t i) {
    const Trial& tr = trials[i];
    d4[box.point_count() + i] = P.jet4((1.0 - tr.t) * tr.x + tr.t * tr.y).d4u.frobenius();
  });
  for (double v : d4) rep.max_d4 = std::max(rep.max_d4, v);
  rep.K = rep.lipschitz * rep.max_d4;

  std::vector<double> viol(pairs);
  detail::parallel_for(pairs, [&](std::size_t i) {
    const Trial& tr = trials[i];
    const Vector xt = (1.0 - tr.t) * tr.x + tr.t * tr.y;
    viol[i] = (1.0 - tr.t) * q_value(P, tr.x, ell) + tr.t * q_value(P, tr.y, ell) - q_value(P, xt, ell) -
              rep.K * tr.t * (1.0 - tr.t) * (tr.y - tr.x).squaredNorm();
  });
  rep.max_violation = pairs ? -std::numeric_limits<double>::infinity() : 0.0;
  for (double v : viol) rep.max_violation = std::max(rep.max_violation, v);
  return rep;
}

double h_concavity_audit(int n, int ell, std::size_t trials, std::uint64_t seed) {
  std::vector<double> viol(trials);
  detail::parallel_for(trials, [&](std::size_t i) {
    CounterRng rng(seed, stream_id("h_concavity"), i);
    const SymMatrix a = random_symmetric(n, rng);
    const SymMatrix b = random_symmetric(n, rng);
    viol[i] = 0.5 * (q_ell(eigh(a), ell) + q_ell(eigh(b), ell)) - q_ell(eigh(0.5 * (a + b)), ell);
  });
  double worst = -std::numeric_limits<double>::infinity();
  for (double v : viol) worst = std::max(worst, v);
  return worst;
}

DqBoundReport dq_bound_audit(const QSampler& q, const BoxDomain& box, double alpha, double K,
                             std::uint64_t seed, std::size_t directions) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("dq_bound_audit: alpha must lie in (0, 1]");
  if (!(K >= 0.0)) throw InputError("dq_bound_audit: K must be non-negative");
  DqBoundReport rep;
  rep.alpha = alpha;
  rep.K = K;
  const int n = box.dim();
  std::vector<Vector> inner;
  for (const Vector& x : box.points())
    if (in_inner_half(box, x)) inner.push_back(x);

  std::vector<QSample> s(inner.size());
  detail::parallel_for(inner.size(), [&](std::size_t i) { s[i] = q(inner[i]); });
  rep.points = inner.size();
  for (const auto& v : s) {
    if (v.masked) {
      ++rep.masked;
      continue;
    }
    rep.sup_Q = std::max(rep.sup_Q, v.Q);
    rep.max_dQ = std::max(rep.max_dQ, v.dQ.norm());
  }
  if (rep.masked == rep.points) throw InputError("dq_bound_audit: every inner point is masked");

  const double e = 1.0 + 1.0 / alpha;
  const double top = std::pow(rep.max_dQ, e);
  if (top == 0.0)
    rep.C_fit = 0.0;
  else
    rep.C_fit = rep.sup_Q > 0.0 ? top / rep.sup_Q : std::numeric_limits<double>::infinity();

  // Descent from x along -DQ by r <= r_max stays in the box and Q >= 0 there.
  const double r_max = 0.5 * box.half_width.minCoeff();
  rep.C_lemma = std::max(std::pow(2.0, e) * std::pow(K, 1.0 / alpha),
                         std::pow(2.0 / r_max, e) * std::pow(rep.sup_Q, 1.0 / alpha));

  std::vector<double> worst(inner.size(), -std::numeric_limits<double>::infinity());
  detail::parallel_for(inner.size(), [&](std::size_t i) {
    if (s[i].masked) return;
    CounterRng rng(seed, stream_id("dq_directions"), i);
    for (std::size_t d = 0; d < directions; ++d) {
      const Vector xi = random_unit(n, rng);
      for (double r : {0.5 * r_max, 0.125 * r_max, 0.03125 * r_max}) {
        const QSample y = q(inner[i] + r * xi);
        const double v = (y.Q - s[i].Q) / r - s[i].dQ.dot(xi) - K * std::pow(r, alpha);
        worst[i] = std::max(worst[i], v);
      }
    }
  });
  rep.directional_violation = -std::numeric_limits<double>::infinity();
  for (double v : worst) rep.directional_violation = std::max(rep.directional_violation, v);
  return rep;
}

DqBoundReport dq_bound_audit(const Polynomial& P, int ell, const BoxDomain& box, double alpha,
                             std::uint64_t seed) {
  const double K = semiconcavity_audit(P, ell, box, 256, seed).K;
  QSampler q = [&P, ell](const Vector& x) {
    const QJet j = q_jet(P.jet4(x), ell);
    return QSample{j.Q, j.dQ, j.masked};
  };
  return dq_bound_audit(q, box, alpha, K, seed);
}

HarnackReport harnack_audit(const LatticeData& Q, const LatticeData& f, double q,
                            const std::vector<double>& eps_list) {
  const int n = static_cast<int>(Q.dims.size());
  if (n < 1 || Q.spacing.size() != n) throw InputError("harnack_audit: malformed lattice");
  std::size_t count = 1;
  for (int d : Q.dims) count *= static_cast<std::size_t>(d);
  if (Q.values.size() != count) throw InputError("harnack_audit: value count does not match lattice");
  if (f.values.size() != count) throw InputError("harnack_audit: source lattice differs from Q");
  if (!(q > 0.0)) throw InputError("harnack_audit: q must be positive");

  std::vector<double> v(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (Q.values[i] < -1e-10) throw InputError("harnack_audit: Q is negative on the lattice");
    v[i] = std::max(0.0, Q.values[i]);
  }

  auto multi = [&](std::size_t flat) {
    std::vector<int> idx(n);
    for (int i = n - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(flat % static_cast<std::size_t>(Q.dims[i]));
      flat /= static_cast<std::size_t>(Q.dims[i]);
    }
    return idx;
  };
  auto inner = [&](const std::vector<int>& idx) {
    for (int i = 0; i < n; ++i) {
      const double c = 0.5 * (Q.dims[i] - 1);
      if (std::abs(idx[i] - c) > 0.5 * c + 1e-9) return false;
    }
    return true;
  };

  HarnackReport rep;
  rep.q = q;
  double cell = 1.0;
  for (int i = 0; i < n; ++i) cell *= Q.spacing(i);
  double fn = 0.0;
  for (double x : f.values) fn += std::pow(std::abs(x), n) * cell;
  rep.f_ln = std::pow(fn, 1.0 / n);
  const double hmax = Q.spacing.maxCoeff();

  for (double eps : eps_list) {
    if (eps < 2.0 * hmax * (1.0 - 1e-12))
      throw InputError("harnack_audit: mollification radius below two grid cells");
    std::vector<int> reach(n);
    for (int i = 0; i < n; ++i) reach[i] = static_cast<int>(std::ceil(eps / Q.spacing(i)));

    std::vector<double> smooth(count, 0.0);
    detail::parallel_for(count, [&](std::size_t flat) {
      const std::vector<int> c = multi(flat);
      std::vector<int> off(n);
      for (int i = 0; i < n; ++i) off[i] = -reach[i];
      double num = 0.0, den = 0.0;
      while (true) {
        bool inside = true;
        double s2 = 0.0;
        std::size_t nb = 0;
        for (int i = 0; i < n; ++i) {
          const int k = c[i] + off[i];
          if (k < 0 || k >= Q.dims[i]) inside = false;
          nb = nb * static_cast<std::size_t>(Q.dims[i]) + static_cast<std::size_t>(std::max(k, 0));
          const double d = off[i] * Q.spacing(i) / eps;
          s2 += d * d;
        }
        if (inside && s2 < 1.0) {
          const double w = std::exp(-1.0 / (1.0 - s2));
          num += w * v[nb];
          den += w;
        }
        int i = 0;
        while (i < n && off[i] == reach[i]) {
          off[i] = -reach[i];
          ++i;
        }
        if (i == n) break;
        ++off[i];
      }
      smooth[flat] = num / den;
    });

    double sum = 0.0, lo = std::numeric_limits<double>::infinity();
    std::size_t m = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (!inner(multi(i))) continue;
      sum += std::pow(smooth[i], q);
      lo = std::min(lo, smooth[i]);
      ++m;
    }
    const double mean = std::pow(sum / static_cast<double>(m), 1.0 / q);
    rep.eps.push_back(eps);
    rep.mean_q.push_back(mean);
    rep.inf_v.push_back(lo);
    rep.ratio.push_back(mean / (lo + rep.f_ln + 1e-12));
  }
  return rep;
}

}  // namespace ranklab
