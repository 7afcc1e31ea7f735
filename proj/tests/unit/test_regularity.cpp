#include "oracles.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/ineq.hpp"
#include "ranklab/regularity.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ranklab;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LatticeData lattice_1d(std::vector<double> values, double h) {
  LatticeData d;
  d.dims = {static_cast<int>(values.size())};
  d.spacing = Vector::Constant(1, h);
  d.values = std::move(values);
  return d;
}

}  // namespace

TEST(Semiconcavity, QuadraticHasNoViolation) {
  CounterRng rng(81, 0, 0);
  const Polynomial P = oracle::random_polynomial(3, 2, rng);
  const SemiconcavityReport r = semiconcavity_audit(P, 2, BoxDomain(Vector::Zero(3), 0.5, 5), 512, 3);
  EXPECT_EQ(r.max_d4, 0.0);
  EXPECT_EQ(r.K, 0.0);
  EXPECT_LE(r.max_violation, 1e-10);
  EXPECT_EQ(r.pairs, 512u);
}

TEST(Semiconcavity, PerturbedRadialFit) {
  const BoxDomain box(vec({2, 0}), 0.25, 11);
  const auto [fit, rep] = fit_polynomial(builtin_field("radial_r", {}, 2), box, 6);
  for (double tau : {1e-2, 1e-3, 1e-4}) {
    const Polynomial P = perturb_to_distinct(fit, box, tau);
    const SemiconcavityReport r = semiconcavity_audit(P, 1, box, 512, 5);
    EXPECT_DOUBLE_EQ(r.lipschitz, std::sqrt(2.0));
    EXPECT_GT(r.K, 0.0);
    EXPECT_LE(r.max_violation, 1e-8) << "tau " << tau;
  }
}

TEST(Semiconcavity, WeightedSumIsConcaveOnMatrices) {
  for (int n = 2; n <= 4; ++n)
    for (int ell = 1; ell <= n; ++ell) EXPECT_LE(h_concavity_audit(n, ell, 10000, 9), 1e-9);
}

TEST(DqBound, QuadraticHasConstantQ) {
  const Polynomial P = Polynomial::quadratic(Vector::Zero(2), SymMatrix::diagonal(vec({1, 2})));
  const DqBoundReport r = dq_bound_audit(P, 1, BoxDomain(Vector::Zero(2), 0.5, 9), 1.0, 11);
  EXPECT_EQ(r.max_dQ, 0.0);
  EXPECT_EQ(r.C_fit, 0.0);
  EXPECT_DOUBLE_EQ(r.sup_Q, 1.0);
  EXPECT_EQ(r.masked, 0u);
  EXPECT_EQ(r.points, 25u);
  EXPECT_LE(r.directional_violation, 1e-12);
  // max(2^2 K, (2 / r_max)^2 sup Q) with K = 0 and r_max = 0.25
  EXPECT_DOUBLE_EQ(r.C_lemma, 64.0);
}

TEST(DqBound, FitWithinLemmaConstantOnRadialRungs) {
  const BoxDomain box(vec({2, 0}), 0.25, 11);
  const auto [fit, rep] = fit_polynomial(builtin_field("radial_r", {}, 2), box, 6);
  const DqBoundReport r = dq_bound_audit(perturb_to_distinct(fit, box, 1e-3), 1, box, 1.0, 13);
  EXPECT_LE(r.directional_violation, 1e-8);
  EXPECT_LE(r.C_fit, r.C_lemma);
  EXPECT_GT(r.sup_Q, 0.0);
}

TEST(DqBound, KinkIsDetected) {
  // Q = |x1| + 1 with gradient sign(x1) e1: convex across x1 = 0, so no K bounds it.
  const QSampler kink = [](const Vector& x) {
    Vector g = Vector::Zero(x.size());
    g(0) = x(0) >= 0 ? 1.0 : -1.0;
    return QSample{std::abs(x(0)) + 1.0, g, false};
  };
  const DqBoundReport r = dq_bound_audit(kink, BoxDomain(Vector::Zero(2), 1.0, 9), 1.0, 0.1, 17);
  EXPECT_GT(r.directional_violation, 0.1);
  const QSampler smooth = [](const Vector& x) {
    return QSample{1.0 - 0.5 * x.squaredNorm(), -x, false};
  };
  EXPECT_LE(dq_bound_audit(smooth, BoxDomain(Vector::Zero(2), 1.0, 9), 1.0, 0.0, 17).directional_violation, 1e-12);
}

TEST(DqBound, RejectsBadArguments) {
  const QSampler masked = [](const Vector& x) { return QSample{0.0, Vector::Zero(x.size()), true}; };
  const BoxDomain box(Vector::Zero(2), 1.0, 5);
  EXPECT_THROW(dq_bound_audit(masked, box, 1.0, 0.0, 1), InputError);
  const QSampler one = [](const Vector& x) { return QSample{1.0, Vector::Zero(x.size()), false}; };
  EXPECT_THROW(dq_bound_audit(one, box, 0.0, 0.0, 1), InputError);
  EXPECT_THROW(dq_bound_audit(one, box, 1.5, 0.0, 1), InputError);
  EXPECT_THROW(dq_bound_audit(one, box, 1.0, -1.0, 1), InputError);
}

TEST(Harnack, ConstantHasRatioOne) {
  LatticeData Q;
  Q.dims = {9, 9};
  Q.spacing = Vector::Constant(2, 0.125);
  Q.values.assign(81, 3.0);
  LatticeData f = Q;
  f.values.assign(81, 0.0);
  const HarnackReport r = harnack_audit(Q, f, 0.5, {0.25, 0.5});
  ASSERT_EQ(r.ratio.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.mean_q[i], 3.0, 1e-12);
    EXPECT_NEAR(r.inf_v[i], 3.0, 1e-12);
    EXPECT_NEAR(r.ratio[i], 1.0, 1e-12);
  }
  EXPECT_EQ(r.f_ln, 0.0);
}

TEST(Harnack, MatchesHandMollification1d) {
  const LatticeData Q = lattice_1d({0, 1, 4, 9, 16}, 1.0);
  const LatticeData f = lattice_1d({2, 2, 2, 2, 2}, 1.0);
  const HarnackReport r = harnack_audit(Q, f, 0.5, {2.0});
  EXPECT_DOUBLE_EQ(r.f_ln, 10.0);
  // radius 2 on unit spacing reaches the neighbours at distance 1 only
  const double w0 = std::exp(-1.0), w1 = std::exp(-1.0 / 0.75);
  auto smooth = [&](int i) { return (w1 * Q.values[i - 1] + w0 * Q.values[i] + w1 * Q.values[i + 1]) / (w0 + 2 * w1); };
  const double s1 = smooth(1), s2 = smooth(2), s3 = smooth(3);
  const double mean = std::pow((std::sqrt(s1) + std::sqrt(s2) + std::sqrt(s3)) / 3, 2.0);
  EXPECT_NEAR(r.mean_q[0], mean, 1e-12);
  EXPECT_NEAR(r.inf_v[0], s1, 1e-12);
  EXPECT_NEAR(r.ratio[0], mean / (s1 + 10.0 + 1e-12), 1e-12);
}

TEST(Harnack, LargeSourceKeepsRatioFinite) {
  LatticeData Q;
  Q.dims = {17, 17};
  Q.spacing = Vector::Constant(2, 1.0 / 16);
  LatticeData f = Q;
  for (int i = 0; i < 17; ++i)
    for (int j = 0; j < 17; ++j) {
      const double x = -0.5 + i / 16.0;
      Q.values.push_back(x * x);
      f.values.push_back(100.0);
    }
  const HarnackReport r = harnack_audit(Q, f, 0.5, {0.125, 0.25});
  for (double v : r.ratio) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_LT(v, 1.0);
  }
}

TEST(Harnack, RejectsBadInput) {
  const LatticeData Q = lattice_1d({1, 1, 1, 1, 1}, 0.5);
  const LatticeData f = lattice_1d({0, 0, 0, 0, 0}, 0.5);
  EXPECT_THROW(harnack_audit(Q, f, 0.5, {0.9}), InputError);
  EXPECT_NO_THROW(harnack_audit(Q, f, 0.5, {1.0}));
  EXPECT_THROW(harnack_audit(lattice_1d({1, -1, 1, 1, 1}, 0.5), f, 0.5, {1.0}), InputError);
  EXPECT_THROW(harnack_audit(Q, lattice_1d({0, 0}, 0.5), 0.5, {1.0}), InputError);
  EXPECT_THROW(harnack_audit(Q, f, 0.0, {1.0}), InputError);
}
