#include "oracles.hpp"

#include "ranklab/errors.hpp"
#include "ranklab/field.hpp"

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

// u = |x| with exact derivatives up to order two.
double radial(const Vector& x) { return x.norm(); }

}  // namespace

TEST(Field, BoxLatticeIsRowMajor) {
  const BoxDomain box(vec({0, 10}), vec({1, 2}), 3);
  EXPECT_EQ(box.point_count(), 9u);
  EXPECT_EQ(box.point(0), vec({-1, 8}));
  EXPECT_EQ(box.point(1), vec({-1, 10}));
  EXPECT_EQ(box.point(3), vec({0, 8}));
  EXPECT_DOUBLE_EQ(box.spacing(1), 2.0);
  EXPECT_THROW(BoxDomain(vec({0}), 1.0, 2), InputError);
  EXPECT_THROW(BoxDomain(vec({0}), -1.0, 5), InputError);
}

TEST(Field, Rank1Jet) {
  const ScalarField f = builtin_field("rank1", {{"c", {3.0}}}, 3);
  const Jet4 j = f.jet4(vec({0.2, -0.4, 0.7}));
  EXPECT_DOUBLE_EQ(j.u, 3.0 * 0.04 / 2);
  EXPECT_DOUBLE_EQ(j.d2u(0, 0), 3.0);
  EXPECT_EQ(j.d2u.frobenius(), 3.0);
  EXPECT_EQ(j.d3u.max_abs(), 0.0);
  EXPECT_EQ(j.d4u.max_abs(), 0.0);
}

TEST(Field, RadialJetOnAxis) {
  const ScalarField f = builtin_field("radial_r", {}, 3);
  const Jet4 j = f.jet4(vec({1, 0, 0}));
  EXPECT_DOUBLE_EQ(j.u, 1.0);
  EXPECT_LT((j.du - vec({1, 0, 0})).norm(), 1e-15);
  EXPECT_LT((j.d2u.matrix() - vec({0, 1, 1}).asDiagonal().toDenseMatrix()).norm(), 1e-15);
  EXPECT_DOUBLE_EQ(builtin_field("radial_r", {}, 2).value(vec({2, 0})), 2.0);
  EXPECT_THROW(f.jet4(Vector::Zero(3)), InputError);
}

TEST(Field, RadialJetMatchesFiniteDifferences) {
  const ScalarField f = builtin_field("radial_r", {}, 2);
  const Vector x = vec({1.7, -0.6});
  const Jet4 j = f.jet4(x);
  EXPECT_LT((j.du - oracle::fd_gradient_richardson(radial, x, 1e-3)).norm(), 1e-9);
  EXPECT_LT((j.d2u.matrix() - oracle::fd_hessian_richardson(radial, x, 1e-2)).norm(), 1e-8);
  // third derivatives from differences of the exact Hessian
  for (int c = 0; c < 2; ++c) {
    Vector p = x, m = x;
    p(c) += 1e-5;
    m(c) -= 1e-5;
    const Matrix d = (f.jet4(p).d2u.matrix() - f.jet4(m).d2u.matrix()) / 2e-5;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) EXPECT_NEAR(j.d3u(a, b, c), d(a, b), 1e-8);
    const Tensor3 tp = f.jet4(p).d3u, tm = f.jet4(m).d3u;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int e = 0; e < 2; ++e) EXPECT_NEAR(j.d4u(a, b, e, c), (tp(a, b, e) - tm(a, b, e)) / 2e-5, 1e-7);
  }
}

TEST(Field, QuadraticBuiltins) {
  const ScalarField diag = builtin_field("quadratic", {{"c", {1.0, 2.0, 5.0}}}, 3);
  const Jet4 j = diag.jet4(vec({0.3, 0.1, -2}));
  EXPECT_EQ(j.d2u.matrix(), vec({1, 2, 5}).asDiagonal().toDenseMatrix());
  const ScalarField full = builtin_field("quadratic", {{"c", {2.0, 1.0, 1.0, 3.0}}}, 2);
  EXPECT_DOUBLE_EQ(full.jet4(vec({1, 1})).u, 0.5 * (2 + 2 + 3));
  EXPECT_THROW(builtin_field("quadratic", {{"c", {1.0, 2.0}}}, 3), InputError);
  EXPECT_THROW(builtin_field("nope", {}, 2), InputError);
  EXPECT_THROW(builtin_field("rank1", {{"q", {1.0}}}, 2), InputError);
}

TEST(Field, ConvexPolyIsConvexOnItsBox) {
  // convex_poly is a sum of even powers of affine functions plus 0.02 |x|^2/2,
  // so its Hessian is positive definite everywhere; scan a box around the origin.
  const ScalarField f = builtin_field("convex_poly", {{"seed", {7.0}}, {"degree", {4.0}}}, 3);
  ASSERT_NE(f.polynomial(), nullptr);
  EXPECT_EQ(f.polynomial()->degree(), 4);
  const BoxDomain box(Vector::Zero(3), 1.0, 9);
  for (const Vector& x : box.points()) EXPECT_GE(oracle::eigenvalues(f.jet4(x).d2u.matrix())(0), 0.02 - 1e-12);
}

TEST(Field, GridJetExactOnQuadratics) {
  const BoxDomain box(vec({0.5, -0.25}), 1.0, 11);
  const GridField g = GridField::sample([](const Vector& x) { return x.squaredNorm(); }, box);
  const ScalarField f(g);
  for (const Vector& x : f.sample_points(box)) {
    const Jet4 j = f.jet4(x);
    EXPECT_LT((j.d2u.matrix() - 2 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((j.du - 2 * x).norm(), 1e-9);
  }
  EXPECT_EQ(f.sample_points(box).size(), 49u);
}

TEST(Field, GridRejectsOffLatticeAndEdgeQueries) {
  const BoxDomain box(Vector::Zero(2), 1.0, 9);
  const ScalarField f(GridField::sample([](const Vector& x) { return x(0); }, box));
  EXPECT_THROW(f.jet4(vec({0.01, 0})), InputError);
  EXPECT_THROW(f.jet4(vec({-0.75, 0})), InputError);
  EXPECT_NO_THROW(f.jet4(vec({-0.5, 0})));
}

TEST(Field, GridJetsConvergeAtSecondOrder) {
  // Error at the box center for grids of spacing h and h/2.
  const Vector c = vec({2.0, 0.5});
  const ScalarField exact = builtin_field("radial_r", {}, 2);
  const Jet4 e = exact.jet4(c);
  double err[2][5] = {};
  for (int r = 0; r < 2; ++r) {
    const BoxDomain box(c, 0.4, r == 0 ? 17 : 33);
    const ScalarField g(GridField::sample([&](const Vector& x) { return exact.value(x); }, box));
    const JetDeviation d = jet_deviation(g.jet4(c), e);
    for (int m = 1; m <= 4; ++m) err[r][m] = d.order[m];
  }
  for (int m = 1; m <= 4; ++m) {
    const double ratio = err[0][m] / err[1][m];
    EXPECT_GE(ratio, 3.2) << "order " << m;
    EXPECT_LE(ratio, 4.8) << "order " << m;
  }
}

TEST(Field, FitReproducesPolynomials) {
  CounterRng rng(21, 0, 0);
  const Polynomial P = oracle::random_polynomial(2, 4, rng);
  const BoxDomain box(vec({0.1, 0.2}), 0.5, 9);
  const auto [fit, rep] = fit_polynomial(ScalarField(P), box, 4);
  for (int m = 0; m < 4; ++m) EXPECT_LE(rep.deviation[m], 1e-10);
  for (const Vector& x : box.points()) EXPECT_NEAR(fit.value(x), P.value(x), 1e-10);
}

TEST(Field, FitOfRadialFieldImprovesWithDegree) {
  const BoxDomain box(vec({2, 0}), 0.3, 13);
  const ScalarField r = builtin_field("radial_r", {}, 2);
  double prev[4] = {1e300, 1e300, 1e300, 1e300};
  for (int deg = 2; deg <= 6; ++deg) {
    const auto [fit, rep] = fit_polynomial(r, box, deg);
    for (int m = 0; m < 4; ++m) {
      EXPECT_LE(rep.deviation[m], prev[m] * (1 + 1e-9)) << "degree " << deg << " order " << m;
      prev[m] = rep.deviation[m];
    }
  }
}

TEST(Field, FitOfRadialFieldThirdDerivativesDegreeSix) {
  const BoxDomain box(vec({2, 0}), 0.3, 13);
  const ScalarField r = builtin_field("radial_r", {}, 2);
  const auto [fit, rep] = fit_polynomial(r, box, 6);
  EXPECT_LT(rep.deviation[3], 1e-4);
  // independent check of the third derivatives on a finer lattice
  const BoxDomain fine(vec({2, 0}), 0.3, 25);
  double worst = 0;
  for (const Vector& x : fine.points()) worst = std::max(worst, jet_deviation(fit.jet4(x), r.jet4(x)).order[3]);
  EXPECT_LT(worst, 1e-4);
}

TEST(Field, DegreeOneFitCannotHoldCurvature) {
  const BoxDomain box(Vector::Zero(2), 1.0, 7);
  const ScalarField sq = builtin_field("quadratic", {{"c", {2.0, 2.0}}}, 2);
  const auto [fit, rep] = fit_polynomial(sq, box, 1);
  EXPECT_NEAR(rep.deviation[2], 2.0, 1e-9);
  EXPECT_THROW(fit_polynomial(sq, BoxDomain(Vector::Zero(2), 1.0, 5), 6), InputError);
}

TEST(Field, PerturbSplitsRepeatedEigenvalues) {
  const BoxDomain box(Vector::Zero(3), 0.5, 5);
  const Polynomial P = Polynomial::quadratic(Vector::Zero(3), SymMatrix::identity(3));
  EXPECT_EQ(perturb_to_distinct(P, box, 0.0), P);
  const Polynomial Q = perturb_to_distinct(P, box, 1e-3);
  const Vector ev = oracle::eigenvalues(Q.jet4(box.center).d2u.matrix());
  EXPECT_GT(ev(1) - ev(0), 0.0);
  EXPECT_GT(ev(2) - ev(1), 0.0);
  for (int j = 1; j <= 3; ++j)
    for (int m = j + 1; m <= 3; ++m) EXPECT_NE(perturbation_epsilon(j, 3), perturbation_epsilon(m, 3));
}

TEST(Field, PerturbChangesHessianByOrderTau) {
  const int n = 3;
  const BoxDomain box(vec({0.2, 0, -0.1}), 0.6, 5);
  CounterRng rng(22, 0, 0);
  const Polynomial P = oracle::random_polynomial(n, 4, rng);
  double max_eps = 0;
  for (int j = 1; j <= n; ++j) max_eps = std::max(max_eps, perturbation_epsilon(j, n));
  const double d = box.diameter();
  const double C = 2 * (1 + max_eps + n) * (1 + d * d);
  for (double tau : {1e-2, 1e-4}) {
    const Polynomial Q = perturb_to_distinct(P, box, tau);
    for (const Vector& x : box.points())
      EXPECT_LE((Q.jet4(x).d2u.matrix() - P.jet4(x).d2u.matrix()).cwiseAbs().maxCoeff(), C * tau);
  }
}

TEST(Field, PerturbedRadialFitHasDistinctPositiveEigenvalues) {
  const BoxDomain box(vec({2, 0}), 0.3, 21);
  const auto [fit, rep] = fit_polynomial(builtin_field("radial_r", {}, 2), box, 6);
  const Polynomial Q = perturb_to_distinct(fit, box, 1e-3);
  std::size_t good = 0;
  for (const Vector& x : box.points()) {
    const Vector ev = oracle::eigenvalues(Q.jet4(x).d2u.matrix());
    if (ev(0) > 0 && ev(1) - ev(0) > 0) ++good;
  }
  EXPECT_GE(static_cast<double>(good), 0.99 * static_cast<double>(box.point_count()));
}
