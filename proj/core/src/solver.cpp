#include "ranklab/solver.hpp"

#include "ranklab/errors.hpp"
#include "parallel.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace ranklab {

void validate_problem(const DiscreteProblem& prob) {
  if (!prob.op) throw InputError("solver: no operator");
  if (!prob.boundary) throw InputError("solver: no boundary function");
  const BoxDomain& box = prob.box;
  const int n = box.dim();
  if (n < 1 || n > 3) throw InputError("solver: dimension must be 1, 2 or 3");
  if (box.grid_per_axis < 3 || box.grid_per_axis > 64)
    throw InputError("solver: grid_per_axis must be in [3, 64]");
  const double h = box.spacing(0);
  for (int i = 1; i < n; ++i)
    if (std::abs(box.spacing(i) - h) > 1e-12 * h)
      throw InputError("solver: lattice spacing must be equal on every axis");
}

bool is_boundary_node(const BoxDomain& box, std::size_t flat) {
  const auto g = static_cast<std::size_t>(box.grid_per_axis);
  for (int i = 0; i < box.dim(); ++i) {
    const std::size_t k = flat % g;
    flat /= g;
    if (k == 0 || k == g - 1) return true;
  }
  return false;
}

Vector lattice_values(const BoxDomain& box, const std::function<double(const Vector&)>& f) {
  Vector v(static_cast<Eigen::Index>(box.point_count()));
  for (std::size_t i = 0; i < box.point_count(); ++i) v(static_cast<Eigen::Index>(i)) = f(box.point(i));
  return v;
}

namespace {

struct Stencil {
  int n;
  double h;
  std::vector<std::ptrdiff_t> stride;

  explicit Stencil(const BoxDomain& box) : n(box.dim()), h(box.spacing(0)), stride(box.dim()) {
    std::ptrdiff_t s = 1;
    for (int i = n - 1; i >= 0; --i) {
      stride[i] = s;
      s *= box.grid_per_axis;
    }
  }

  OperatorState state(const Vector& u, std::ptrdiff_t c, const Vector& x) const {
    OperatorState s{SymMatrix(n), Vector(n), u(c), x};
    for (int a = 0; a < n; ++a) {
      const std::ptrdiff_t pa = c + stride[a], ma = c - stride[a];
      s.p(a) = (u(pa) - u(ma)) / (2.0 * h);
      s.A.set(a, a, (u(pa) - 2.0 * u(c) + u(ma)) / (h * h));
      for (int b = a + 1; b < n; ++b) {
        const double v = u(pa + stride[b]) - u(pa - stride[b]) - u(ma + stride[b]) + u(ma - stride[b]);
        s.A.set(a, b, v / (4.0 * h * h));
      }
    }
    return s;
  }
};

template <class Fn>
auto at_node(std::size_t i, Fn&& fn) {
  try {
    return fn();
  } catch (const ValidityError& e) {
    throw ValidityError(std::string(e.what()) + " at node " + std::to_string(i), i);
  }
}

Vector residual_only(const DiscreteProblem& prob, const Vector& u) {
  const BoxDomain& box = prob.box;
  const Stencil st(box);
  Vector r(u.size());
  detail::parallel_for(box.point_count(), [&](std::size_t i) {
    const Vector x = box.point(i);
    const auto c = static_cast<std::ptrdiff_t>(i);
    if (is_boundary_node(box, i))
      r(c) = u(c) - prob.boundary(x);
    else
      r(c) = at_node(i, [&] { return prob.op->value(st.state(u, c, x)); });
  });
  return r;
}

}  // namespace

Assembly assemble_residual(const DiscreteProblem& prob, const Vector& values) {
  validate_problem(prob);
  const BoxDomain& box = prob.box;
  if (values.size() != static_cast<Eigen::Index>(box.point_count()))
    throw InputError("assemble_residual: value count does not match the lattice");
  const Stencil st(box);
  const int n = st.n;
  const double h = st.h;
  const std::size_t N = box.point_count();

  Assembly out;
  out.residual.resize(static_cast<Eigen::Index>(N));
  std::vector<std::vector<Eigen::Triplet<double>>> rows(N);
  detail::parallel_for(N, [&](std::size_t i) {
    const Vector x = box.point(i);
    const auto c = static_cast<std::ptrdiff_t>(i);
    auto& t = rows[i];
    if (is_boundary_node(box, i)) {
      out.residual(c) = values(c) - prob.boundary(x);
      t.emplace_back(c, c, 1.0);
      return;
    }
    const OperatorJet j = at_node(i, [&] { return operator_jet(*prob.op, st.state(values, c, x)); });
    out.residual(c) = j.F;
    double diag = j.Fu;
    for (int a = 0; a < n; ++a) {
      diag -= 2.0 * j.Fab(a, a) / (h * h);
      const std::ptrdiff_t s = st.stride[a];
      t.emplace_back(c, c + s, j.Fab(a, a) / (h * h) + j.Fp(a) / (2.0 * h));
      t.emplace_back(c, c - s, j.Fab(a, a) / (h * h) - j.Fp(a) / (2.0 * h));
      for (int b = a + 1; b < n; ++b) {
        // A_ab and A_ba share one stencil, hence 2 F^{ab}.
        const double w = 2.0 * j.Fab(a, b) / (4.0 * h * h);
        const std::ptrdiff_t sb = st.stride[b];
        t.emplace_back(c, c + s + sb, w);
        t.emplace_back(c, c + s - sb, -w);
        t.emplace_back(c, c - s + sb, -w);
        t.emplace_back(c, c - s - sb, w);
      }
    }
    t.emplace_back(c, c, diag);
  });
  std::vector<Eigen::Triplet<double>> all;
  for (auto& r : rows) all.insert(all.end(), r.begin(), r.end());
  out.jacobian.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  out.jacobian.setFromTriplets(all.begin(), all.end());
  return out;
}

NewtonResult newton_solve(const DiscreteProblem& prob, const NewtonOptions& opt) {
  validate_problem(prob);
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw InputError("newton: damping must lie in (0, 1]");
  const BoxDomain& box = prob.box;
  const std::size_t N = box.point_count();
  Vector u(static_cast<Eigen::Index>(N));
  for (std::size_t i = 0; i < N; ++i) {
    const Vector x = box.point(i);
    const bool edge = is_boundary_node(box, i) || !prob.initial;
    u(static_cast<Eigen::Index>(i)) = edge ? prob.boundary(x) : prob.initial(x);
  }
  if (!u.allFinite()) throw InputError("newton: boundary or initial values are not finite");

  NewtonTrace trace;
  for (int it = 0;; ++it) {
    const Assembly as = assemble_residual(prob, u);
    const double rinf = as.residual.cwiseAbs().maxCoeff();
    trace.residual_inf.push_back(rinf);
    if (opt.keep_iterates) trace.iterates.push_back(u);
    if (rinf <= opt.tol) {
      trace.converged = true;
      break;
    }
    if (it >= opt.max_iter)
      throw ConvergenceError("newton: no convergence after " + std::to_string(opt.max_iter) +
                             " iterations (residual " + std::to_string(rinf) + ")");

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(as.jacobian);
    if (lu.info() != Eigen::Success) throw ConvergenceError("newton: singular Jacobian");
    const Vector delta = lu.solve(-as.residual);
    if (lu.info() != Eigen::Success || !delta.allFinite()) throw ConvergenceError("newton: linear solve failed");

    const double r2 = as.residual.norm();
    double t = opt.damping;
    int halvings = 0;
    bool accepted = false;
    for (; halvings <= 30; ++halvings, t *= 0.5) {
      const Vector cand = u + t * delta;
      try {
        if (residual_only(prob, cand).norm() < r2) {
          u = cand;
          accepted = true;
          break;
        }
      } catch (const ValidityError&) {
        // step left the validity region; shorten it
      }
    }
    if (!accepted) throw ConvergenceError("newton: residual did not decrease after 30 step halvings");
    trace.step_inf.push_back(t * delta.cwiseAbs().maxCoeff());
    trace.halvings.push_back(halvings);
  }

  const double h = box.spacing(0);
  std::vector<double> vals(u.data(), u.data() + u.size());
  NewtonResult res{GridField(h, std::vector<int>(box.dim(), box.grid_per_axis),
                             box.center - box.half_width, std::move(vals)),
                   std::move(trace), 0.0};
  res.achieved_residual = res.trace.residual_inf.back();
  return res;
}

}  // namespace ranklab
