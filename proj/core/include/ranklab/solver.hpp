#pragma once

#include "ranklab/field.hpp"
#include "ranklab/operator.hpp"

#include <Eigen/SparseCore>

#include <functional>
#include <memory>
#include <vector>

namespace ranklab {

/// F(D^2u, Du, u, x) = 0 in the box, u = g on the lattice boundary. The box
/// lattice must have equal spacing on every axis; n <= 3, 3..64 points per axis.
struct DiscreteProblem {
  std::shared_ptr<const Operator> op;
  BoxDomain box;
  std::function<double(const Vector&)> boundary;
  std::function<double(const Vector&)> initial;  // interior guess; empty: boundary function
};

void validate_problem(const DiscreteProblem& prob);

struct Assembly {
  Vector residual;  // F at interior nodes, u - g at boundary nodes
  Eigen::SparseMatrix<double> jacobian;
};

/// Central differences; mixed derivatives by the 4-point cross stencil. Interior
/// Jacobian rows combine F^{ab}, F^{p_a}, F^u with the stencil weights. Throws
/// ValidityError carrying the node index when F is undefined at a node.
Assembly assemble_residual(const DiscreteProblem& prob, const Vector& values);

/// Lattice values of a function, row-major.
Vector lattice_values(const BoxDomain& box, const std::function<double(const Vector&)>& f);
bool is_boundary_node(const BoxDomain& box, std::size_t flat);

struct NewtonOptions {
  double damping = 1.0;
  int max_iter = 50;
  double tol = 1e-10;
  bool keep_iterates = false;
};

struct NewtonTrace {
  std::vector<double> residual_inf;  // before each step, then final
  std::vector<double> step_inf;
  std::vector<int> halvings;
  std::vector<Vector> iterates;  // when keep_iterates
  bool converged = false;
};

struct NewtonResult {
  GridField field;
  NewtonTrace trace;
  double achieved_residual = 0.0;
};

/// Damped Newton with step halving (up to 30 times) until the residual 2-norm
/// decreases. Throws ConvergenceError on divergence or when max_iter is reached.
NewtonResult newton_solve(const DiscreteProblem& prob, const NewtonOptions& opt = {});

}  // namespace ranklab
