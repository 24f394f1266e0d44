#pragma once

// Precomputed symbolic pieces shared by the holonomic solvers.

#include <vector>

#include "pfaffopt/holonomic.hpp"

namespace pfaffopt::holonomic::detail {

/// Expressions over the extended space (x, lambda).
struct Model {
  Lagrangian lag;
  std::vector<Expr> grad_x;   // dL/dx_i
  ExprMatrix hess_x;          // d2L/dx_i dx_j
  std::vector<Expr> f_grad;   // over x
  std::vector<ExprMatrix> row_hess;
  double s = 1.0;             // +1 min, -1 max
};

Model build_model(const Program& p);

Vector concat(std::span<const double> a, std::span<const double> b);

/// Newton on grad_x L(., lambda) = 0 from x0.
numerics::NewtonResult inner_newton(const Model& m, const Vector& lambda, const Vector& x0,
                                    const numerics::NewtonOptions& opts = {});

/// Solution data (classification by the unrestricted Hessian) for an inner root.
LagrangeSolution describe_inner(const Program& p, const Model& m, const Vector& x, const Vector& lambda,
                                double residual);

struct ProbeResult {
  bool unbounded = false;
  double value = 0.0;   // s * L at the end (in the program's sense: L itself)
  Vector x;
};

/// Descent on s * L(., lambda) from several starts.
ProbeResult descent_probe(const Model& m, const Vector& lambda, const std::vector<Vector>& starts);

}  // namespace pfaffopt::holonomic::detail
