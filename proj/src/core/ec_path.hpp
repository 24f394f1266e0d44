#pragma once

// Dual built from the Cauchy problem dc/dt = -(1/t) grad f*(lambda(t)),
// c(anchor) = 0, for any family of critical points x(lambda).

#include <functional>
#include <string>

#include "pfaffopt/holonomic.hpp"

namespace pfaffopt::holonomic::detail {

struct CriticalFamily {
  /// critical point at `lambda`, warm-started from `x_ref`; throws SolverError
  std::function<Vector(const Vector& lambda, const Vector& x_ref)> solve;
  std::function<double(const Vector& x)> objective;
  DualKind kind = DualKind::ec_phi;
  std::string multiplier = "multiplier";
};

DualFunction build_ec_dual(const CriticalFamily& fam, const Vector& anchor, const Vector& anchor_x,
                           const std::vector<double>& grid, const EcOptions& opts);

}  // namespace pfaffopt::holonomic::detail
