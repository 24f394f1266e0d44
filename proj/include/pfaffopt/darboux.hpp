#pragma once

// Programs written in Darboux coordinates: canonical forms, the even and odd
// critical systems, the restricted quadratic form with dz eliminated, the
// reformulation through an arbitrary generating function and the contact flow.
//
// Variable order: x^1..x^p, y^1..y^p, then z for the odd kinds.

#include <string_view>
#include <vector>

#include "pfaffopt/nonholonomic.hpp"

namespace pfaffopt::darboux {

using numerics::Matrix;
using numerics::Vector;

enum class CanonicalKind { darboux_rank_p, contact, symmetric_normal };

std::string_view canonical_kind_name(CanonicalKind k);
CanonicalKind canonical_kind_from_name(std::string_view name);  // throws InputError

/// sum x^i dy^i; sum x^i dy^i + dz; (sum x^i dy^i - y^i dx^i)/2 + dz.
PfaffForm build_canonical(CanonicalKind kind, int p, const VarSpace& space);

/// Critical points of f subject to sum x^i dy^i = 0 (space of 2p variables).
nonholonomic::NcpSolveResult solve_even(const Expr& f, const VarSpace& space, int p, double mu,
                                        const StartSpec& starts = {}, Sense sense = Sense::min);

/// Critical points of f subject to sum x^i dy^i + dz = 0 (space of 2p+1 variables).
nonholonomic::NcpSolveResult solve_odd(const Expr& f, const VarSpace& space, int p, double mu,
                                       const StartSpec& starts = {}, Sense sense = Sense::min);

struct ContactForm2 {
  Matrix written;    // expanded expression in (dx, dy) with dz = -x0 . dy substituted term by term
  Matrix projected;  // T^T Q T with T: (dx, dy) -> (dx, dy, -x0 . dy)
  double max_difference = 0.0;
  numerics::Signature signature;
  Classification classification = Classification::degenerate;
};

/// Restriction of Q = d^2 f + mu dx^i dy^i to x0^i dy^i + dz = 0 at a point of the contact program.
ContactForm2 contact_restricted_form(const Expr& f, const VarSpace& space, int p, const Vector& point, double mu);

/// min f subject to z - phi(y) = 0, x + phi'(y) = 0 over (x, y, z); phi may depend on y only.
Program phi_reformulate(const Expr& f, const Expr& phi, const VarSpace& space, Sense sense = Sense::min);

struct FlowPoint {
  double t = 0.0;
  Vector state;  // x, y, z
  double k = 0.0;
};

/// Contact Hamiltonian vector field of K for x dy + dz on (x, y, z).
std::vector<Expr> contact_rhs(const Expr& k, const VarSpace& space);

/// RK4 trajectory of the contact flow; K is recorded (not enforced) along it.
/// Throws OdeDomainError when the field leaves its domain.
std::vector<FlowPoint> contact_flow(const Expr& k, const VarSpace& space, const Vector& start, double t1, int steps);

}  // namespace pfaffopt::darboux
