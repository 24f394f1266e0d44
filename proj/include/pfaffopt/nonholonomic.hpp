#pragma once

// Programs constrained by Pfaff forms: critical points of f on every integral
// manifold (grad f + sum_q s_q mu_q w^q = 0), continuation in mu,
// classification by the restricted second-order form, Frobenius test,
// the attached Riemannian data, the ODE-built dual theta and the Wolfe dual.

#include <optional>
#include <string>
#include <vector>

#include "pfaffopt/holonomic.hpp"
#include "pfaffopt/program.hpp"

namespace pfaffopt::nonholonomic {

using numerics::Matrix;
using numerics::Signature;
using numerics::Vector;

struct NcpPoint {
  Vector x;
  Vector mu;                      // one entry per Pfaff form
  double residual = 0.0;          // inf-norm of grad f + sum s_q mu_q w^q
  double objective = 0.0;
  Classification classification = Classification::degenerate;
  Signature signature;
  std::vector<Vector> tangent;    // orthonormal basis of the intersection of the H_x
  bool sign_feasible = true;      // multiplier signs agree with inequality forms
  std::string note;               // why classification is degenerate, if known
};

// --- Frobenius ------------------------------------------------------------------

struct FrobeniusResult {
  bool integrable = true;
  std::optional<Vector> witness;  // first sample with a nonzero w ^ dw component
  double max_component = 0.0;
  int samples = 0;
  int non_integrable_samples = 0;
};

/// Components C_ijk (i<j<k) of w ^ dw, symbolic.
std::vector<Expr> wedge_dw(const PfaffForm& w, const VarSpace& space);

FrobeniusResult frobenius_test(const PfaffForm& w, const VarSpace& space, const std::vector<Vector>& points,
                               double tol = 1e-10);
FrobeniusResult frobenius_test(const PfaffForm& w, const VarSpace& space, const StartSpec& starts,
                               double tol = 1e-10);

// --- critical points ---------------------------------------------------------------

/// Residual expressions grad f + sum_q s_q mu_q w^q over (x, mu).
std::vector<Expr> ncp_residual(const Program& p);

/// Fills classification, signature and tangent basis; throws InputError when
/// the form rows are rank-deficient at x.
void classify_ncp(const Program& p, NcpPoint& pt);

/// Q = Hess f + sum_q s_q mu_q sym(Dw^q) at (x, mu).
Matrix second_order_form(const Program& p, const Vector& x, const Vector& mu);

/// a = Hess f + sum_q s_q mu_q Dw^q (unsymmetrized) at (x, mu).
Matrix curve_matrix(const Program& p, const Vector& x, const Vector& mu);

struct NcpSolveResult {
  std::vector<NcpPoint> points;
  std::string diagnostic;
};

NcpSolveResult ncp_solve(const Program& p, const Vector& mu, const StartSpec& starts,
                         const numerics::NewtonOptions& opts = {});

struct CurvePoint {
  Vector mu;
  NcpPoint point;
  double det_a = 0.0;
};

struct CriticalCurve {
  std::vector<CurvePoint> points;
  bool fold = false;               // truncated where |det a| <= 1e-10
  std::optional<Vector> fold_mu;
  std::string note;
};

/// Continuation through the given multiplier vectors, warm-started from x0.
CriticalCurve critical_curve(const Program& p, const std::vector<Vector>& mus, const Vector& x0);

/// Single form: mu from `from` to `to` in `count` points, first point found by multistart.
CriticalCurve critical_curve(const Program& p, double from, double to, int count, const StartSpec& starts);

// --- attached Riemannian data ----------------------------------------------------

struct RiemannAttachment {
  Matrix a;        // Hess f + s mu Dw
  Matrix g;        // a^T a
  Vector eta;      // a^T (s w)
  Vector xprime;   // dx/dmu = -a^{-1} (s w)
  Matrix h;        // Hess f + s mu sym(Dw)
  double identity_residual = 0.0;  // |g x' x' + eta x'|
  double eta_dot_xprime = 0.0;
  bool identity_ok = false;
  bool obtuse = false;
};

RiemannAttachment riemann_attach(const Program& p, const NcpPoint& pt);

// --- duals ---------------------------------------------------------------------------

/// theta(mu) = f*(mu) + mu . c(mu) with dc/dmu = -(1/mu) df*/dmu, c(mu0) = 0.
/// Several forms: the grid holds ray parameters t and mu = t * mu0.
holonomic::DualFunction theta_dual(const Program& p, const Vector& mu0, const Vector& x0,
                                   const std::vector<double>& grid, const holonomic::EcOptions& opts = {});

/// theta'(mu0) along the anchor direction (5-point difference).
double theta_anchor_slope(const holonomic::DualFunction& theta, double h = 1e-3);

struct WolfeSample {
  Vector mu;
  double value = 0.0;   // f(x(mu))
  Vector x;
  bool ok = false;      // a critical point was found
};

struct WolfeNonholonomicResult {
  std::vector<WolfeSample> samples;
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<Vector> argmin;     // grid points within tolerance of the minimum
  std::vector<Vector> argmax;
  std::vector<bool> argmin_interior;  // gradient of phi vanishes (else boundary minimum)
  bool found = false;
};

/// Extrema of mu -> f(x(mu)) over a tensor grid of multipliers.
WolfeNonholonomicResult wolfe_nonholonomic(const Program& p, const std::vector<holonomic::GridAxis>& box,
                                           const StartSpec& starts, double tol = 1e-10);

// --- integral submanifolds --------------------------------------------------------------

struct IntegralCheck {
  double distribution_residual = 0.0;  // |dg^T nu - w| / |w|, maximized over probe points
  double lagrange_residual = 0.0;      // |grad f + dg^T lambda| at the point
  double constraint_residual = 0.0;    // |g(pt)|
  Vector lambda;
  int probes = 0;
  bool ok = false;
};

/// Checks that {g = 0} is an integral manifold of the (single) Pfaff form
/// through pt and that pt is a classical Lagrange critical point of f on it.
/// Throws InputError when g is not tangent to the distribution.
IntegralCheck integral_constraint_check(const Program& p, const std::vector<Expr>& g, const Vector& pt,
                                        double tol = 1e-8);

// --- consumer theory ---------------------------------------------------------------------

struct ConsumerReport {
  Vector x;
  Vector proportions;
  Vector expected;    // alpha_i / sum alpha
  double max_error = 0.0;
  bool ok = false;
};

/// Solves alpha_i u(x) - mu p_i(x) x_i = 0 with u = prod x_i^alpha_i and
/// reports the spending shares p_i x_i / sum p_j x_j.
ConsumerReport consumer_demo(const Vector& alpha, const std::vector<Expr>& prices, const VarSpace& space,
                             double mu = 1.0);

}  // namespace pfaffopt::nonholonomic
