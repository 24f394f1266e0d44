#pragma once

// Classical programs with holonomic constraints: Lagrangian, KKT points,
// Lagrange dual psi, multiplier sensitivity, the ODE-built dual phi and the
// Wolfe dual.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pfaffopt/expr.hpp"
#include "pfaffopt/numerics.hpp"
#include "pfaffopt/program.hpp"

namespace pfaffopt::holonomic {

using numerics::Matrix;
using numerics::Signature;
using numerics::Vector;

/// L = f + sum_a lambda_a h_a with h_a = g_a - c_a, or c_a - g_a for >= rows.
struct Lagrangian {
  VarSpace space;                  // program variables followed by multipliers
  std::size_t n = 0;               // number of program variables
  Expr L;
  std::vector<Expr> rows;          // h_a over the program space
  std::vector<std::string> multiplier_names;
};

Lagrangian build_lagrangian(const Program& p);

/// sign of the multiplier-sensitivity law: df*/dc_a = sensitivity_sign(a) * lambda_a
double sensitivity_sign(const HolonomicConstraint& c);

struct LagrangeSolution {
  Vector x;
  Vector lambda;              // one entry per constraint (0 for inactive rows)
  std::vector<bool> active;   // which rows were enforced as equalities
  double objective = 0.0;     // f(x)
  double lagrangian = 0.0;    // L(x, lambda)
  double residual = 0.0;      // inf-norm of the solved system
  double complementarity = 0.0;  // max_a |lambda_a h_a(x)|
  double infeasibility = 0.0;    // max violation of the constraints
  bool sign_feasible = true;
  Classification classification = Classification::degenerate;
  Signature signature;
};

// --- inner problem and Lagrange dual ----------------------------------------

struct InnerResult {
  std::vector<LagrangeSolution> roots;  // stationary points of x -> L(x, lambda)
  std::string diagnostic;
};

InnerResult solve_inner(const Program& p, const Vector& lambda, const StartSpec& starts,
                        const numerics::NewtonOptions& opts = {});

enum class DualFlag {
  infimum,     // root with semidefinite Hessian of the right sign
  stationary,  // only stationary roots; value is the stationary value
  unattained,  // no root; the descent probe settled on a finite estimate
  unbounded    // no root; the probe ran off to -infinity (+infinity for max)
};
std::string_view dual_flag_name(DualFlag f);

enum class DualKind { lagrange_psi, ec_phi, wolfe, nonholonomic_theta };
std::string_view dual_kind_name(DualKind k);

struct DualSample {
  Vector multipliers;
  double value = 0.0;          // meaningless when flag == unbounded
  DualFlag flag = DualFlag::infimum;
  Vector x;                    // inner point the value came from (if any)
  /// A value the true inner inf (sup for max programs) cannot exceed
  /// (fall below): -inf (+inf) when the probe found the Lagrangian unbounded.
  double certified_bound = 0.0;
  /// Extra columns for ODE-built duals (f*, c...).
  Vector extra;
};

struct DualOptimum {
  bool found = false;
  Vector argument;
  double value = 0.0;
  bool attained = false;       // false: supremum approached on the grid boundary
  Vector x;                    // primal point paired with the optimum
  std::string kind;            // "max", "min", "stationary", "boundary"
};

struct DualFunction {
  DualKind kind = DualKind::lagrange_psi;
  std::function<DualSample(const Vector&)> evaluator;
  std::vector<DualSample> samples;
  DualOptimum optimum;
  std::optional<Vector> anchor;
  std::vector<std::string> columns;  // names of DualSample::extra entries
};

/// Tensor-product grid over multipliers.
struct GridAxis {
  double from = 0.0;
  double to = 0.0;
  int count = 1;
  bool log_scale = false;
};
std::vector<double> axis_values(const GridAxis& a);
std::vector<Vector> tensor_grid(const std::vector<GridAxis>& axes);

/// psi at one multiplier vector, following the selection rule documented in
/// the README (certified infimum, stationary value, or probe result).
DualSample evaluate_psi(const Program& p, const Vector& lambda, const StartSpec& starts);

DualFunction lagrange_dual(const Program& p, const std::vector<GridAxis>& grid, const StartSpec& starts);

// --- primal ------------------------------------------------------------------

struct PrimalResult {
  std::vector<LagrangeSolution> kkt;       // deduplicated, sorted by objective
  std::optional<LagrangeSolution> optimum; // best feasible, sign-feasible KKT point
  std::vector<Vector> feasible_samples;
  double sample_best = 0.0;                // best objective over feasible samples
  double value = 0.0;                      // best over KKT points and samples
  bool value_found = false;
  bool attained = false;                   // value comes from a KKT point
};

/// KKT points by active-set enumeration and multistart Newton on (x, lambda_A).
std::vector<LagrangeSolution> solve_kkt(const Program& p, const StartSpec& starts,
                                        const numerics::NewtonOptions& opts = {});

struct FeasibilityOptions {
  int rejection_samples = 2000;
  int restoration_starts = 64;
  double tol = 1e-12;
};

/// Points of the feasible set: rejection sampling inside the box, plus
/// Gauss-Newton restoration onto the constraint set for thin sets.
std::vector<Vector> feasible_samples(const Program& p, const StartSpec& starts,
                                     const FeasibilityOptions& opts = {});
double constraint_violation(const Program& p, std::span<const double> x);

PrimalResult solve_primal(const Program& p, const StartSpec& starts);

// --- duality checks -------------------------------------------------------------

struct WeakDualityReport {
  bool conclusive = false;
  bool holds = true;
  int pairs_checked = 0;
  double max_violation = 0.0;     // max over pairs of psi - f - slack (<= 0 when it holds)
  double dual_sup = 0.0;
  bool dual_sup_found = false;
  double primal_value = 0.0;
  bool primal_found = false;
  double gap = 0.0;               // primal value - dual sup (min programs)
  bool slater_witnessed = false;
  std::string note;
};

/// Pairs every certified dual value at admissible multipliers with the
/// feasible samples and the primal optimum; the gap uses the primal value.
WeakDualityReport weak_duality_check(const Program& p, const PrimalResult& primal, const DualFunction& psi,
                                     double tol = 1e-8);

struct SensitivityEntry {
  double slope = 0.0;       // central difference of f* in c_a
  double expected = 0.0;    // -lambda_a (or +lambda_a for >= rows)
  double error = 0.0;
  bool ok = false;
};

std::vector<SensitivityEntry> multiplier_sensitivity(const Program& p, const LagrangeSolution& sol,
                                                     double delta = 1e-4, double tol = 1e-4);

struct MultiplierJacobian {
  Matrix dx_dc;        // n x m
  Matrix dlambda_dc;   // m x m
  double determinant = 0.0;
  bool degenerate = false;  // |det| <= 1e-10
};

/// Implicit differentiation of the KKT system in the constants c.
MultiplierJacobian multiplier_jacobian(const Program& p, const LagrangeSolution& sol);

// --- dual built from the constant ODE dc/dlambda = -(1/lambda) df*/dlambda ------

struct EcOptions {
  double step = 1e-3;     // RK4 step
  double fd_step = 1e-3;  // finite-difference step for df*/dlambda
};

/// Single constraint: `grid` holds lambda values (one-signed, same side as the
/// anchor). Several constraints: `grid` holds ray parameters t > 0 and the
/// path is lambda = t * anchor. Extra columns: f*, c_1..c_m.
DualFunction ec_build_dual(const Program& p, const Vector& anchor, const Vector& anchor_x,
                           const std::vector<double>& grid, const EcOptions& opts = {});

struct EcDerivativeCheck {
  double max_error = 0.0;   // max |phi' - lambda0 . c| (directional on the ray)
  bool ok = false;
};
EcDerivativeCheck ec_check_derivative(const Program& p, const DualFunction& phi, double tol = 1e-5);

/// Jacobian of c(lambda) = h(x(lambda)) along the inner critical family; the
/// constant ODE needs it symmetric.
Matrix constraint_jacobian(const Program& p, const Vector& lambda, const Vector& x_ref, double h = 1e-4);

/// Dual along a closed-form multiplier family: t -> L(x(t), lambda(t)).
struct FamilyDual {
  std::vector<Expr> x;          // over the single parameter space
  std::vector<Expr> lambda;
  VarSpace parameter;
  std::vector<std::size_t> free;  // variables the family leaves undetermined
};
struct FamilyDualReport {
  double max_stationarity = 0.0;     // |grad_x L| along the family (sampled)
  double max_free_dependence = 0.0;  // spread of the value when free x are moved
  std::vector<double> critical_parameters;
  std::vector<double> critical_values;
};
FamilyDualReport family_dual(const Program& p, const FamilyDual& fam, double t_from, double t_to,
                             int samples = 41);

// --- Wolfe dual -------------------------------------------------------------------

struct WolfeResult {
  bool found = false;
  Vector x;
  Vector lambda;
  double value = 0.0;
  double stationarity = 0.0;      // |grad_x L|
  double complementarity = 0.0;   // max |lambda_a h_a|
  bool unique = true;             // false: optimum set is a continuum, tie broken
  int candidates = 0;
};

WolfeResult wolfe_dual(const Program& p, const StartSpec& starts);

// --- minimax -----------------------------------------------------------------------

struct MinimaxReport {
  double max_min = 0.0;   // max_y min_x phi
  double min_max = 0.0;   // min_x max_y phi
  bool holds = true;
  int evaluations = 0;
};

/// phi is evaluated at points of `space` built from x_grid[i] (placed at
/// x_index) and y_grid[j] (placed at y_index). Points where phi is undefined
/// are skipped.
MinimaxReport minimax_check(const Expr& phi, std::size_t dim, const std::vector<std::size_t>& x_index,
                            const std::vector<Vector>& x_grid, const std::vector<std::size_t>& y_index,
                            const std::vector<Vector>& y_grid);

}  // namespace pfaffopt::holonomic
