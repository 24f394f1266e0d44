#pragma once

// Small dense numeric kernel: linear algebra for systems of at most a few
// dozen unknowns, damped Newton, Levenberg-Marquardt, classical RK4,
// null-space bases and signatures of restricted quadratic forms.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "pfaffopt/expr.hpp"

namespace pfaffopt::numerics {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<Vector>& rows);
  static Matrix from_columns(const std::vector<Vector>& cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;

  Matrix transpose() const;
  double max_abs() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);
Vector axpy(double a, std::span<const double> x, std::span<const double> y);  // a x + y
Vector sub(std::span<const double> a, std::span<const double> b);

struct LuFactor {
  Matrix lu;
  std::vector<std::size_t> perm;
  int sign = 1;
  bool singular = false;
};

LuFactor lu_factor(const Matrix& a);
Vector lu_solve(const LuFactor& f, std::span<const double> b);
/// Throws SingularJacobianError when `a` is singular to working precision.
Vector solve(const Matrix& a, std::span<const double> b);
Matrix inverse(const Matrix& a);
double determinant(const Matrix& a);
/// 1-norm condition number; +infinity for singular matrices.
double condition_estimate(const Matrix& a);

/// Minimum-norm least-squares solution of a x ~ b (pseudo-inverse with
/// relative singular-value cutoff `rcond`).
Vector least_squares(const Matrix& a, std::span<const double> b, double rcond = 1e-12);

struct SymmetricEigen {
  Vector values;   // ascending
  Matrix vectors;  // column k belongs to values[k]
};

/// Cyclic Jacobi iteration. `a` must be symmetric.
SymmetricEigen symmetric_eigen(const Matrix& a);

// --- nonlinear systems ------------------------------------------------------

struct NonlinearSystem {
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> jacobian;
};

/// Residual and Jacobian from expressions over `space`; all variables are
/// unknowns.
NonlinearSystem make_system(std::vector<Expr> residuals, const VarSpace& space);

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 100;
  int max_halvings = 30;
  /// Extra full steps taken after convergence while they reduce the residual.
  int polish_steps = 2;
};

struct NewtonResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;  // infinity norm
};

/// Damped Newton with backtracking on |F|^2. Throws SingularJacobianError
/// (condition estimate above 1/sqrt(eps)) or NonConvergenceError.
NewtonResult newton_solve(const NonlinearSystem& sys, Vector x0, const NewtonOptions& opts = {});

struct LeastSquaresOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

/// Levenberg-Marquardt for possibly non-square systems. Returns the last
/// iterate; check `residual` against the tolerance you need.
NewtonResult levenberg_marquardt(const NonlinearSystem& sys, Vector x0,
                                 const LeastSquaresOptions& opts = {});

// --- ODEs --------------------------------------------------------------------

using OdeRhs = std::function<Vector(double t, const Vector& y)>;
using ScalarOdeRhs = std::function<double(double t, double y)>;

/// Classical fourth-order Runge-Kutta with `steps` equal steps from t0 to t1.
/// A DomainError raised by the right-hand side is rethrown as OdeDomainError
/// carrying the offending t.
Vector rk4_integrate(const OdeRhs& f, double t0, Vector y0, double t1, int steps);
double rk4_integrate(const ScalarOdeRhs& f, double t0, double y0, double t1, int steps);

struct TrajectoryPoint {
  double t;
  Vector y;
};
std::vector<TrajectoryPoint> rk4_trajectory(const OdeRhs& f, double t0, Vector y0, double t1,
                                            int steps);

/// Steps needed for a maximal step of `h` over [t0, t1].
int steps_for(double t0, double t1, double h);

// --- quadratic forms ---------------------------------------------------------

struct Signature {
  int n_plus = 0;
  int n_minus = 0;
  int n_zero = 0;

  int dimension() const noexcept { return n_plus + n_minus + n_zero; }
  bool positive_definite() const noexcept { return n_minus == 0 && n_zero == 0 && n_plus > 0; }
  bool negative_definite() const noexcept { return n_plus == 0 && n_zero == 0 && n_minus > 0; }
  friend bool operator==(const Signature&, const Signature&) = default;
};

/// Orthonormal basis of {v : A v = 0}: column-pivoted elimination followed by
/// Gram-Schmidt. `column_order` (a permutation of 0..n-1) changes which
/// columns are preferred as pivots and therefore the basis produced.
std::vector<Vector> null_space_basis(const Matrix& a, double tol = 1e-10,
                                     std::span<const std::size_t> column_order = {});

std::size_t matrix_rank(const Matrix& a, double tol = 1e-10);

/// Signature of B^T Q B for an orthonormal basis B. Eigenvalues with
/// |value| <= zero_tol * max|value| count as zero. Throws InputError when Q
/// is not symmetric within 1e-10.
Signature restricted_signature(const Matrix& q, const std::vector<Vector>& basis,
                               double zero_tol = 1e-8);
Signature signature(const Matrix& q, double zero_tol = 1e-8);

/// B^T Q B.
Matrix restrict_form(const Matrix& q, const std::vector<Vector>& basis);

// --- finite differences ------------------------------------------------------

/// Fourth-order central difference f'(x) with step h.
double derivative5(const std::function<double(double)>& f, double x, double h);

}  // namespace pfaffopt::numerics
