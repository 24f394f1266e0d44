#include <cmath>
#include <limits>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/numerics.hpp"

namespace pfaffopt::numerics {

NonlinearSystem make_system(std::vector<Expr> residuals, const VarSpace& space) {
  ExprMatrix jac = jacobian(residuals, space);
  NonlinearSystem sys;
  sys.residual = [residuals](const Vector& x) {
    Vector f(residuals.size());
    for (std::size_t i = 0; i < residuals.size(); ++i) f[i] = residuals[i].eval(x);
    return f;
  };
  sys.jacobian = [jac = std::move(jac), n = space.size()](const Vector& x) {
    Matrix j(jac.size(), n);
    for (std::size_t r = 0; r < jac.size(); ++r)
      for (std::size_t c = 0; c < n; ++c) j(r, c) = jac[r][c].eval(x);
    return j;
  };
  return sys;
}

namespace {

// Squared-norm merit; a domain error at a trial point counts as +inf so the
// line search backs off instead of failing.
double merit(const NonlinearSystem& sys, const Vector& x, Vector* f_out) {
  try {
    Vector f = sys.residual(x);
    const double m = dot(f, f);
    if (f_out) *f_out = std::move(f);
    return std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

NewtonResult newton_solve(const NonlinearSystem& sys, Vector x, const NewtonOptions& opts) {
  static const double kCondLimit = 1.0 / std::sqrt(std::numeric_limits<double>::epsilon());
  Vector f;
  double m = merit(sys, x, &f);
  if (!std::isfinite(m)) throw DomainError("residual undefined at the starting point");
  for (int it = 0; it <= opts.max_iter; ++it) {
    if (norm_inf(f) <= opts.tol) {
      NewtonResult res{x, it, norm_inf(f)};
      for (int k = 0; k < opts.polish_steps; ++k) {
        try {
          const Matrix j = sys.jacobian(x);
          const Vector step = solve(j, f);
          Vector trial = axpy(-1.0, step, x);
          Vector ft;
          if (merit(sys, trial, &ft) < dot(f, f)) {
            x = std::move(trial);
            f = std::move(ft);
            res = {x, it, norm_inf(f)};
          } else {
            break;
          }
        } catch (const Error&) {
          break;
        }
      }
      return res;
    }
    if (it == opts.max_iter) break;
    const Matrix j = sys.jacobian(x);
    if (j.rows() != j.cols()) throw InputError("Newton needs a square system");
    const double cond = condition_estimate(j);
    if (!(cond <= kCondLimit)) {
      throw SingularJacobianError("singular Jacobian (condition estimate " + std::to_string(cond) + ")");
    }
    const Vector step = solve(j, f);
    double alpha = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h, alpha *= 0.5) {
      Vector trial = axpy(-alpha, step, x);
      Vector ft;
      const double mt = merit(sys, trial, &ft);
      if (mt < m || (h == opts.max_halvings && std::isfinite(mt))) {
        x = std::move(trial);
        f = std::move(ft);
        m = mt;
        accepted = true;
        break;
      }
    }
    if (!accepted) throw NonConvergenceError("line search failed to reduce the residual");
  }
  throw NonConvergenceError("Newton did not converge in " + std::to_string(opts.max_iter) +
                            " iterations (residual " + std::to_string(norm_inf(f)) + ")");
}

NewtonResult levenberg_marquardt(const NonlinearSystem& sys, Vector x, const LeastSquaresOptions& opts) {
  Vector f;
  double m = merit(sys, x, &f);
  if (!std::isfinite(m)) throw DomainError("residual undefined at the starting point");
  double damping = 1e-3;
  int it = 0;
  for (; it < opts.max_iter && norm_inf(f) > opts.tol; ++it) {
    const Matrix j = sys.jacobian(x);
    const Matrix jt = j.transpose();
    const Matrix jtj = jt * j;
    const Vector g = jt * f;
    if (norm_inf(g) <= 1e-300) break;
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Matrix a = jtj;
      for (std::size_t i = 0; i < a.rows(); ++i) a(i, i) += damping * std::max(jtj(i, i), 1e-12);
      Vector step;
      try {
        step = solve(a, g);
      } catch (const SolverError&) {
        damping *= 10.0;
        continue;
      }
      Vector trial = axpy(-1.0, step, x);
      Vector ft;
      const double mt = merit(sys, trial, &ft);
      if (mt < m) {
        x = std::move(trial);
        f = std::move(ft);
        m = mt;
        damping = std::max(damping / 10.0, 1e-15);
        improved = true;
        break;
      }
      damping *= 10.0;
    }
    if (!improved) break;
  }
  return {x, it, norm_inf(f)};
}

double derivative5(const std::function<double(double)>& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace pfaffopt::numerics
