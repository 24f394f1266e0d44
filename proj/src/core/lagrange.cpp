#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>
#include <limits>

#include "holonomic_internal.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/parallel.hpp"

namespace pfaffopt::holonomic {

using numerics::NewtonOptions;
using numerics::NonlinearSystem;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double sensitivity_sign(const HolonomicConstraint& c) { return c.relation == Relation::ge ? 1.0 : -1.0; }

Lagrangian build_lagrangian(const Program& p) {
  Lagrangian out;
  out.n = p.dimension();
  std::vector<std::string> names;
  VarSpace grow = p.space;
  for (std::size_t a = 0; a < p.holonomic.size(); ++a) {
    const std::string name = grow.fresh_name(p.holonomic.size() == 1 ? "lambda" : "lambda" + std::to_string(a + 1));
    grow = grow.extended({name});
    names.push_back(name);
  }
  out.space = grow;
  out.multiplier_names = names;
  Expr L = p.objective;
  for (std::size_t a = 0; a < p.holonomic.size(); ++a) {
    const auto& c = p.holonomic[a];
    const Expr row = c.relation == Relation::ge ? Expr::constant(c.constant) - c.g : c.g - Expr::constant(c.constant);
    out.rows.push_back(row);
    L = L + Expr::variable(out.n + a, names[a]) * row;
  }
  out.L = L;
  return out;
}

namespace detail {

Vector concat(std::span<const double> a, std::span<const double> b) {
  Vector out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Model build_model(const Program& p) {
  p.validate();
  Model m;
  m.lag = build_lagrangian(p);
  m.s = p.sense == Sense::min ? 1.0 : -1.0;
  const std::size_t n = m.lag.n;
  for (std::size_t i = 0; i < n; ++i) m.grad_x.push_back(diff(m.lag.L, i));
  m.hess_x.assign(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.hess_x[i][j] = diff(m.grad_x[i], j);
  m.f_grad = gradient(p.objective, p.space);
  for (const auto& r : m.lag.rows) m.row_hess.push_back(hessian(r, p.space));
  return m;
}

numerics::NewtonResult inner_newton(const Model& m, const Vector& lambda, const Vector& x0,
                                    const NewtonOptions& opts) {
  NonlinearSystem sys;
  sys.residual = [&](const Vector& x) { return eval_all(m.grad_x, concat(x, lambda)); };
  sys.jacobian = [&](const Vector& x) { return eval_matrix(m.hess_x, concat(x, lambda)); };
  return numerics::newton_solve(sys, x0, opts);
}

LagrangeSolution describe_inner(const Program& p, const Model& m, const Vector& x, const Vector& lambda,
                                double residual) {
  LagrangeSolution s;
  s.x = x;
  s.lambda = lambda;
  s.active.assign(lambda.size(), true);
  const Vector xl = concat(x, lambda);
  s.objective = p.objective.eval(x);
  s.lagrangian = m.lag.L.eval(xl);
  s.residual = residual;
  for (std::size_t a = 0; a < m.lag.rows.size(); ++a)
    s.complementarity = std::max(s.complementarity, std::fabs(lambda[a] * m.lag.rows[a].eval(x)));
  s.infeasibility = constraint_violation(p, x);
  const Matrix h = eval_matrix(m.hess_x, xl);
  Matrix sym = h;
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t j = 0; j < h.cols(); ++j) sym(i, j) = 0.5 * (h(i, j) + h(j, i));
  s.signature = numerics::signature(sym);
  s.classification = classify(s.signature);
  return s;
}

namespace {

// Damped modified Newton on v(z) with eigenvalue shift, Armijo backtracking
// and step doubling. Returns the final point and value.
struct Descent {
  std::function<double(const Vector&)> value;
  std::function<std::pair<Vector, Matrix>(const Vector&)> derivs;
};

std::pair<Vector, double> descend(const Descent& f, Vector z, int max_iter) {
  const std::size_t n = z.size();
  double v = f.value(z);
  if (!std::isfinite(v)) return {z, v};
  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    Vector g;
    Matrix h;
    try {
      std::tie(g, h) = f.derivs(z);
    } catch (const DomainError&) {
      break;
    }
    if (numerics::norm_inf(g) <= 1e-13) break;
    Matrix hs(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) hs(i, j) = 0.5 * (h(i, j) + h(j, i));
    const auto eig = numerics::symmetric_eigen(hs);
    const double scale = std::max(1.0, hs.max_abs());
    const double shift = std::max(0.0, -eig.values.front()) + 1e-8 * scale;
    for (std::size_t i = 0; i < n; ++i) hs(i, i) += shift;
    Vector d;
    try {
      d = numerics::solve(hs, g);
      for (double& di : d) di = -di;
    } catch (const SolverError&) {
      d = g;
      for (double& di : d) di = -di;
    }
    double slope = numerics::dot(g, d);
    if (!(slope < 0)) {
      d = g;
      for (double& di : d) di = -di;
      slope = -numerics::dot(g, g);
    }
    double alpha = 1.0;
    Vector trial = numerics::axpy(alpha, d, z);
    double vt = f.value(trial);
    int halvings = 0;
    while (!(vt <= v + 1e-4 * alpha * slope) && halvings < 60) {
      alpha *= 0.5;
      trial = numerics::axpy(alpha, d, z);
      vt = f.value(trial);
      ++halvings;
    }
    if (!(vt <= v + 1e-4 * alpha * slope)) break;
    if (halvings == 0) {
      // expand while it keeps paying off; escapes to infinity quickly
      for (int k = 0; k < 40; ++k) {
        const Vector t2 = numerics::axpy(alpha * 2, d, z);
        const double v2 = f.value(t2);
        if (!(v2 < vt)) break;
        alpha *= 2;
        trial = t2;
        vt = v2;
      }
    }
    const double decrease = v - vt;
    z = std::move(trial);
    v = vt;
    if (v < -1e12) break;
    if (numerics::norm_inf(z) > 1e15) break;
    stall = decrease <= 1e-15 * std::max(1.0, std::fabs(v)) ? stall + 1 : 0;
    if (stall >= 20) break;
  }
  return {z, v};
}

}  // namespace

// Two phases per start: Newton in x, then Newton in z = asinh(x), which
// follows minimizing sequences that escape to infinity at different rates.
ProbeResult descent_probe(const Model& m, const Vector& lambda, const std::vector<Vector>& starts) {
  const std::size_t n = m.lag.n;
  auto value = [&](const Vector& x) {
    try {
      const double v = m.s * m.lag.L.eval(concat(x, lambda));
      return std::isfinite(v) ? v : kInf;
    } catch (const DomainError&) {
      return kInf;
    }
  };
  auto derivs = [&](const Vector& x) {
    Vector g = eval_all(m.grad_x, concat(x, lambda));
    Matrix h = eval_matrix(m.hess_x, concat(x, lambda));
    for (double& gi : g) gi *= m.s;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) *= m.s;
    return std::make_pair(g, h);
  };
  auto to_x = [](const Vector& z) {
    Vector x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = std::sinh(z[i]);
    return x;
  };
  const Descent plain{value, derivs};
  const Descent stretched{[&](const Vector& z) { return value(to_x(z)); },
                          [&](const Vector& z) {
                            auto [g, h] = derivs(to_x(z));
                            Vector c(n);
                            for (std::size_t i = 0; i < n; ++i) c[i] = std::cosh(z[i]);
                            for (std::size_t i = 0; i < n; ++i)
                              for (std::size_t j = 0; j < n; ++j) h(i, j) *= c[i] * c[j];
                            for (std::size_t i = 0; i < n; ++i) h(i, i) += g[i] * std::sinh(z[i]);
                            for (std::size_t i = 0; i < n; ++i) g[i] *= c[i];
                            return std::make_pair(g, h);
                          }};
  ProbeResult best{false, kInf, {}};
  for (const auto& start : starts) {
    auto [x, v] = descend(plain, start, 400);
    if (!std::isfinite(v)) continue;
    if (v > -1e12) {
      Vector z(n);
      for (std::size_t i = 0; i < n; ++i) z[i] = std::asinh(x[i]);
      auto [z2, v2] = descend(stretched, z, 400);
      if (v2 < v) {
        x = to_x(z2);
        v = v2;
      }
    }
    if (v < -1e12) return {true, -m.s * kInf, x};
    if (v < best.value) best = {false, v, x};
  }
  if (std::isfinite(best.value)) best.value *= m.s;
  return best;
}

}  // namespace detail

using detail::Model;

InnerResult solve_inner(const Program& p, const Vector& lambda, const StartSpec& starts, const NewtonOptions& opts) {
  if (lambda.size() != p.holonomic.size()) throw InputError("multiplier vector has the wrong length");
  const Model m = detail::build_model(p);
  const auto points = sample_points(p.space, starts);
  std::vector<std::optional<numerics::NewtonResult>> results(points.size());
  parallel_for(points.size(), [&](std::size_t k) {
    try {
      results[k] = detail::inner_newton(m, lambda, points[k], opts);
    } catch (const Error&) {
    }
  });
  InnerResult out;
  std::vector<Vector> seen;
  for (const auto& r : results) {
    if (!r) continue;
    if (insert_unique(seen, r->x)) out.roots.push_back(detail::describe_inner(p, m, r->x, lambda, r->residual));
  }
  if (out.roots.empty())
    out.diagnostic = "grad_x L has no root from " + std::to_string(points.size()) + " starts";
  return out;
}

std::string_view dual_flag_name(DualFlag f) {
  switch (f) {
    case DualFlag::infimum: return "infimum";
    case DualFlag::stationary: return "stationary";
    case DualFlag::unattained: return "unattained";
    case DualFlag::unbounded: return "unbounded";
  }
  return "unbounded";
}

std::string_view dual_kind_name(DualKind k) {
  switch (k) {
    case DualKind::lagrange_psi: return "lagrange_psi";
    case DualKind::ec_phi: return "ec_phi";
    case DualKind::wolfe: return "wolfe";
    case DualKind::nonholonomic_theta: return "nonholonomic_theta";
  }
  return "lagrange_psi";
}

std::vector<double> axis_values(const GridAxis& a) {
  if (a.count < 1) throw InputError("grid axis needs at least one point");
  if (a.log_scale && (a.from <= 0 || a.to <= 0)) throw InputError("log-scale axis needs positive ends");
  std::vector<double> out;
  for (int k = 0; k < a.count; ++k) {
    const double t = a.count == 1 ? 0.0 : static_cast<double>(k) / (a.count - 1);
    out.push_back(a.log_scale ? std::exp(std::log(a.from) + t * (std::log(a.to) - std::log(a.from)))
                              : a.from + t * (a.to - a.from));
  }
  return out;
}

std::vector<Vector> tensor_grid(const std::vector<GridAxis>& axes) {
  std::vector<Vector> out{Vector{}};
  for (const auto& a : axes) {
    std::vector<Vector> next;
    for (const auto& prefix : out)
      for (double v : axis_values(a)) {
        Vector p = prefix;
        p.push_back(v);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

namespace {

bool right_curvature(const LagrangeSolution& r, double s) {
  return s > 0 ? r.signature.n_minus == 0 : r.signature.n_plus == 0;
}

DualSample psi_at(const Program& p, const Model& m, const Vector& lambda, const std::vector<Vector>& starts) {
  DualSample out;
  out.multipliers = lambda;
  std::vector<LagrangeSolution> roots;
  std::vector<Vector> seen;
  for (const auto& x0 : starts) {
    try {
      const auto r = detail::inner_newton(m, lambda, x0);
      if (insert_unique(seen, r.x)) roots.push_back(detail::describe_inner(p, m, r.x, lambda, r.residual));
    } catch (const Error&) {
    }
  }
  const double s = m.s;
  const LagrangeSolution* pick = nullptr;
  for (const auto& r : roots)
    if (right_curvature(r, s) && (!pick || s * r.lagrangian < s * pick->lagrangian)) pick = &r;
  const std::vector<Vector> probe_starts(starts.begin(), starts.begin() + std::min<std::size_t>(4, starts.size()));
  if (pick) {
    out.flag = DualFlag::infimum;
    out.value = pick->lagrangian;
    out.x = pick->x;
    const auto probe = detail::descent_probe(m, lambda, probe_starts);
    if (probe.unbounded) {
      out.certified_bound = -s * kInf;
    } else {
      out.certified_bound = std::isfinite(probe.value) && s * probe.value < s * out.value ? probe.value : out.value;
    }
    return out;
  }
  if (!roots.empty()) {
    // several stationary values: f*(lambda) is the largest objective among them
    for (const auto& r : roots)
      if (!pick || r.objective > pick->objective) pick = &r;
    out.flag = DualFlag::stationary;
    out.value = pick->lagrangian;
    out.x = pick->x;
    out.certified_bound = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const auto probe = detail::descent_probe(m, lambda, probe_starts);
  if (probe.unbounded) {
    out.flag = DualFlag::unbounded;
    out.value = -s * kInf;
    out.certified_bound = -s * kInf;
  } else if (std::isfinite(probe.value)) {
    out.flag = DualFlag::unattained;
    out.value = probe.value;
    out.certified_bound = probe.value;
  } else {
    out.flag = DualFlag::unbounded;
    out.value = -s * kInf;
    out.certified_bound = -s * kInf;
  }
  out.x = probe.x;
  return out;
}

}  // namespace

DualSample evaluate_psi(const Program& p, const Vector& lambda, const StartSpec& starts) {
  if (lambda.size() != p.holonomic.size()) throw InputError("multiplier vector has the wrong length");
  const Model m = detail::build_model(p);
  return psi_at(p, m, lambda, sample_points(p.space, starts));
}

namespace {

// Joint Newton on (x, lambda): grad_x L = 0, h(x) = 0. This is the stationary
// point of psi (envelope theorem: dpsi/dlambda = h(x(lambda))).
std::optional<std::pair<Vector, Vector>> dual_stationary(const Model& m, const Vector& x0, const Vector& l0) {
  const std::size_t n = m.lag.n;
  const std::size_t k = l0.size();
  std::vector<Expr> eqs = m.grad_x;
  for (const auto& r : m.lag.rows) eqs.push_back(r);
  const auto sys = numerics::make_system(eqs, m.lag.space);
  try {
    const auto r = numerics::newton_solve(sys, detail::concat(x0, l0));
    Vector x(r.x.begin(), r.x.begin() + n);
    Vector l(r.x.begin() + n, r.x.begin() + n + k);
    return std::make_pair(x, l);
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

DualFunction lagrange_dual(const Program& p, const std::vector<GridAxis>& grid, const StartSpec& starts) {
  if (grid.size() != p.holonomic.size()) throw InputError("grid dimension must equal the number of constraints");
  const auto m = std::make_shared<Model>(detail::build_model(p));
  const auto points = sample_points(p.space, starts);
  DualFunction out;
  out.kind = DualKind::lagrange_psi;
  const Program prog = p;
  out.evaluator = [m, points, prog](const Vector& l) { return psi_at(prog, *m, l, points); };
  const auto lambdas = tensor_grid(grid);
  out.samples.resize(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) { out.samples[i] = psi_at(p, *m, lambdas[i], points); });

  // optimum: best finite sample, refined by the stationarity system of psi
  const double s = m->s;
  const DualSample* best = nullptr;
  for (const auto& smp : out.samples) {
    if (smp.flag == DualFlag::unbounded) continue;
    if (!best || s * smp.value > s * best->value) best = &smp;
  }
  if (!best) return out;
  out.optimum.found = true;
  out.optimum.argument = best->multipliers;
  out.optimum.value = best->value;
  out.optimum.x = best->x;
  out.optimum.attained = false;
  out.optimum.kind = "boundary";
  if (best->flag == DualFlag::infimum || best->flag == DualFlag::stationary) {
    Vector lo(grid.size()), hi(grid.size());
    for (std::size_t a = 0; a < grid.size(); ++a) {
      lo[a] = std::min(grid[a].from, grid[a].to);
      hi[a] = std::max(grid[a].from, grid[a].to);
    }
    const auto st = dual_stationary(*m, best->x, best->multipliers);
    if (st) {
      bool inside = true;
      for (std::size_t a = 0; a < grid.size(); ++a)
        if (st->second[a] < lo[a] - 1e-9 || st->second[a] > hi[a] + 1e-9) inside = false;
      if (inside) {
        const double v = m->lag.L.eval(detail::concat(st->first, st->second));
        out.optimum.argument = st->second;
        out.optimum.value = v;
        out.optimum.x = st->first;
        out.optimum.attained = true;
        const auto at = psi_at(p, *m, st->second, points);
        out.optimum.kind = at.flag == DualFlag::infimum ? (s > 0 ? "max" : "min") : "stationary";
      }
    }
  }
  return out;
}

// --- primal --------------------------------------------------------------------

double constraint_violation(const Program& p, std::span<const double> x) {
  double v = 0.0;
  for (const auto& c : p.holonomic) {
    const double g = c.g.eval(x) - c.constant;
    switch (c.relation) {
      case Relation::eq: v = std::max(v, std::fabs(g)); break;
      case Relation::le: v = std::max(v, g); break;
      case Relation::ge: v = std::max(v, -g); break;
    }
  }
  return v;
}

namespace {

struct ActiveSystem {
  VarSpace space;
  std::vector<Expr> eqs;
  std::vector<std::size_t> rows;
};

ActiveSystem active_system(const Program& p, const Lagrangian& lag, const std::vector<std::size_t>& active) {
  ActiveSystem a;
  a.rows = active;
  std::vector<std::string> names;
  VarSpace grow = p.space;
  for (std::size_t k = 0; k < active.size(); ++k) {
    const std::string name = grow.fresh_name("nu" + std::to_string(k + 1));
    grow = grow.extended({name});
  }
  a.space = grow;
  Expr L = p.objective;
  for (std::size_t k = 0; k < active.size(); ++k)
    L = L + Expr::variable(p.dimension() + k, a.space.name(p.dimension() + k)) * lag.rows[active[k]];
  for (std::size_t i = 0; i < p.dimension(); ++i) a.eqs.push_back(diff(L, i));
  for (auto r : active) a.eqs.push_back(lag.rows[r]);
  return a;
}

}  // namespace

std::vector<LagrangeSolution> solve_kkt(const Program& p, const StartSpec& starts, const NewtonOptions& opts) {
  p.validate();
  const Lagrangian lag = build_lagrangian(p);
  const std::size_t m = p.holonomic.size();
  std::vector<std::size_t> ineq, eq;
  for (std::size_t a = 0; a < m; ++a) (p.holonomic[a].relation == Relation::eq ? eq : ineq).push_back(a);
  if (ineq.size() > 12) throw InputError("too many inequality constraints for active-set enumeration");
  const double s = p.sense == Sense::min ? 1.0 : -1.0;
  const auto x_starts = sample_points(p.space, starts);

  std::vector<LagrangeSolution> out;
  std::vector<Vector> seen;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ineq.size()); ++mask) {
    std::vector<std::size_t> active = eq;
    for (std::size_t k = 0; k < ineq.size(); ++k)
      if (mask & (std::size_t{1} << k)) active.push_back(ineq[k]);
    std::sort(active.begin(), active.end());
    if (active.size() > p.dimension()) continue;
    const ActiveSystem sys = active_system(p, lag, active);
    const auto ns = numerics::make_system(sys.eqs, sys.space);
    // multiplier starts: a small deterministic spread
    StartSpec ms{starts.count, -2.0, 2.0, starts.seed + 7919 * (mask + 1)};
    const auto l_starts = active.empty() ? std::vector<Vector>(x_starts.size())
                                         : sample_points(VarSpace([&] {
                                             std::vector<std::string> v;
                                             for (std::size_t k = 0; k < active.size(); ++k) v.push_back("l" + std::to_string(k));
                                             return v;
                                           }()), ms);
    std::vector<std::optional<numerics::NewtonResult>> results(x_starts.size());
    parallel_for(x_starts.size(), [&](std::size_t k) {
      try {
        results[k] = numerics::newton_solve(ns, detail::concat(x_starts[k], l_starts[k]), opts);
      } catch (const Error&) {
      }
    });
    for (const auto& r : results) {
      if (!r) continue;
      Vector x(r->x.begin(), r->x.begin() + p.dimension());
      Vector lambda(m, 0.0);
      std::vector<bool> act(m, false);
      for (std::size_t k = 0; k < active.size(); ++k) {
        lambda[active[k]] = r->x[p.dimension() + k];
        act[active[k]] = true;
      }
      Vector key = detail::concat(x, lambda);
      if (!insert_unique(seen, key)) continue;
      LagrangeSolution sol;
      sol.x = x;
      sol.lambda = lambda;
      sol.active = act;
      sol.residual = r->residual;
      sol.objective = p.objective.eval(x);
      sol.lagrangian = lag.L.eval(detail::concat(x, lambda));
      sol.infeasibility = constraint_violation(p, x);
      for (std::size_t a = 0; a < m; ++a) {
        sol.complementarity = std::max(sol.complementarity, std::fabs(lambda[a] * lag.rows[a].eval(x)));
        if (p.holonomic[a].relation != Relation::eq && s * lambda[a] < -1e-8) sol.sign_feasible = false;
      }
      // restricted Hessian of L on the tangent space of the active rows
      const ExprMatrix H = hessian(lag.L, lag.space);
      const Vector xl = detail::concat(x, lambda);
      Matrix q(p.dimension(), p.dimension());
      for (std::size_t i = 0; i < p.dimension(); ++i)
        for (std::size_t j = 0; j < p.dimension(); ++j) q(i, j) = 0.5 * (H[i][j].eval(xl) + H[j][i].eval(xl));
      Matrix rows(active.size(), p.dimension());
      for (std::size_t k = 0; k < active.size(); ++k) {
        const auto g = gradient(lag.rows[active[k]], p.space);
        for (std::size_t j = 0; j < p.dimension(); ++j) rows(k, j) = g[j].eval(x);
      }
      const auto basis = active.empty() ? numerics::null_space_basis(Matrix(1, p.dimension()))
                                        : numerics::null_space_basis(rows);
      sol.signature = numerics::restricted_signature(q, basis);
      sol.classification = basis.empty() ? (s > 0 ? Classification::min : Classification::max) : classify(sol.signature);
      out.push_back(std::move(sol));
    }
  }
  std::stable_sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return s * a.objective < s * b.objective; });
  return out;
}

std::vector<Vector> feasible_samples(const Program& p, const StartSpec& starts, const FeasibilityOptions& opts) {
  std::vector<Vector> out;
  const std::size_t cap = 256;
  StartSpec rs = starts;
  rs.count = opts.rejection_samples;
  rs.seed = starts.seed + 1;
  for (const auto& x : sample_points(p.space, rs)) {
    try {
      if (constraint_violation(p, x) <= opts.tol) out.push_back(x);
    } catch (const DomainError&) {
    }
    if (out.size() >= cap / 2) break;
  }
  if (p.holonomic.empty()) return out;

  // Gauss-Newton restoration onto the constraint set
  std::vector<Expr> rows;
  std::vector<bool> is_eq;
  for (const auto& c : p.holonomic) {
    rows.push_back(c.relation == Relation::ge ? Expr::constant(c.constant) - c.g : c.g - Expr::constant(c.constant));
    is_eq.push_back(c.relation == Relation::eq);
  }
  const ExprMatrix jac = jacobian(rows, p.space);
  numerics::NonlinearSystem sys;
  sys.residual = [&](const Vector& x) {
    Vector r = eval_all(rows, x);
    for (std::size_t a = 0; a < r.size(); ++a)
      if (!is_eq[a]) r[a] = std::max(0.0, r[a]);
    return r;
  };
  sys.jacobian = [&](const Vector& x) {
    Matrix j = eval_matrix(jac, x);
    const Vector r = eval_all(rows, x);
    for (std::size_t a = 0; a < r.size(); ++a)
      if (!is_eq[a] && r[a] <= 0)
        for (std::size_t c = 0; c < j.cols(); ++c) j(a, c) = 0.0;
    return j;
  };
  StartSpec ss = starts;
  ss.count = opts.restoration_starts;
  ss.seed = starts.seed + 2;
  const auto pts = sample_points(p.space, ss);
  std::vector<std::optional<Vector>> restored(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) {
    try {
      const auto r = numerics::levenberg_marquardt(sys, pts[k], {1e-16, 400});
      if (constraint_violation(p, r.x) <= opts.tol) restored[k] = r.x;
    } catch (const Error&) {
    }
  });
  for (auto& r : restored)
    if (r && out.size() < cap) out.push_back(*r);
  return out;
}

PrimalResult solve_primal(const Program& p, const StartSpec& starts) {
  PrimalResult out;
  out.kkt = solve_kkt(p, starts);
  const double s = p.sense == Sense::min ? 1.0 : -1.0;
  for (const auto& k : out.kkt) {
    if (k.infeasibility > 1e-8 || !k.sign_feasible) continue;
    if (!out.optimum || s * k.objective < s * out.optimum->objective) out.optimum = k;
  }
  out.feasible_samples = feasible_samples(p, starts);
  bool have_sample = false;
  for (const auto& x : out.feasible_samples) {
    double v;
    try {
      v = p.objective.eval(x);
    } catch (const DomainError&) {
      continue;
    }
    if (!have_sample || s * v < s * out.sample_best) out.sample_best = v;
    have_sample = true;
  }
  if (out.optimum) {
    out.value = out.optimum->objective;
    out.value_found = true;
    out.attained = true;
    // a sample beating every KKT point means the optimum is not a KKT point
    if (have_sample && s * out.sample_best < s * out.value - 1e-9 * std::max(1.0, std::fabs(out.value))) {
      out.value = out.sample_best;
      out.attained = false;
    }
  } else if (have_sample) {
    out.value = out.sample_best;
    out.value_found = true;
  }
  return out;
}

// --- checks -------------------------------------------------------------------------

WeakDualityReport weak_duality_check(const Program& p, const PrimalResult& primal, const DualFunction& psi,
                                     double tol) {
  WeakDualityReport rep;
  std::vector<Vector> feasible = primal.feasible_samples;
  if (primal.optimum) feasible.push_back(primal.optimum->x);
  const double s = p.sense == Sense::min ? 1.0 : -1.0;
  const Lagrangian lag = build_lagrangian(p);
  if (feasible.empty()) {
    rep.note = "no feasible sample found";
    return rep;
  }
  for (const auto& x : feasible) {
    bool strict = true;
    for (std::size_t a = 0; a < lag.rows.size(); ++a) {
      const double h = lag.rows[a].eval(x);
      if (p.holonomic[a].relation == Relation::eq || h > -1e-6) strict = false;
    }
    if (strict) rep.slater_witnessed = true;
  }
  rep.max_violation = -kInf;
  for (const auto& smp : psi.samples) {
    if (smp.flag == DualFlag::stationary || std::isnan(smp.certified_bound)) continue;
    bool admissible = true;
    for (std::size_t a = 0; a < p.holonomic.size(); ++a)
      if (p.holonomic[a].relation != Relation::eq && s * smp.multipliers[a] < 0) admissible = false;
    if (!admissible) continue;
    for (const auto& x : feasible) {
      double f;
      Vector h(lag.rows.size());
      try {
        f = p.objective.eval(x);
        for (std::size_t a = 0; a < h.size(); ++a) h[a] = lag.rows[a].eval(x);
      } catch (const DomainError&) {
        continue;
      }
      // L(x, lambda) >= psi(lambda) exactly; the slack covers the restoration
      // tolerance of approximately feasible samples
      double slack = tol;
      for (std::size_t a = 0; a < h.size(); ++a) slack += std::fabs(smp.multipliers[a] * h[a]);
      ++rep.pairs_checked;
      const double viol = s * (smp.certified_bound - f) - slack;
      if (std::isfinite(viol)) rep.max_violation = std::max(rep.max_violation, viol);
      if (viol > 0) rep.holds = false;
    }
  }
  rep.conclusive = rep.pairs_checked > 0;
  if (!rep.conclusive) {
    rep.note = "no certified dual values at admissible multipliers";
    rep.max_violation = 0.0;
  } else if (!std::isfinite(rep.max_violation)) {
    rep.max_violation = -kInf;
  }
  if (psi.optimum.found) {
    rep.dual_sup = psi.optimum.value;
    rep.dual_sup_found = true;
  }
  rep.primal_value = primal.value;
  rep.primal_found = primal.value_found;
  if (rep.primal_found && rep.dual_sup_found) rep.gap = s * (rep.primal_value - rep.dual_sup);
  return rep;
}

namespace {

// Re-solves the KKT system with the same active set from a warm start.
std::optional<LagrangeSolution> resolve(const Program& p, const LagrangeSolution& sol) {
  const Lagrangian lag = build_lagrangian(p);
  std::vector<std::size_t> active;
  for (std::size_t a = 0; a < sol.active.size(); ++a)
    if (sol.active[a]) active.push_back(a);
  const ActiveSystem sys = active_system(p, lag, active);
  const auto ns = numerics::make_system(sys.eqs, sys.space);
  Vector start = sol.x;
  for (auto a : active) start.push_back(sol.lambda[a]);
  try {
    const auto r = numerics::newton_solve(ns, start);
    LagrangeSolution out = sol;
    out.x.assign(r.x.begin(), r.x.begin() + p.dimension());
    std::fill(out.lambda.begin(), out.lambda.end(), 0.0);
    for (std::size_t k = 0; k < active.size(); ++k) out.lambda[active[k]] = r.x[p.dimension() + k];
    out.objective = p.objective.eval(out.x);
    out.residual = r.residual;
    return out;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace

std::vector<SensitivityEntry> multiplier_sensitivity(const Program& p, const LagrangeSolution& sol, double delta,
                                                     double tol) {
  std::vector<SensitivityEntry> out;
  for (std::size_t a = 0; a < p.holonomic.size(); ++a) {
    SensitivityEntry e;
    Program plus = p, minus = p;
    plus.holonomic[a].constant += delta;
    minus.holonomic[a].constant -= delta;
    const auto sp = resolve(plus, sol);
    const auto sm = resolve(minus, sol);
    if (!sp || !sm) throw NonConvergenceError("re-solve failed while perturbing constraint " + std::to_string(a + 1));
    e.slope = (sp->objective - sm->objective) / (2 * delta);
    e.expected = sensitivity_sign(p.holonomic[a]) * sol.lambda[a];
    e.error = std::fabs(e.slope - e.expected);
    e.ok = e.error <= tol;
    out.push_back(e);
  }
  return out;
}

MultiplierJacobian multiplier_jacobian(const Program& p, const LagrangeSolution& sol) {
  const Lagrangian lag = build_lagrangian(p);
  const std::size_t n = p.dimension();
  const std::size_t m = p.holonomic.size();
  std::vector<Expr> eqs;
  for (std::size_t i = 0; i < n; ++i) eqs.push_back(diff(lag.L, i));
  for (const auto& r : lag.rows) eqs.push_back(r);
  const ExprMatrix J = jacobian(eqs, lag.space);
  const Matrix j = eval_matrix(J, detail::concat(sol.x, sol.lambda));
  // d/dc of the residual: rows h_a carry -c_a (or +c_a for >= rows)
  Matrix rhs(n + m, m);
  for (std::size_t a = 0; a < m; ++a) rhs(n + a, a) = p.holonomic[a].relation == Relation::ge ? -1.0 : 1.0;
  const auto lu = numerics::lu_factor(j);
  if (lu.singular) throw SingularJacobianError("KKT matrix is singular at this point");
  MultiplierJacobian out;
  out.dx_dc = Matrix(n, m);
  out.dlambda_dc = Matrix(m, m);
  for (std::size_t a = 0; a < m; ++a) {
    const Vector col = numerics::lu_solve(lu, rhs.column(a));
    for (std::size_t i = 0; i < n; ++i) out.dx_dc(i, a) = col[i];
    for (std::size_t b = 0; b < m; ++b) out.dlambda_dc(b, a) = col[n + b];
  }
  out.determinant = numerics::determinant(out.dlambda_dc);
  out.degenerate = std::fabs(out.determinant) <= 1e-10;
  return out;
}

MinimaxReport minimax_check(const Expr& phi, std::size_t dim, const std::vector<std::size_t>& x_index,
                            const std::vector<Vector>& x_grid, const std::vector<std::size_t>& y_index,
                            const std::vector<Vector>& y_grid) {
  MinimaxReport rep;
  const std::size_t nx = x_grid.size(), ny = y_grid.size();
  std::vector<double> vals(nx * ny, std::numeric_limits<double>::quiet_NaN());
  Vector pt(dim, 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      for (std::size_t k = 0; k < x_index.size(); ++k) pt[x_index[k]] = x_grid[i][k];
      for (std::size_t k = 0; k < y_index.size(); ++k) pt[y_index[k]] = y_grid[j][k];
      try {
        vals[i * ny + j] = phi.eval(pt);
        ++rep.evaluations;
      } catch (const DomainError&) {
      }
    }
  rep.max_min = -kInf;
  for (std::size_t j = 0; j < ny; ++j) {
    double mn = kInf;
    for (std::size_t i = 0; i < nx; ++i)
      if (!std::isnan(vals[i * ny + j])) mn = std::min(mn, vals[i * ny + j]);
    if (mn < kInf) rep.max_min = std::max(rep.max_min, mn);
  }
  rep.min_max = kInf;
  for (std::size_t i = 0; i < nx; ++i) {
    double mx = -kInf;
    for (std::size_t j = 0; j < ny; ++j)
      if (!std::isnan(vals[i * ny + j])) mx = std::max(mx, vals[i * ny + j]);
    if (mx > -kInf) rep.min_max = std::min(rep.min_max, mx);
  }
  rep.holds = rep.max_min <= rep.min_max;
  return rep;
}

}  // namespace pfaffopt::holonomic
