#include "pfaffopt/nonholonomic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ec_path.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/parallel.hpp"

namespace pfaffopt::nonholonomic {

namespace {

// Symbolic pieces of grad f + sum_q s_q mu_q w^q, all over the program space.
struct Model {
  std::size_t n = 0;
  std::size_t q = 0;
  double sense = 1.0;                      // +1 min, -1 max
  Vector sign;                             // s_q
  std::vector<Expr> grad;                  // grad f
  ExprMatrix hess;                         // Hess f
  std::vector<std::vector<Expr>> w;        // w^q_i
  std::vector<ExprMatrix> dw;              // dw^q_i / dx^j
  Expr f;
  std::vector<Relation> relation;
};

Model build_model(const Program& p) {
  p.validate();
  if (p.pfaff.empty()) throw InputError("program has no Pfaff constraint");
  if (!p.holonomic.empty()) throw InputError("mixed holonomic and Pfaff constraints are not supported");
  Model m;
  m.n = p.dimension();
  m.q = p.pfaff.size();
  m.sense = p.sense == Sense::min ? 1.0 : -1.0;
  m.f = p.objective;
  m.grad = gradient(p.objective, p.space);
  m.hess = hessian(p.objective, p.space);
  for (const auto& form : p.pfaff) {
    m.sign.push_back(form.sign());
    m.w.push_back(form.coefficients);
    m.dw.push_back(jacobian(form.coefficients, p.space));
    m.relation.push_back(form.relation);
  }
  return m;
}

Vector residual_at(const Model& m, const Vector& x, const Vector& mu) {
  Vector r = eval_all(m.grad, x);
  for (std::size_t k = 0; k < m.q; ++k) {
    const double c = m.sign[k] * mu[k];
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < m.n; ++i) r[i] += c * m.w[k][i].eval(x);
  }
  return r;
}

Matrix a_at(const Model& m, const Vector& x, const Vector& mu) {
  Matrix a = eval_matrix(m.hess, x);
  for (std::size_t k = 0; k < m.q; ++k) {
    const double c = m.sign[k] * mu[k];
    if (c == 0.0) continue;
    const Matrix d = eval_matrix(m.dw[k], x);
    for (std::size_t i = 0; i < m.n; ++i)
      for (std::size_t j = 0; j < m.n; ++j) a(i, j) += c * d(i, j);
  }
  return a;
}

Matrix q_at(const Model& m, const Vector& x, const Vector& mu) {
  const Matrix a = a_at(m, x, mu);
  Matrix q(m.n, m.n);
  for (std::size_t i = 0; i < m.n; ++i)
    for (std::size_t j = 0; j < m.n; ++j) q(i, j) = 0.5 * (a(i, j) + a(j, i));
  return q;
}

Matrix rows_at(const Model& m, const Vector& x) {
  Matrix w(m.q, m.n);
  for (std::size_t k = 0; k < m.q; ++k)
    for (std::size_t i = 0; i < m.n; ++i) w(k, i) = m.w[k][i].eval(x);
  return w;
}

numerics::NewtonResult solve_at(const Model& m, const Vector& mu, const Vector& x0,
                                const numerics::NewtonOptions& opts = {}) {
  numerics::NonlinearSystem sys;
  sys.residual = [&m, mu](const Vector& x) { return residual_at(m, x, mu); };
  sys.jacobian = [&m, mu](const Vector& x) { return a_at(m, x, mu); };
  return numerics::newton_solve(sys, x0, opts);
}

void classify_with(const Model& m, NcpPoint& pt) {
  const Matrix w = rows_at(m, pt.x);
  if (numerics::matrix_rank(w, 1e-12) < m.q) throw InputError("Pfaff rows are rank-deficient at the point");
  pt.tangent = numerics::null_space_basis(w);
  pt.signature = numerics::restricted_signature(q_at(m, pt.x, pt.mu), pt.tangent);
  pt.classification = classify(pt.signature);
}

NcpPoint make_point(const Model& m, const Vector& x, const Vector& mu, double residual) {
  NcpPoint pt;
  pt.x = x;
  pt.mu = mu;
  pt.residual = residual;
  pt.objective = m.f.eval(x);
  for (std::size_t k = 0; k < m.q; ++k)
    if (m.relation[k] != Relation::eq && m.sense * mu[k] < -1e-12) pt.sign_feasible = false;
  try {
    classify_with(m, pt);
  } catch (const InputError& e) {
    pt.classification = Classification::degenerate;
    pt.note = e.what();
  }
  return pt;
}

}  // namespace

// --- Frobenius -------------------------------------------------------------------

std::vector<Expr> wedge_dw(const PfaffForm& w, const VarSpace& space) {
  const std::size_t n = space.size();
  if (n < 3) throw InputError("the Frobenius test needs at least three variables");
  if (w.coefficients.size() != n) throw InputError("form needs one coefficient per variable");
  const auto& c = w.coefficients;
  auto d = [&](std::size_t a, std::size_t b) { return diff(c[a], b); };  // d_b w_a
  std::vector<Expr> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k)
        out.push_back(c[i] * (d(k, j) - d(j, k)) + c[j] * (d(i, k) - d(k, i)) + c[k] * (d(j, i) - d(i, j)));
  return out;
}

FrobeniusResult frobenius_test(const PfaffForm& w, const VarSpace& space, const std::vector<Vector>& points,
                               double tol) {
  const auto comps = wedge_dw(w, space);
  FrobeniusResult r;
  for (const auto& x : points) {
    double worst = 0.0;
    try {
      for (const auto& c : comps) worst = std::max(worst, std::fabs(c.eval(x)));
    } catch (const DomainError&) {
      continue;
    }
    ++r.samples;
    r.max_component = std::max(r.max_component, worst);
    if (worst > tol) {
      ++r.non_integrable_samples;
      if (!r.witness) r.witness = x;
    }
  }
  r.integrable = r.non_integrable_samples == 0;
  return r;
}

FrobeniusResult frobenius_test(const PfaffForm& w, const VarSpace& space, const StartSpec& starts, double tol) {
  return frobenius_test(w, space, sample_points(space, starts), tol);
}

// --- critical points ------------------------------------------------------------------

std::vector<Expr> ncp_residual(const Program& p) {
  const Model m = build_model(p);
  VarSpace ext = p.space;
  std::vector<Expr> mu;
  for (std::size_t k = 0; k < m.q; ++k) {
    const std::string nm = ext.fresh_name(m.q == 1 ? "mu" : "mu" + std::to_string(k + 1));
    mu.push_back(Expr::variable(ext.size(), nm));
    ext = ext.extended({nm});
  }
  std::vector<Expr> out = m.grad;
  for (std::size_t k = 0; k < m.q; ++k)
    for (std::size_t i = 0; i < m.n; ++i) out[i] = out[i] + Expr::constant(m.sign[k]) * mu[k] * m.w[k][i];
  return out;
}

Matrix second_order_form(const Program& p, const Vector& x, const Vector& mu) {
  const Model m = build_model(p);
  if (mu.size() != m.q) throw InputError("multiplier vector has the wrong length");
  return q_at(m, x, mu);
}

Matrix curve_matrix(const Program& p, const Vector& x, const Vector& mu) {
  const Model m = build_model(p);
  if (mu.size() != m.q) throw InputError("multiplier vector has the wrong length");
  return a_at(m, x, mu);
}

void classify_ncp(const Program& p, NcpPoint& pt) {
  const Model m = build_model(p);
  if (pt.mu.size() != m.q) throw InputError("multiplier vector has the wrong length");
  classify_with(m, pt);
}

NcpSolveResult ncp_solve(const Program& p, const Vector& mu, const StartSpec& starts,
                         const numerics::NewtonOptions& opts) {
  const Model m = build_model(p);
  if (mu.size() != m.q) throw InputError("multiplier vector has the wrong length");
  const auto x0s = sample_points(p.space, starts);
  std::vector<std::optional<numerics::NewtonResult>> found(x0s.size());
  std::vector<std::string> errors(x0s.size());
  parallel_for(x0s.size(), [&](std::size_t k) {
    try {
      found[k] = solve_at(m, mu, x0s[k], opts);
    } catch (const Error& e) {
      errors[k] = e.what();
    }
  });
  NcpSolveResult out;
  std::vector<Vector> seen;
  for (std::size_t k = 0; k < found.size(); ++k) {
    if (!found[k]) continue;
    if (!insert_unique(seen, found[k]->x)) continue;
    out.points.push_back(make_point(m, found[k]->x, mu, found[k]->residual));
  }
  std::sort(out.points.begin(), out.points.end(), [&](const NcpPoint& a, const NcpPoint& b) {
    if (a.objective != b.objective) return m.sense * a.objective < m.sense * b.objective;
    return a.x < b.x;
  });
  if (out.points.empty()) {
    out.diagnostic = "no critical point from " + std::to_string(x0s.size()) + " starts";
    for (const auto& e : errors)
      if (!e.empty()) {
        out.diagnostic += "; first failure: " + e;
        break;
      }
  }
  return out;
}

CriticalCurve critical_curve(const Program& p, const std::vector<Vector>& mus, const Vector& x0) {
  const Model m = build_model(p);
  CriticalCurve curve;
  Vector x = x0;
  for (const auto& mu : mus) {
    if (mu.size() != m.q) throw InputError("multiplier vector has the wrong length");
    numerics::NewtonResult r;
    try {
      r = solve_at(m, mu, x);
    } catch (const SingularJacobianError&) {
      curve.fold = true;
      curve.fold_mu = mu;
      curve.note = "singular curve matrix";
      break;
    } catch (const SolverError& e) {
      curve.note = std::string("continuation lost: ") + e.what();
      break;
    }
    const double det = numerics::determinant(a_at(m, r.x, mu));
    if (std::fabs(det) <= 1e-10) {
      curve.fold = true;
      curve.fold_mu = mu;
      curve.note = "fold: |det a| <= 1e-10";
      break;
    }
    x = r.x;
    curve.points.push_back({mu, make_point(m, r.x, mu, r.residual), det});
  }
  return curve;
}

CriticalCurve critical_curve(const Program& p, double from, double to, int count, const StartSpec& starts) {
  if (p.pfaff.size() != 1) throw InputError("scalar continuation needs exactly one Pfaff form");
  if (count < 1) throw InputError("empty multiplier range");
  const auto first = ncp_solve(p, {from}, starts);
  if (first.points.empty()) throw SolverError("no critical point at the start of the range: " + first.diagnostic);
  std::vector<Vector> mus;
  for (int k = 0; k < count; ++k) mus.push_back({count == 1 ? from : from + (to - from) * k / (count - 1)});
  return critical_curve(p, mus, first.points.front().x);
}

// --- Riemannian data -------------------------------------------------------------------

RiemannAttachment riemann_attach(const Program& p, const NcpPoint& pt) {
  const Model m = build_model(p);
  if (m.q != 1) throw InputError("the attached metric is defined for a single Pfaff form");
  RiemannAttachment r;
  r.a = a_at(m, pt.x, pt.mu);
  if (std::fabs(numerics::determinant(r.a)) <= 1e-10) throw SingularJacobianError("curve matrix a is singular");
  Vector w = eval_all(m.w[0], pt.x);
  for (double& v : w) v *= m.sign[0];
  r.g = r.a.transpose() * r.a;
  r.eta = r.a.transpose() * w;
  r.xprime = numerics::solve(r.a, w);
  for (double& v : r.xprime) v = -v;
  r.h = q_at(m, pt.x, pt.mu);
  const Vector gx = r.g * r.xprime;
  r.eta_dot_xprime = numerics::dot(r.eta, r.xprime);
  r.identity_residual = std::fabs(numerics::dot(gx, r.xprime) + r.eta_dot_xprime);
  const double scale = std::max(1.0, numerics::dot(w, w));
  r.identity_ok = r.identity_residual <= 1e-8 * scale;
  r.obtuse = r.eta_dot_xprime <= 1e-12 * scale;
  return r;
}

// --- duals -------------------------------------------------------------------------------

holonomic::DualFunction theta_dual(const Program& p, const Vector& mu0, const Vector& x0,
                                   const std::vector<double>& grid, const holonomic::EcOptions& opts) {
  auto model = std::make_shared<Model>(build_model(p));
  if (mu0.size() != model->q) throw InputError("anchor must have one entry per Pfaff form");
  holonomic::detail::CriticalFamily fam;
  fam.solve = [model](const Vector& mu, const Vector& x_ref) { return solve_at(*model, mu, x_ref).x; };
  fam.objective = [model](const Vector& x) { return model->f.eval(x); };
  fam.kind = holonomic::DualKind::nonholonomic_theta;
  fam.multiplier = "mu";
  return holonomic::detail::build_ec_dual(fam, mu0, x0, grid, opts);
}

double theta_anchor_slope(const holonomic::DualFunction& theta, double h) {
  if (!theta.anchor) throw InputError("dual has no anchor");
  const Vector& anchor = *theta.anchor;
  const bool ray = anchor.size() > 1;
  const double t0 = ray ? 1.0 : anchor[0];
  auto at = [&](double t) {
    Vector mu = anchor;
    if (ray)
      for (double& v : mu) v *= t;
    else
      mu[0] = t;
    return theta.evaluator(mu).value;
  };
  return numerics::derivative5(at, t0, h * std::max(1.0, std::fabs(t0)));
}

WolfeNonholonomicResult wolfe_nonholonomic(const Program& p, const std::vector<holonomic::GridAxis>& box,
                                           const StartSpec& starts, double tol) {
  const Model m = build_model(p);
  if (box.size() != m.q) throw InputError("box needs one axis per Pfaff form");
  const auto mus = holonomic::tensor_grid(box);
  const auto x0s = sample_points(p.space, starts);
  WolfeNonholonomicResult out;
  out.samples.resize(mus.size());
  // phi(mu) = f(x(mu)); with several critical points the Wolfe objective takes the largest f
  auto phi_at = [&](const Vector& mu, const std::vector<Vector>& from) {
    WolfeSample s;
    s.mu = mu;
    for (const auto& x0 : from) {
      try {
        const auto r = solve_at(m, mu, x0);
        const double v = m.f.eval(r.x);
        if (!s.ok || v > s.value) {
          s.value = v;
          s.x = r.x;
          s.ok = true;
        }
      } catch (const Error&) {
      }
    }
    return s;
  };
  parallel_for(mus.size(), [&](std::size_t i) { out.samples[i] = phi_at(mus[i], x0s); });
  bool have = false;
  for (const auto& s : out.samples) {
    if (!s.ok) continue;
    if (!have) {
      out.min_value = out.max_value = s.value;
      have = true;
    }
    out.min_value = std::min(out.min_value, s.value);
    out.max_value = std::max(out.max_value, s.value);
  }
  out.found = have;
  if (!have) return out;
  const double lo_tol = tol * std::max(1.0, std::fabs(out.min_value));
  const double hi_tol = tol * std::max(1.0, std::fabs(out.max_value));
  for (const auto& s : out.samples) {
    if (!s.ok) continue;
    if (s.value - out.min_value <= lo_tol) {
      out.argmin.push_back(s.mu);
      // interior minimum iff the gradient of phi vanishes there
      double g = 0.0;
      for (std::size_t k = 0; k < m.q; ++k) {
        const double h = 1e-4;
        auto line = [&](double t) {
          Vector mu = s.mu;
          mu[k] = t;
          return m.f.eval(solve_at(m, mu, s.x).x);
        };
        try {
          g = std::max(g, std::fabs(numerics::derivative5(line, s.mu[k], h)));
        } catch (const Error&) {
          g = INFINITY;
        }
      }
      out.argmin_interior.push_back(g <= 1e-6);
    }
    if (out.max_value - s.value <= hi_tol) out.argmax.push_back(s.mu);
  }
  return out;
}

// --- integral submanifolds ----------------------------------------------------------------

IntegralCheck integral_constraint_check(const Program& p, const std::vector<Expr>& g, const Vector& pt,
                                        double tol) {
  const Model m = build_model(p);
  if (m.q != 1) throw InputError("integral submanifold check needs a single Pfaff form");
  if (g.empty() || g.size() >= m.n) throw InputError("submanifold needs between 1 and n-1 equations");
  if (pt.size() != m.n) throw InputError("point has the wrong dimension");
  const ExprMatrix dg = jacobian(g, p.space);
  IntegralCheck out;
  out.constraint_residual = numerics::norm_inf(eval_all(g, pt));
  if (out.constraint_residual > tol) throw InputError("point does not lie on the submanifold");

  // tangency at pt and at nearby points of {g = 0}
  std::vector<Vector> probes{pt};
  const auto sys = numerics::make_system(g, p.space);
  for (std::size_t i = 0; i < m.n; ++i)
    for (double d : {-0.05, 0.05}) {
      Vector x = pt;
      x[i] += d;
      try {
        const auto r = numerics::levenberg_marquardt(sys, x, {1e-14, 200});
        if (r.residual <= 1e-12) probes.push_back(r.x);
      } catch (const Error&) {
      }
    }
  for (const auto& x : probes) {
    Vector w;
    Matrix j;
    try {
      w = eval_all(m.w[0], x);
      j = eval_matrix(dg, x);
    } catch (const DomainError&) {
      continue;
    }
    const double wn = numerics::norm2(w);
    if (wn < 1e-14) continue;
    const Vector nu = numerics::least_squares(j.transpose(), w);
    const Vector back = j.transpose() * nu;
    out.distribution_residual = std::max(out.distribution_residual, numerics::norm2(numerics::sub(back, w)) / wn);
    ++out.probes;
  }
  if (out.distribution_residual > tol)
    throw InputError("the submanifold is not tangent to the Pfaff distribution (residual " +
                     std::to_string(out.distribution_residual) + ")");

  const Matrix j = eval_matrix(dg, pt);
  Vector rhs = eval_all(m.grad, pt);
  for (double& v : rhs) v = -v;
  out.lambda = numerics::least_squares(j.transpose(), rhs);
  out.lagrange_residual = numerics::norm_inf(numerics::sub(j.transpose() * out.lambda, rhs));
  out.ok = out.lagrange_residual <= tol;
  return out;
}

// --- consumer theory ------------------------------------------------------------------------

ConsumerReport consumer_demo(const Vector& alpha, const std::vector<Expr>& prices, const VarSpace& space, double mu) {
  const std::size_t n = space.size();
  if (alpha.size() != n || prices.size() != n) throw InputError("need one exponent and one price per good");
  double total = 0.0;
  for (double a : alpha) {
    if (!(a > 0)) throw InputError("exponents must be positive");
    total += a;
  }
  if (!(total < 1)) throw InputError("exponents must sum to less than 1");
  if (!(mu > 0)) throw InputError("multiplier must be positive");
  // log coordinates s_i = ln x_i: ln alpha_i + sum_j alpha_j s_j - ln mu - ln p_i(e^s) - s_i = 0
  std::vector<Expr> eqs;
  for (std::size_t i = 0; i < n; ++i) {
    Expr price = prices[i];
    for (std::size_t j = 0; j < n; ++j)
      price = substitute(price, j, call(Function::exp, Expr::variable(j, space.name(j))));
    Expr e = Expr::constant(std::log(alpha[i]) - std::log(mu));
    for (std::size_t j = 0; j < n; ++j) e = e + Expr::constant(alpha[j]) * Expr::variable(j, space.name(j));
    e = e - call(Function::ln, price) - Expr::variable(i, space.name(i));
    eqs.push_back(e);
  }
  const auto r = numerics::newton_solve(numerics::make_system(eqs, space), Vector(n, 0.0));
  ConsumerReport out;
  out.x.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.x[i] = std::exp(r.x[i]);
  Vector spend(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = prices[i].eval(out.x);
    if (!(pi > 0)) throw SolverError("price is not positive at the solution");
    spend[i] = pi * out.x[i];
    sum += spend[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.proportions.push_back(spend[i] / sum);
    out.expected.push_back(alpha[i] / total);
    out.max_error = std::max(out.max_error, std::fabs(out.proportions[i] - out.expected[i]));
  }
  out.ok = out.max_error <= 1e-8;
  return out;
}

}  // namespace pfaffopt::nonholonomic
