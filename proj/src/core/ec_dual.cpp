#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "ec_path.hpp"
#include "holonomic_internal.hpp"
#include "pfaffopt/errors.hpp"

namespace pfaffopt::holonomic {

namespace detail {

namespace {

// f*(lambda) = f(x(lambda)) along one branch of critical points; the branch is
// followed by warm starts.
class CriticalPath {
 public:
  CriticalPath(const CriticalFamily& fam, Vector x_ref) : fam_(fam), x_ref_(std::move(x_ref)) {}

  double fstar(const Vector& lambda) {
    try {
      last_x_ = fam_.solve(lambda, x_ref_);
      return fam_.objective(last_x_);
    } catch (const SolverError& e) {
      throw SolverError(std::string("critical path lost: ") + e.what());
    }
  }

  void advance(const Vector& lambda) {
    fstar(lambda);
    x_ref_ = last_x_;
  }

  const Vector& x_ref() const { return x_ref_; }

 private:
  const CriticalFamily& fam_;
  Vector x_ref_;
  Vector last_x_;
};

struct Node {
  double param;  // multiplier (single) or ray parameter t
  Vector c;
  Vector x;
};

struct EcState {
  CriticalFamily fam;
  Vector anchor;
  bool ray = false;  // several multipliers: lambda = t * anchor
  EcOptions opts;
  std::vector<Node> nodes;  // anchor first

  Vector lambda_of(double param) const {
    if (!ray) return Vector{param};
    Vector l = anchor;
    for (double& v : l) v *= param;
    return l;
  }

  Vector rhs(CriticalPath& path, double param) const {
    if (param == 0.0) throw SingularPathError("the constant ODE is singular at " + fam.multiplier + " 0");
    const std::size_t m = anchor.size();
    Vector out(m);
    const Vector base = lambda_of(param);
    for (std::size_t a = 0; a < m; ++a) {
      const double d = numerics::derivative5(
          [&](double v) {
            Vector l = base;
            l[a] = v;
            return path.fstar(l);
          },
          base[a], opts.fd_step);
      out[a] = -d / param;
    }
    return out;
  }

  Node integrate(const Node& from, double param) const {
    CriticalPath path(fam, from.x);
    Node cur = from;
    const int steps = numerics::steps_for(from.param, param, opts.step);
    const double h = (param - from.param) / steps;
    for (int k = 0; k < steps; ++k) {
      const double t0 = cur.param;
      const double t1 = from.param + (k + 1) * h;
      auto f = [&](double t, const Vector&) { return rhs(path, t); };
      cur.c = numerics::rk4_integrate(f, t0, cur.c, t1, 1);
      cur.param = t1;
      path.advance(lambda_of(t1));
    }
    cur.param = param;
    cur.x = path.x_ref();
    return cur;
  }

  const Node& nearest(double param) const {
    const Node* best = &nodes.front();
    for (const auto& n : nodes)
      if (std::fabs(n.param - param) < std::fabs(best->param - param)) best = &n;
    return *best;
  }

  DualSample sample(const Node& node) const {
    CriticalPath path(fam, node.x);
    const Vector lambda = lambda_of(node.param);
    const double fs = path.fstar(lambda);
    DualSample s;
    s.multipliers = lambda;
    s.value = fs + numerics::dot(lambda, node.c);
    s.flag = DualFlag::stationary;
    s.x = node.x;
    s.certified_bound = std::numeric_limits<double>::quiet_NaN();
    if (ray) s.extra.push_back(node.param);
    s.extra.push_back(fs);
    s.extra.insert(s.extra.end(), node.c.begin(), node.c.end());
    return s;
  }

  double param_of(const Vector& lambda) const {
    if (lambda.size() != anchor.size()) throw InputError(fam.multiplier + " vector has the wrong length");
    if (!ray) return lambda[0];
    std::size_t k = 0;
    for (std::size_t a = 0; a < anchor.size(); ++a)
      if (std::fabs(anchor[a]) > std::fabs(anchor[k])) k = a;
    const double t = lambda[k] / anchor[k];
    for (std::size_t a = 0; a < anchor.size(); ++a)
      if (std::fabs(lambda[a] - t * anchor[a]) > 1e-9 * std::max(1.0, std::fabs(lambda[a])))
        throw InputError("with several " + fam.multiplier + "s the dual is defined on the anchor ray only");
    return t;
  }
};

}  // namespace

DualFunction build_ec_dual(const CriticalFamily& fam, const Vector& anchor, const Vector& anchor_x,
                           const std::vector<double>& grid, const EcOptions& opts) {
  const std::size_t m = anchor.size();
  if (m == 0) throw InputError("the anchor is empty");
  for (double v : anchor)
    if (!std::isfinite(v)) throw InputError("anchor must be finite");
  auto st = std::make_shared<EcState>();
  st->fam = fam;
  st->anchor = anchor;
  st->ray = m > 1;
  st->opts = opts;
  const double a0 = st->ray ? 1.0 : anchor[0];
  if (a0 == 0.0 || (st->ray && numerics::norm_inf(anchor) == 0.0))
    throw SingularPathError("anchor " + fam.multiplier + " must be nonzero");
  for (double g : grid)
    if (!(g * a0 > 0)) throw SingularPathError("grid crosses or touches " + fam.multiplier + " 0");

  {
    CriticalPath path(st->fam, anchor_x);
    path.advance(st->lambda_of(a0));
    st->nodes.push_back({a0, Vector(m, 0.0), path.x_ref()});
  }

  std::vector<double> up, down;
  for (double g : grid) (g >= a0 ? up : down).push_back(g);
  std::sort(up.begin(), up.end());
  std::sort(down.begin(), down.end(), std::greater<>());
  std::vector<Node> computed;
  for (const auto* side : {&up, &down}) {
    Node cur = st->nodes.front();
    for (double g : *side) {
      cur = st->integrate(cur, g);
      computed.push_back(cur);
    }
  }
  for (auto& n : computed) st->nodes.push_back(n);

  DualFunction out;
  out.kind = fam.kind;
  out.anchor = anchor;
  if (st->ray) out.columns.push_back("t");
  out.columns.push_back("fstar");
  for (std::size_t a = 0; a < m; ++a) out.columns.push_back(m == 1 ? "c" : "c" + std::to_string(a + 1));
  for (double g : grid) {
    const Node* node = nullptr;
    for (const auto& n : st->nodes)
      if (n.param == g) node = &n;
    out.samples.push_back(st->sample(*node));
  }
  out.evaluator = [st](const Vector& lambda) {
    const double param = st->param_of(lambda);
    const double a = st->ray ? 1.0 : st->anchor[0];
    if (!(param * a > 0)) throw SingularPathError(st->fam.multiplier + " 0 is a singularity of this dual");
    const Node& from = st->nearest(param);
    return st->sample(param == from.param ? from : st->integrate(from, param));
  };
  const DualSample at = st->sample(st->nodes.front());
  out.optimum.found = true;
  out.optimum.argument = at.multipliers;
  out.optimum.value = at.value;
  out.optimum.x = at.x;
  out.optimum.attained = true;
  out.optimum.kind = "stationary";
  return out;
}

}  // namespace detail

DualFunction ec_build_dual(const Program& p, const Vector& anchor, const Vector& anchor_x,
                           const std::vector<double>& grid, const EcOptions& opts) {
  if (p.holonomic.empty()) throw InputError("the ODE-built dual needs at least one constraint");
  if (anchor.size() != p.holonomic.size()) throw InputError("anchor must have one entry per constraint");
  auto model = std::make_shared<detail::Model>(detail::build_model(p));
  detail::CriticalFamily fam;
  fam.solve = [model](const Vector& lambda, const Vector& x_ref) {
    return detail::inner_newton(*model, lambda, x_ref).x;
  };
  const Expr f = p.objective;
  fam.objective = [f](const Vector& x) { return f.eval(x); };
  fam.kind = DualKind::ec_phi;
  fam.multiplier = "multiplier";
  return detail::build_ec_dual(fam, anchor, anchor_x, grid, opts);
}

EcDerivativeCheck ec_check_derivative(const Program& p, const DualFunction& phi, double tol) {
  EcDerivativeCheck out;
  if (!phi.anchor) throw InputError("dual has no anchor");
  const Vector& anchor = *phi.anchor;
  const bool ray = anchor.size() > 1;
  (void)p;
  for (const auto& smp : phi.samples) {
    const double param = ray ? smp.extra[0] : smp.multipliers[0];
    const std::size_t c0 = ray ? 2 : 1;
    const Vector c(smp.extra.begin() + c0, smp.extra.end());
    const double h = 1e-3 * std::max(1.0, std::fabs(param)) * 0.5;
    auto at = [&](double t) {
      Vector l = anchor;
      if (ray)
        for (double& v : l) v *= t;
      else
        l[0] = t;
      return phi.evaluator(l).value;
    };
    const double d = numerics::derivative5(at, param, h);
    const double expected = ray ? numerics::dot(anchor, c) : c[0];
    out.max_error = std::max(out.max_error, std::fabs(d - expected));
  }
  out.ok = out.max_error <= tol;
  return out;
}

Matrix constraint_jacobian(const Program& p, const Vector& lambda, const Vector& x_ref, double h) {
  const std::size_t m = p.holonomic.size();
  const detail::Model model = detail::build_model(p);
  const Vector x0 = detail::inner_newton(model, lambda, x_ref).x;
  auto rows_at = [&](const Vector& l) { return eval_all(model.lag.rows, detail::inner_newton(model, l, x0).x); };
  Matrix j(m, m);
  for (std::size_t b = 0; b < m; ++b) {
    Vector lp = lambda, lm = lambda;
    lp[b] += h;
    lm[b] -= h;
    const Vector cp = rows_at(lp);
    const Vector cm = rows_at(lm);
    for (std::size_t a = 0; a < m; ++a) j(a, b) = (cp[a] - cm[a]) / (2 * h);
  }
  return j;
}

FamilyDualReport family_dual(const Program& p, const FamilyDual& fam, double t_from, double t_to, int samples) {
  const Lagrangian lag = build_lagrangian(p);
  const std::size_t n = p.dimension();
  if (fam.x.size() != n || fam.lambda.size() != p.holonomic.size())
    throw InputError("family needs one expression per variable and per multiplier");
  std::vector<Expr> grad;
  for (std::size_t i = 0; i < n; ++i) grad.push_back(diff(lag.L, i));
  auto point = [&](double t) {
    const Vector tv{t};
    Vector xl(n + fam.lambda.size());
    for (std::size_t i = 0; i < n; ++i) xl[i] = fam.x[i].eval(tv);
    for (std::size_t a = 0; a < fam.lambda.size(); ++a) xl[n + a] = fam.lambda[a].eval(tv);
    return xl;
  };
  auto chi = [&](double t) { return lag.L.eval(point(t)); };
  FamilyDualReport rep;
  std::vector<double> ts, d;
  for (int k = 0; k < samples; ++k) {
    const double t = t_from + (t_to - t_from) * k / std::max(1, samples - 1);
    Vector xl = point(t);
    for (const auto& g : grad) rep.max_stationarity = std::max(rep.max_stationarity, std::fabs(g.eval(xl)));
    // variables the family leaves free must not change the value
    const double base = lag.L.eval(xl);
    for (std::size_t i : fam.free) {
      for (double shift : {-1.0, 1.0, 2.5}) {
        Vector moved = xl;
        moved[i] += shift;
        rep.max_free_dependence = std::max(rep.max_free_dependence, std::fabs(lag.L.eval(moved) - base));
      }
    }
    ts.push_back(t);
    d.push_back(numerics::derivative5(chi, t, 1e-4));
  }
  auto dchi = [&](double t) { return numerics::derivative5(chi, t, 1e-4); };
  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    if (d[k] == 0.0) {
      rep.critical_parameters.push_back(ts[k]);
      continue;
    }
    if (d[k] * d[k + 1] >= 0) continue;
    double a = ts[k], b = ts[k + 1], fa = d[k];
    for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::fabs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = dchi(mid);
      if (fm * fa > 0) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    rep.critical_parameters.push_back(0.5 * (a + b));
  }
  for (double t : rep.critical_parameters) rep.critical_values.push_back(chi(t));
  return rep;
}

}  // namespace pfaffopt::holonomic
