#include <algorithm>
#include <cmath>
#include <limits>

#include "holonomic_internal.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/parallel.hpp"

namespace pfaffopt::holonomic {

namespace {

struct WolfeSystem {
  VarSpace space;                 // x, lambda_free, nu
  std::vector<Expr> eqs;          // dW/dx, dW/dlambda_free, S
  std::vector<Expr> free_grad;    // dW/dlambda_a for the rows fixed at 0 (sign test)
  std::vector<std::size_t> free;  // indices of free multipliers
  std::vector<std::size_t> fixed; // inequality rows held at lambda = 0
};

// W(x, lambda, nu) = L(x, lambda) + nu . grad_x L(x, lambda)
WolfeSystem wolfe_system(const Program& p, const Lagrangian& lag, const std::vector<std::size_t>& fixed) {
  const std::size_t n = p.dimension();
  const std::size_t m = p.holonomic.size();
  WolfeSystem w;
  w.fixed = fixed;
  for (std::size_t a = 0; a < m; ++a)
    if (std::find(fixed.begin(), fixed.end(), a) == fixed.end()) w.free.push_back(a);
  // rebuild L over (x, lambda_free, nu, lambda_fixed) so fixed multipliers can be zeroed
  VarSpace grow = p.space;
  auto add = [&](const std::string& base) {
    const std::size_t index = grow.size();
    const std::string nm = grow.fresh_name(base);
    grow = grow.extended({nm});
    return Expr::variable(index, nm);
  };
  std::vector<Expr> lam(m);
  for (auto a : w.free) lam[a] = add("lambda" + std::to_string(a + 1));
  std::vector<Expr> nu(n);
  for (std::size_t i = 0; i < n; ++i) nu[i] = add("nu" + std::to_string(i + 1));
  w.space = grow;
  VarSpace with_fixed = grow;
  for (auto a : fixed) {
    const std::string nm = with_fixed.fresh_name("lambda" + std::to_string(a + 1));
    lam[a] = Expr::variable(with_fixed.size(), nm);
    with_fixed = with_fixed.extended({nm});
  }
  Expr L = p.objective;
  for (std::size_t a = 0; a < m; ++a) L = L + lam[a] * lag.rows[a];
  std::vector<Expr> S;
  for (std::size_t i = 0; i < n; ++i) S.push_back(diff(L, i));
  Expr W = L;
  for (std::size_t i = 0; i < n; ++i) W = W + nu[i] * S[i];
  auto zero_fixed = [&](const Expr& e) {
    Expr out = e;
    for (std::size_t k = 0; k < fixed.size(); ++k) out = substitute(out, grow.size() + k, Expr::constant(0.0));
    return out;
  };
  for (std::size_t i = 0; i < n; ++i) w.eqs.push_back(zero_fixed(diff(W, i)));
  for (std::size_t k = 0; k < w.free.size(); ++k) w.eqs.push_back(zero_fixed(diff(W, n + k)));
  for (std::size_t i = 0; i < n; ++i) w.eqs.push_back(zero_fixed(S[i]));
  for (std::size_t k = 0; k < fixed.size(); ++k) w.free_grad.push_back(zero_fixed(diff(W, grow.size() + k)));
  return w;
}

}  // namespace

WolfeResult wolfe_dual(const Program& p, const StartSpec& starts) {
  p.validate();
  const Lagrangian lag = build_lagrangian(p);
  const std::size_t n = p.dimension();
  const std::size_t m = p.holonomic.size();
  const double s = p.sense == Sense::min ? 1.0 : -1.0;
  std::vector<std::size_t> ineq;
  for (std::size_t a = 0; a < m; ++a)
    if (p.holonomic[a].relation != Relation::eq) ineq.push_back(a);
  if (ineq.size() > 12) throw InputError("too many inequality constraints for the Wolfe dual");
  const auto x_starts = sample_points(p.space, starts);

  struct Candidate {
    Vector x, lambda;
    double value;
  };
  std::vector<Candidate> cands;
  for (std::size_t mask = 0; mask < (std::size_t{1} << ineq.size()); ++mask) {
    std::vector<std::size_t> fixed;
    for (std::size_t k = 0; k < ineq.size(); ++k)
      if (mask & (std::size_t{1} << k)) fixed.push_back(ineq[k]);
    const WolfeSystem w = wolfe_system(p, lag, fixed);
    const auto sys = numerics::make_system(w.eqs, w.space);
    StartSpec ls{starts.count, 0.0, 2.0, starts.seed + 104729 * (mask + 1)};
    std::vector<std::string> lnames;
    for (std::size_t k = 0; k < w.free.size(); ++k) lnames.push_back("l" + std::to_string(k));
    const auto l_starts = w.free.empty() ? std::vector<Vector>(x_starts.size()) : sample_points(VarSpace(lnames), ls);
    std::vector<std::optional<Vector>> found(x_starts.size());
    parallel_for(x_starts.size(), [&](std::size_t k) {
      Vector z = x_starts[k];
      for (std::size_t j = 0; j < w.free.size(); ++j) {
        const bool is_eq = p.holonomic[w.free[j]].relation == Relation::eq;
        z.push_back(is_eq ? l_starts[k][j] - 1.0 : s * l_starts[k][j]);
      }
      z.resize(w.space.size(), 0.0);
      try {
        const auto r = numerics::levenberg_marquardt(sys, z, {1e-12, 300});
        if (r.residual <= 1e-9) found[k] = r.x;
      } catch (const Error&) {
      }
    });
    for (const auto& f : found) {
      if (!f) continue;
      Vector x(f->begin(), f->begin() + n);
      Vector lambda(m, 0.0);
      for (std::size_t j = 0; j < w.free.size(); ++j) lambda[w.free[j]] = (*f)[n + j];
      bool ok = true;
      for (auto a : w.free)
        if (p.holonomic[a].relation != Relation::eq && s * lambda[a] < -1e-8) ok = false;
      for (const auto& g : w.free_grad)
        if (s * g.eval(*f) > 1e-8) ok = false;  // raising a zero multiplier would improve W
      if (!ok) continue;
      double v;
      try {
        v = lag.L.eval(detail::concat(x, lambda));
      } catch (const DomainError&) {
        continue;
      }
      cands.push_back({x, lambda, v});
    }
  }
  WolfeResult out;
  out.candidates = static_cast<int>(cands.size());
  if (cands.empty()) return out;
  const Candidate* best = &cands.front();
  for (const auto& c : cands)
    if (s * c.value > s * best->value) best = &c;
  out.found = true;
  out.x = best->x;
  out.lambda = best->lambda;
  out.value = best->value;

  // Several maximizers with the same value: prefer the one satisfying
  // complementarity with the primal constraints.
  const double tie = 1e-7 * std::max(1.0, std::fabs(out.value));
  bool spread = false;
  for (const auto& c : cands)
    if (std::fabs(c.value - out.value) <= tie && numerics::norm_inf(numerics::sub(c.x, out.x)) > 1e-6) spread = true;
  // a singular Wolfe KKT matrix also signals a continuum of optimal points
  {
    std::vector<Expr> eqs;
    for (std::size_t i = 0; i < n; ++i) eqs.push_back(diff(lag.L, i));
    const auto J = jacobian(eqs, lag.space);
    const Matrix j = eval_matrix(J, detail::concat(out.x, out.lambda));
    Matrix jx(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) jx(i, k) = j(i, k);
    if (numerics::matrix_rank(jx, 1e-10) < n) spread = true;
  }
  out.unique = !spread;
  if (spread) {
    std::vector<Expr> eqs;
    for (std::size_t i = 0; i < n; ++i) eqs.push_back(diff(lag.L, i));
    for (std::size_t a = 0; a < m; ++a)
      if (p.holonomic[a].relation != Relation::eq)
        eqs.push_back(Expr::variable(n + a, lag.multiplier_names[a]) * lag.rows[a]);
      else
        eqs.push_back(lag.rows[a]);
    eqs.push_back(lag.L - Expr::constant(out.value));
    const auto sys = numerics::make_system(eqs, lag.space);
    try {
      const auto r = numerics::levenberg_marquardt(sys, detail::concat(out.x, out.lambda), {1e-15, 400});
      if (r.residual <= 1e-10) {
        Vector x(r.x.begin(), r.x.begin() + n);
        Vector lambda(r.x.begin() + n, r.x.end());
        bool ok = true;
        for (std::size_t a = 0; a < m; ++a)
          if (p.holonomic[a].relation != Relation::eq && s * lambda[a] < -1e-8) ok = false;
        if (ok) {
          out.x = x;
          out.lambda = lambda;
          out.value = lag.L.eval(r.x);
        }
      }
    } catch (const Error&) {
    }
  }
  const Vector xl = detail::concat(out.x, out.lambda);
  for (std::size_t i = 0; i < n; ++i) out.stationarity = std::max(out.stationarity, std::fabs(diff(lag.L, i).eval(xl)));
  for (std::size_t a = 0; a < m; ++a)
    out.complementarity = std::max(out.complementarity, std::fabs(out.lambda[a] * lag.rows[a].eval(out.x)));
  return out;
}

}  // namespace pfaffopt::holonomic
