#include <cmath>
#include <numeric>
#include <random>

#include "pfaffopt/darboux.hpp"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/nonholonomic.hpp"
#include "pfaffopt/verify.hpp"

namespace pfaffopt::verify {

namespace {

using numerics::Matrix;
using numerics::Vector;

constexpr int kCriterion = 14;

Outcome outcome(const std::string& source, const std::string& label, bool ok, const std::string& expected,
                const std::string& actual, double tol, const std::string& detail = "") {
  return {kCriterion, source, label, ok ? Status::pass : Status::fail, expected, actual, tol, detail};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Smooth random expressions over (x, y, z) that stay finite on [-1, 1]^3.
std::string random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> coef(0.5, 2.0);
  const char* vars[] = {"x", "y", "z"};
  auto leaf = [&] {
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) return fmt(coef(rng));
    return std::string(vars[std::uniform_int_distribution<int>(0, 2)(rng)]);
  };
  auto sub = [&] { return random_expr(rng, depth - 1); };
  switch (pick(rng)) {
    case 0:
    case 1: return leaf();
    case 2: return "(" + sub() + " + " + sub() + ")";
    case 3: return "(" + sub() + " - " + sub() + ")";
    case 4: return "(" + sub() + " * " + sub() + ")";
    case 5: return "sin(" + sub() + ")";
    case 6: return "cos(" + sub() + ")";
    case 7: return "exp(0.3 * " + sub() + ")";
    case 8: return "sqrt(1 + (" + sub() + ")^2)";
    default: return "(" + sub() + ") / (1 + (" + sub() + ")^2)";
  }
}

std::vector<Outcome> gradient_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  const VarSpace s({"x", "y", "z"});
  const double tol = 1e-6;
  double worst = 0.0;
  std::string worst_expr;
  int count = 0;
  for (int k = 0; k < 100; ++k) {
    const std::string text = random_expr(rng, 4);
    const Expr e = parse(text, s);
    const auto g = gradient(e, s);
    const Vector x{pt(rng), pt(rng), pt(rng)};
    for (std::size_t i = 0; i < 3; ++i) {
      const double sym = g[i].eval(x);
      const double fd = numerics::derivative5(
          [&](double t) {
            Vector y = x;
            y[i] = t;
            return e.eval(y);
          },
          x[i], 1e-3);
      const double err = std::fabs(sym - fd) / std::max(1.0, std::fabs(sym));
      if (err > worst) {
        worst = err;
        worst_expr = text;
      }
    }
    ++count;
  }
  return {outcome("gradients", std::to_string(count) + " random expressions, symbolic vs finite differences",
                  worst <= tol, "relative error <= " + fmt(tol), fmt(worst), tol,
                  worst > tol ? "worst: " + worst_expr : "")};
}

std::vector<holonomic::GridAxis> default_axes(const Program& p) {
  const double s = p.sense == Sense::min ? 1.0 : -1.0;
  std::vector<holonomic::GridAxis> axes;
  for (const auto& c : p.holonomic) {
    if (c.relation == Relation::eq)
      axes.push_back({-2.0, 2.0, 5, false});
    else
      axes.push_back({0.0, 2.0 * s, 5, false});
  }
  return axes;
}

std::vector<Outcome> weak_duality_suite(const std::vector<io::ProblemFile>& programs, std::uint64_t seed) {
  std::vector<Outcome> out;
  for (const auto& pf : programs) {
    const Program& p = pf.program;
    if (p.holonomic.empty()) continue;
    const StartSpec st = io::start_spec(pf.options, seed);
    const auto axes = pf.options.lambda_grid.size() == p.holonomic.size() ? pf.options.lambda_grid : default_axes(p);
    try {
      const auto psi = holonomic::lagrange_dual(p, axes, st);
      const auto primal = holonomic::solve_primal(p, st);
      const auto wd = holonomic::weak_duality_check(p, primal, psi);
      out.push_back(outcome(pf.name, "weak duality psi <= f on feasible points", wd.holds,
                            "max(psi - f) <= 0", fmt(wd.max_violation), 1e-8,
                            std::to_string(wd.pairs_checked) + " pairs"));
    } catch (const Error& e) {
      out.push_back(outcome(pf.name, "weak duality psi <= f on feasible points", false, "", "", 1e-8, e.what()));
    }
  }
  return out;
}

std::vector<Outcome> riemann_suite(const std::vector<io::ProblemFile>& programs, std::uint64_t seed) {
  std::vector<Outcome> out;
  for (const auto& pf : programs) {
    const Program& p = pf.program;
    if (p.pfaff.size() != 1 || pf.options.mu.empty()) continue;
    const StartSpec st = io::start_spec(pf.options, seed);
    double worst = 0.0;
    int points = 0, singular = 0;
    bool obtuse = true, ok = true;
    try {
      for (const auto& mu : pf.options.mu) {
        for (const auto& pt : nonholonomic::ncp_solve(p, mu, st).points) {
          try {
            const auto r = nonholonomic::riemann_attach(p, pt);
            worst = std::max(worst, r.identity_residual);
            ok = ok && r.identity_ok;
            obtuse = obtuse && r.obtuse;
            ++points;
          } catch (const SingularJacobianError&) {
            ++singular;
          }
        }
      }
    } catch (const Error& e) {
      out.push_back(outcome(pf.name, "Riemannian identity at critical points", false, "", "", 1e-8, e.what()));
      continue;
    }
    out.push_back(outcome(pf.name, "Riemannian identity g x'x' + eta x' = 0 and eta.x' <= 0",
                          ok && obtuse, "residual <= 1e-8 max(1,|w|^2), eta.x' <= 0", fmt(worst), 1e-8,
                          std::to_string(points) + " points, " + std::to_string(singular) + " with singular a" +
                              (obtuse ? "" : ", eta.x' > 0 somewhere")));
  }
  return out;
}

std::vector<Outcome> basis_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed + 7);
  std::normal_distribution<double> g(0.0, 1.0);
  int mismatches = 0;
  const int trials = 50;
  for (int t = 0; t < trials; ++t) {
    const std::size_t n = 3 + t % 3, m = 1 + t % 2;
    Matrix q(n, n), a(m, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) q(i, j) = q(j, i) = g(rng);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto b1 = numerics::null_space_basis(a);
    const auto b2 = numerics::null_space_basis(a, 1e-10, order);
    if (!(numerics::restricted_signature(q, b1) == numerics::restricted_signature(q, b2))) ++mismatches;
  }
  return {outcome("signatures", std::to_string(trials) + " random forms, restricted signature under a change of basis",
                  mismatches == 0, "0 mismatches", std::to_string(mismatches), 0.0)};
}

std::vector<Outcome> rk4_suite() {
  const VarSpace s({"x", "y", "z"});
  const Expr k = parse("z", s);
  const Vector start{0.5, -1.0, 2.0};
  auto err = [&](int steps) {
    const auto end = darboux::contact_flow(k, s, start, 1.0, steps).back();
    return std::fabs(end.state[2] - 2.0 * std::exp(1.0));
  };
  const double ratio = err(10) / err(20);
  return {outcome("rk4", "error ratio when the step count doubles", ratio >= 12 && ratio <= 20, "[12, 20]",
                  fmt(ratio), 0.0)};
}

std::vector<Outcome> minimax_suite(const std::vector<io::ProblemFile>& programs, std::uint64_t seed) {
  std::vector<Outcome> out;
  for (const auto& pf : programs) {
    const Program& p = pf.program;
    if (p.holonomic.empty()) continue;
    const auto lag = holonomic::build_lagrangian(p);
    StartSpec st = io::start_spec(pf.options, seed);
    st.count = 25;
    const auto xs = sample_points(p.space, st);
    const auto ys = holonomic::tensor_grid(default_axes(p));
    std::vector<std::size_t> xi(p.dimension()), yi(p.holonomic.size());
    std::iota(xi.begin(), xi.end(), 0);
    std::iota(yi.begin(), yi.end(), p.dimension());
    const auto r = holonomic::minimax_check(lag.L, lag.space.size(), xi, xs, yi, ys);
    out.push_back(outcome(pf.name, "max_y min_x L <= min_x max_y L on a grid", r.holds,
                          "max_min <= min_max", fmt(r.max_min) + " <= " + fmt(r.min_max), 0.0,
                          std::to_string(r.evaluations) + " evaluations"));
  }
  return out;
}

}  // namespace

std::vector<Outcome> property_suite(const std::vector<io::ProblemFile>& programs, std::uint64_t seed) {
  std::vector<Outcome> out;
  for (auto part : {gradient_suite(seed), weak_duality_suite(programs, seed), riemann_suite(programs, seed),
                    basis_suite(seed), rk4_suite(), minimax_suite(programs, seed)})
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

}  // namespace pfaffopt::verify
