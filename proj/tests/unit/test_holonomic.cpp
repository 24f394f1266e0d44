#include <cmath>

#include "doctest.h"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/holonomic.hpp"
#include "programs.hpp"

using namespace pfaffopt;
using namespace pfaffopt::holonomic;
using testing_programs::make;

namespace {

Program quadratic_halfplane() { return make({"x", "y"}, "x^2 + y^2", Sense::min, {{"x + y", ">=", 1.0}}); }

Program circle(double c) { return make({"x", "y"}, "x^2 + y^2", Sense::min, {{"x^2 + y^2 - 2*x", "=", c}}); }

Program product_two(double a, double b) {
  return make({"x", "y", "z"}, "x*y*z", Sense::max, {{"x + y", "=", a}, {"x*z + y*z", "=", b}});
}

Program product_sym(double a, double b) {
  return make({"x", "y", "z"}, "x*y*z", Sense::min, {{"x + y + z", "=", a}, {"x*y + x*z + y*z", "=", b}});
}

Program not_slater() { return make({"x"}, "x", Sense::min, {{"x^2", "<=", 0.0}}); }

Program positive_gap() {
  return make({"x", "y"}, "exp(-y)", Sense::min, {{"sqrt(x^2 + y^2) - x", "<=", 0.0}});
}

Program wolfe_example() {
  return make({"x", "y"}, "x + exp(y)", Sense::min, {{"3*x - 2*exp(y)", ">=", 10.0}, {"y", ">=", 0.0}});
}

}  // namespace

TEST_CASE("lagrangian sign conventions") {
  const auto p = quadratic_halfplane();
  const auto lag = build_lagrangian(p);
  // L = x^2 + y^2 + lambda (1 - x - y)
  CHECK(lag.L.eval(std::vector<double>{1.0, 2.0, 3.0}) == doctest::Approx(5.0 + 3.0 * (1 - 3)));
  CHECK(lag.multiplier_names == std::vector<std::string>{"lambda"});
  CHECK(sensitivity_sign(p.holonomic[0]) == 1.0);
  CHECK(sensitivity_sign(circle(3).holonomic[0]) == -1.0);
}

TEST_CASE("axis values") {
  CHECK(axis_values({0, 1, 3, false}) == std::vector<double>{0, 0.5, 1});
  const auto v = axis_values({1e-2, 1e2, 5, true});
  CHECK(v[2] == doctest::Approx(1.0));
  CHECK(tensor_grid({{0, 1, 2, false}, {0, 1, 3, false}}).size() == 6);
}

TEST_CASE("convex program: zero gap") {
  const auto p = quadratic_halfplane();
  const StartSpec st;
  const auto primal = solve_primal(p, st);
  REQUIRE(primal.optimum);
  CHECK(primal.optimum->x[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(primal.optimum->x[1] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(primal.optimum->lambda[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(primal.optimum->classification == Classification::min);

  for (double l : {0.0, 0.5, 2.0}) {
    const auto s = evaluate_psi(p, {l}, st);
    CHECK(s.flag == DualFlag::infimum);
    CHECK(s.value == doctest::Approx(l - l * l / 2).epsilon(1e-10));
  }
  const auto psi = lagrange_dual(p, {{0.0, 3.0, 31, false}}, st);
  REQUIRE(psi.optimum.found);
  CHECK(psi.optimum.attained);
  CHECK(psi.optimum.argument[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(psi.optimum.value == doctest::Approx(0.5).epsilon(1e-10));
  const auto wd = weak_duality_check(p, primal, psi);
  CHECK(wd.conclusive);
  CHECK(wd.holds);
  CHECK(std::fabs(wd.gap) <= 1e-8);
}

TEST_CASE("circle: multiplier sensitivity") {
  const auto p = circle(3.0);
  const auto primal = solve_primal(p, {});
  REQUIRE(primal.optimum);
  CHECK(primal.optimum->objective == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(primal.optimum->x[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::fabs(primal.optimum->x[1]) < 1e-9);
  CHECK(primal.optimum->lambda[0] == doctest::Approx(-0.5).epsilon(1e-9));
  const auto sens = multiplier_sensitivity(p, *primal.optimum);
  REQUIRE(sens.size() == 1);
  CHECK(sens[0].slope == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(sens[0].ok);
  // both roots of (c+1)(lambda+1)^2 = 1 are KKT points
  CHECK(primal.kkt.size() == 2);
}

TEST_CASE("circle: ODE-built dual reproduces psi") {
  const auto p = circle(3.0);
  // c(lambda) = 1/(lambda+1)^2 - 1 - c with anchor lambda0 = -1/2
  const std::vector<double> grid{-0.8, -0.6, -0.5, -0.3, 0.5};
  std::vector<double> g2{-0.8, -0.6, -0.5, -0.3, -0.1};
  const auto phi = ec_build_dual(p, {-0.5}, {-1.0, 0.0}, g2);
  for (const auto& s : phi.samples) {
    const double l = s.multipliers[0];
    const double c = 1 / ((l + 1) * (l + 1)) - 4;
    CHECK(s.extra.back() == doctest::Approx(c).epsilon(1e-6));
    const double psi = -l * l / (l + 1) - 3 * l;
    CHECK(s.value == doctest::Approx(psi).epsilon(1e-6));
  }
  CHECK(ec_check_derivative(p, phi).ok);
  CHECK_THROWS_AS(ec_build_dual(p, {-0.5}, {-1.0, 0.0}, grid), SingularPathError);
}

TEST_CASE("two constraints: stationary dual and constants on a ray") {
  const auto p = product_two(2, 4);
  const auto kkt = solve_kkt(p, {});
  REQUIRE(!kkt.empty());
  const auto& k = kkt.front();
  CHECK(k.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(k.x[2] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(k.lambda[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(k.lambda[1] == doctest::Approx(-0.5).epsilon(1e-9));
  CHECK(k.objective == doctest::Approx(2.0).epsilon(1e-10));

  const auto psi = evaluate_psi(p, {-1.0, -0.5}, {});
  CHECK(psi.flag == DualFlag::stationary);
  CHECK(psi.value == doctest::Approx(-4 * 0.5 + 2 + 2).epsilon(1e-9));

  const auto phi = ec_build_dual(p, {-1.0, -0.5}, k.x, {0.6, 0.8, 1.0, 1.3, 1.6});
  for (const auto& s : phi.samples) {
    const double l = s.multipliers[0], mu = s.multipliers[1];
    CHECK(s.extra[2] == doctest::Approx(-4 * mu - 2).epsilon(1e-6));
    CHECK(s.extra[3] == doctest::Approx(-4 * l - 4).epsilon(1e-6));
  }
  CHECK_THROWS_AS(phi.evaluator({-1.0, -0.4}), InputError);
  const auto j = constraint_jacobian(p, {-1.0, -0.5}, k.x);
  CHECK(j(0, 1) == doctest::Approx(j(1, 0)).epsilon(1e-6));
}

TEST_CASE("degenerate multiplier jacobian") {
  const double a = 3, b = 2;
  const auto p = product_sym(a, b);
  const auto kkt = solve_kkt(p, {});
  const double r = std::pow(a * a - 3 * b, 1.5);
  const double lo = (-2 * a * a * a + 9 * a * b - 2 * r) / 27;
  const double hi = (-2 * a * a * a + 9 * a * b + 2 * r) / 27;
  bool saw_lo = false, saw_hi = false;
  for (const auto& s : kkt) {
    if (std::fabs(s.objective - lo) < 1e-8) saw_lo = true;
    if (std::fabs(s.objective - hi) < 1e-8) saw_hi = true;
  }
  CHECK(saw_lo);
  CHECK(saw_hi);
  REQUIRE(!kkt.empty());
  const auto jac = multiplier_jacobian(p, kkt.front());
  CHECK(jac.degenerate);

  FamilyDual fam;
  fam.parameter = VarSpace({"m"});
  for (const char* e : {"-m", "-m", "0"}) fam.x.push_back(parse(e, fam.parameter));
  for (const char* e : {"m^2", "m"}) fam.lambda.push_back(parse(e, fam.parameter));
  fam.free = {2};
  const auto rep = family_dual(p, fam, -3, 1, 41);
  CHECK(rep.max_stationarity < 1e-12);
  CHECK(rep.max_free_dependence < 1e-12);
  REQUIRE(rep.critical_parameters.size() == 2);
  const double m1 = (-3 - std::sqrt(3.0)) / 3, m2 = (-3 + std::sqrt(3.0)) / 3;
  CHECK(rep.critical_parameters[0] == doctest::Approx(m1).epsilon(1e-8));
  CHECK(rep.critical_parameters[1] == doctest::Approx(m2).epsilon(1e-8));
}

TEST_CASE("no Slater point, no gap") {
  const auto p = not_slater();
  const auto psi = lagrange_dual(p, {{1e-2, 1e8, 41, true}}, {});
  for (const auto& s : psi.samples) {
    if (s.flag != DualFlag::infimum) continue;
    CHECK(s.value == doctest::Approx(-1 / (4 * s.multipliers[0])).epsilon(1e-9));
  }
  CHECK(psi.optimum.found);
  CHECK(!psi.optimum.attained);
  CHECK(std::fabs(psi.optimum.value) < 1e-6);
  const auto primal = solve_primal(p, {});
  const auto wd = weak_duality_check(p, primal, psi);
  CHECK(wd.holds);
  CHECK(std::fabs(wd.gap) < 1e-6);
}

TEST_CASE("positive duality gap") {
  const auto p = positive_gap();
  const auto primal = solve_primal(p, {});
  REQUIRE(primal.value_found);
  CHECK(primal.value == doctest::Approx(1.0).epsilon(1e-4));
  const auto psi = lagrange_dual(p, {{0.0, 5.0, 6, false}}, {});
  REQUIRE(psi.optimum.found);
  CHECK(std::fabs(psi.optimum.value) < 1e-3);
  const auto wd = weak_duality_check(p, primal, psi);
  CHECK(wd.holds);
  CHECK(wd.gap == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("Wolfe dual") {
  const auto w = wolfe_dual(wolfe_example(), {});
  REQUIRE(w.found);
  CHECK(w.value == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(w.x[0] == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(std::fabs(w.x[1]) < 1e-8);
  CHECK(w.lambda[0] == doctest::Approx(1.0 / 3).epsilon(1e-8));
  CHECK(w.lambda[1] == doctest::Approx(5.0 / 3).epsilon(1e-8));
  CHECK(w.stationarity < 1e-9);
}

TEST_CASE("minimax inequality on a Lagrangian") {
  const auto p = quadratic_halfplane();
  const auto lag = build_lagrangian(p);
  std::vector<Vector> xs, ys;
  for (double a = -1; a <= 1.01; a += 0.25)
    for (double b = -1; b <= 1.01; b += 0.25) xs.push_back({a, b});
  for (double l = 0; l <= 2.01; l += 0.25) ys.push_back({l});
  const auto r = minimax_check(lag.L, 3, {0, 1}, xs, {2}, ys);
  CHECK(r.holds);
  CHECK(r.max_min <= r.min_max);
}
