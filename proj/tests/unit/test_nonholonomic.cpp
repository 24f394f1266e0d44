#include <cmath>

#include "doctest.h"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/nonholonomic.hpp"
#include "programs.hpp"

using namespace pfaffopt;
using namespace pfaffopt::nonholonomic;
using testing_programs::make;
using testing_programs::with_pfaff;

namespace {

Program sphere_contact() { return with_pfaff(make({"x", "y", "z"}, "x^2 + y^2 + z^2", Sense::min, {}), {"0", "x", "1"}); }

Program paraboloid_form() { return with_pfaff(make({"x", "y", "z"}, "x^2 + y^2 - z", Sense::min, {}), {"0", "x", "-z"}); }

Program two_forms() {
  auto p = make({"x", "y", "z"}, "2*x*y + z^2", Sense::max, {});
  p = with_pfaff(p, {"z", "-1", "0"}, ">=");
  return with_pfaff(p, {"0", "x", "1"}, ">=");
}

Program concave_contact() {
  return with_pfaff(make({"x", "y", "z"}, "x + y + z - (x^2 + y^2 + z^2)/2", Sense::max, {}), {"0", "-x", "1"});
}

NcpPoint only_point(const Program& p, const Vector& mu) {
  const auto r = ncp_solve(p, mu, {});
  REQUIRE(r.points.size() == 1);
  return r.points.front();
}

}  // namespace

TEST_CASE("Frobenius test") {
  const VarSpace s({"x", "y", "z"});
  PfaffForm contact{{parse("0", s), parse("x", s), parse("1", s)}, Relation::eq};
  const auto c = wedge_dw(contact, s);
  REQUIRE(c.size() == 1);
  CHECK(c[0].eval(std::vector<double>{0.3, -1.0, 2.0}) == doctest::Approx(1.0));
  const auto r = frobenius_test(contact, s, StartSpec{});
  CHECK(!r.integrable);
  CHECK(r.witness.has_value());

  PfaffForm exact{{parse("y", s), parse("x", s), parse("0", s)}, Relation::eq};
  const auto e = frobenius_test(exact, s, StartSpec{});
  CHECK(e.integrable);
  CHECK(e.max_component < 1e-12);

  const VarSpace two({"x", "y"});
  PfaffForm planar{{parse("y", two), parse("x", two)}, Relation::eq};
  CHECK_THROWS_AS(wedge_dw(planar, two), InputError);
}

TEST_CASE("critical points on every integral manifold of x dy + dz") {
  const auto p = sphere_contact();
  for (double mu : {-1.0, 0.5, 2.0}) {
    const auto pt = only_point(p, {mu});
    CHECK(std::fabs(pt.x[0]) < 1e-10);
    CHECK(std::fabs(pt.x[1]) < 1e-10);
    CHECK(pt.x[2] == doctest::Approx(-mu / 2).epsilon(1e-10));
    CHECK(pt.classification == Classification::min);
  }
  const auto res = ncp_residual(p);
  CHECK(res.size() == 3);
  CHECK(res[2].eval(std::vector<double>{0, 0, -1, 2}) == doctest::Approx(0.0));

  const auto theta = theta_dual(p, {2.0}, {0, 0, -1}, {0.5, 1.0, 1.5, 2.0, 2.5, 3.0});
  for (const auto& s : theta.samples) {
    const double mu = s.multipliers[0];
    CHECK(s.value == doctest::Approx(-mu * mu / 4 + mu).epsilon(1e-6));
  }
  CHECK(std::fabs(theta_anchor_slope(theta)) < 1e-6);
}

TEST_CASE("paraboloid: classification and fold of the critical curve") {
  const auto p = paraboloid_form();
  const auto pt = only_point(p, {1.0});
  CHECK(pt.x[2] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(pt.classification == Classification::min);
  CHECK(only_point(p, {-2.0}).classification == Classification::min);
  CHECK(only_point(p, {5.0}).classification == Classification::saddle);

  const auto curve = critical_curve(p, 1.0, -1.0, 5, {});
  CHECK(curve.fold);
  REQUIRE(curve.fold_mu);
  CHECK(std::fabs((*curve.fold_mu)[0]) < 1e-12);
  CHECK(curve.points.size() == 2);

  // theta = 1/(2 mu) + mu / (2 mu0^2), here mu0 = 1
  const auto theta = theta_dual(p, {1.0}, {0, 0, -1}, {0.5, 0.8, 1.0, 1.5, 2.0});
  for (const auto& s : theta.samples) {
    const double mu = s.multipliers[0];
    CHECK(s.value == doctest::Approx(1 / (2 * mu) + mu / 2).epsilon(1e-6));
  }
  CHECK(std::fabs(theta_anchor_slope(theta)) < 1e-6);
}

TEST_CASE("Riemannian identity along the critical curve") {
  for (const auto& p : {sphere_contact(), paraboloid_form()}) {
    for (double mu : {0.5, 1.0, 3.0}) {
      const auto pt = only_point(p, {mu});
      const auto r = riemann_attach(p, pt);
      CHECK(r.identity_ok);
      CHECK(r.obtuse);
      // finite-difference check of x'
      const auto up = only_point(p, {mu + 1e-4}), dn = only_point(p, {mu - 1e-4});
      for (std::size_t i = 0; i < 3; ++i)
        CHECK(r.xprime[i] == doctest::Approx((up.x[i] - dn.x[i]) / 2e-4).epsilon(1e-6));
    }
  }
}

TEST_CASE("two inequality forms") {
  const auto p = two_forms();
  const auto pt = only_point(p, {-1.0, -2.0});
  CHECK(pt.x[0] == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(pt.x[1] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(pt.x[2] == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(pt.objective == doctest::Approx(1.25).epsilon(1e-10));
  const Matrix q = second_order_form(p, pt.x, pt.mu);
  CHECK(q(0, 1) == doctest::Approx(3.0));
  CHECK(q(0, 2) == doctest::Approx(0.5));
  CHECK(q(2, 2) == doctest::Approx(2.0));
  const Vector v{1, -1, 0.25};
  CHECK(numerics::dot(v, q * v) == doctest::Approx(-5.625));
  CHECK(pt.classification == Classification::max);
  CHECK(pt.sign_feasible);

  const auto w = wolfe_nonholonomic(p, {{-2, 0, 9, false}, {-2, 0, 9, false}}, {});
  REQUIRE(w.found);
  for (const auto& s : w.samples) {
    REQUIRE(s.ok);
    const double m1 = s.mu[0], m2 = s.mu[1];
    CHECK(s.value == doctest::Approx(m1 * m1 * m2 / (2 * (m2 - 2)) + m2 * m2 / 4).epsilon(1e-9));
  }
  CHECK(std::fabs(w.min_value) < 1e-12);
  CHECK(w.argmin.size() == 9);
  int interior = 0;
  for (std::size_t k = 0; k < w.argmin.size(); ++k) {
    CHECK(std::fabs(w.argmin[k][1]) < 1e-12);
    if (w.argmin_interior[k]) {
      ++interior;
      CHECK(std::fabs(w.argmin[k][0]) < 1e-12);
    }
  }
  CHECK(interior == 1);
}

TEST_CASE("concave objective with a contact form") {
  const auto p = concave_contact();
  for (double mu : {0.0, 2.0, 2.9, 3.0}) {
    const auto pt = only_point(p, {mu});
    CHECK(pt.x[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(pt.x[1] == doctest::Approx(1 - mu).epsilon(1e-10));
    CHECK(pt.x[2] == doctest::Approx(1 + mu).epsilon(1e-10));
    CHECK(pt.objective == doctest::Approx(1.5 - mu * mu).epsilon(1e-10));
    CHECK(pt.classification == (mu * mu < 8 ? Classification::max : Classification::saddle));
  }
}

TEST_CASE("rescaling the form rescales the multiplier") {
  const auto p = sphere_contact();
  const auto q = with_pfaff(make({"x", "y", "z"}, "x^2 + y^2 + z^2", Sense::min, {}), {"0", "3*x", "3"});
  const auto a = only_point(p, {1.5});
  const auto b = only_point(q, {0.5});
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.x[i] == doctest::Approx(b.x[i]).epsilon(1e-12));
  CHECK(a.classification == b.classification);
}

TEST_CASE("degenerate rows and bad input") {
  const auto p = sphere_contact();
  CHECK_THROWS_AS(second_order_form(p, {0, 0, 0}, {1.0, 2.0}), InputError);
  auto zero = with_pfaff(make({"x", "y", "z"}, "x^2 + y^2 + z^2", Sense::min, {}), {"x", "0", "0"});
  NcpPoint pt{{0, 0, 0}, {0.0}};
  CHECK_THROWS_AS(classify_ncp(zero, pt), InputError);
  CHECK_THROWS_AS(ncp_residual(make({"x"}, "x", Sense::min, {})), InputError);
}

TEST_CASE("integral submanifold and classical Lagrange multipliers") {
  const auto p = paraboloid_form();
  const VarSpace& s = p.space;
  // mu0 = -1: critical point (0, 0, 1) on the integral line z = y^2 + 1, x = 2yz
  const std::vector<Expr> g{parse("y^2 - z + 1", s), parse("2*y*z - x", s)};
  const auto r = integral_constraint_check(p, g, {0, 0, 1});
  CHECK(r.ok);
  CHECK(r.probes > 1);
  CHECK(r.distribution_residual < 1e-12);
  CHECK(r.lambda[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::fabs(r.lambda[1]) < 1e-12);

  CHECK_THROWS_AS(integral_constraint_check(p, {parse("x", s), parse("y", s)}, {0, 0, 1}), InputError);
  CHECK_THROWS_AS(integral_constraint_check(p, g, {0, 0, 2}), InputError);

  const auto flat = with_pfaff(make({"x", "y", "z"}, "x^2 + y^2 + z^2", Sense::min, {}), {"0", "0", "1"});
  const auto h = integral_constraint_check(flat, {parse("z", flat.space)}, {0, 0, 0});
  CHECK(h.ok);
}

TEST_CASE("consumer demand shares") {
  const VarSpace s({"x1", "x2"});
  for (const auto& prices : {std::vector<std::string>{"1", "1"}, std::vector<std::string>{"2", "5"},
                             std::vector<std::string>{"1 + x1", "2 + x1*x2"}}) {
    std::vector<Expr> p;
    for (const auto& e : prices) p.push_back(parse(e, s));
    const auto r = consumer_demo({0.2, 0.4}, p, s);
    CHECK(r.ok);
    CHECK(r.proportions[0] == doctest::Approx(1.0 / 3).epsilon(1e-9));
    CHECK(r.proportions[1] == doctest::Approx(2.0 / 3).epsilon(1e-9));
  }
  CHECK_THROWS_AS(consumer_demo({0.6, 0.5}, {parse("1", s), parse("1", s)}, s), InputError);
}
