#include <cmath>
#include <random>

#include "doctest.h"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/expr.hpp"

using namespace pfaffopt;

namespace {

VarSpace xyz() { return VarSpace({"x", "y", "z"}); }

double ev(const std::string& text, const VarSpace& s, std::vector<double> pt) {
  return parse(text, s).eval(pt);
}

}  // namespace

TEST_CASE("parse and evaluate") {
  const VarSpace s({"x", "y"});
  CHECK(ev("x^2+y^2", s, {1, 2}) == doctest::Approx(5.0));
  CHECK(ev("2*x*y + z^2", xyz(), {0.25, 0.5, -1}) == doctest::Approx(1.25));
  CHECK(ev("-x^2", s, {3, 0}) == doctest::Approx(-9.0));
  CHECK(ev("2^3^2", s, {0, 0}) == doctest::Approx(512.0));
  CHECK(ev("x - y - 1", s, {5, 2}) == doctest::Approx(2.0));
  CHECK(ev("x / y / 2", s, {8, 2}) == doctest::Approx(2.0));
  CHECK(ev("1.5e2 + x", s, {0, 0}) == doctest::Approx(150.0));
  CHECK(ev("exp(-y)", s, {0, 0}) == doctest::Approx(1.0));
  CHECK(ev("x+exp(y)", s, {4, 0}) == doctest::Approx(5.0));
  CHECK(ev("sqrt(x^2+y^2) - x", s, {3, 4}) == doctest::Approx(2.0));
  CHECK(ev("2^-1", s, {0, 0}) == doctest::Approx(0.5));
}

TEST_CASE("parse errors carry kind and offset") {
  const VarSpace s({"x", "y"});
  try {
    parse("x + e", s);
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::unknown_identifier);
    CHECK(e.offset() == 4);
  }
  try {
    parse("foo(x)", s);
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::unknown_function);
    CHECK(e.offset() == 0);
  }
  try {
    parse("x + * y", s);
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseError::Kind::syntax);
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("(x", s), ParseError);
  CHECK_THROWS_AS(parse("", s), ParseError);
  CHECK_THROWS_AS(parse("x y", s), ParseError);
}

TEST_CASE("domain errors") {
  const VarSpace s({"x"});
  CHECK_THROWS_AS(ev("ln(x)", s, {0}), DomainError);
  CHECK_THROWS_AS(ev("sqrt(x)", s, {-1}), DomainError);
  CHECK_THROWS_AS(ev("1/x", s, {0}), DomainError);
  CHECK_THROWS_AS(ev("x^(-1)", s, {0}), DomainError);
  CHECK_THROWS_AS(ev("x^0.5", s, {-2}), DomainError);
  CHECK(ev("x^3", s, {-2}) == doctest::Approx(-8.0));
  CHECK_THROWS_AS(ev("exp(x)", s, {1000}), DomainError);
}

TEST_CASE("differentiation") {
  const VarSpace s({"x", "y"});
  CHECK(diff(parse("x^2", s), 0).eval(std::vector<double>{3, 0}) == doctest::Approx(6.0));
  const Expr g = diff(parse("x^2 + y^2 - 2*x", s), 0);
  CHECK(g.eval(std::vector<double>{0.3, 7}) == doctest::Approx(2 * 0.3 - 2));
  CHECK_THROWS_AS(diff(parse("abs(x)", s), 0), ExprError);
  CHECK(diff(parse("y", s), 0).is_constant(0.0));

  const VarSpace v = xyz();
  const auto grad = gradient(parse("x*y*z", v), v);
  std::vector<double> pt{1, 1, 2};
  CHECK(grad[0].eval(pt) == doctest::Approx(2.0));
  CHECK(grad[1].eval(pt) == doctest::Approx(2.0));
  CHECK(grad[2].eval(pt) == doctest::Approx(1.0));

  const auto h = hessian(parse("x+y+z+0.5*(x^2+y^2+z^2)", v), v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h[i][j].eval(pt) == doctest::Approx(i == j ? 1.0 : 0.0));
  const auto h2 = hessian(parse("x^2+y^2+z^2", v), v);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(h2[i][j].eval(pt) == doctest::Approx(i == j ? 2.0 : 0.0));
}

TEST_CASE("gradient matches finite differences; hessian symmetric; round trip") {
  const VarSpace v = xyz();
  const std::vector<std::string> corpus = {
      "x*y*z + sin(x)*cos(y) - exp(-z^2)",
      "ln(1 + x^2 + y^2) * sqrt(2 + z^2)",
      "(x - y)^3 / (1 + z^2) + x^y^2",
      "2*x*y + z^2 - x*z*(z - 1)",
      "exp(x/3) * (y - z)^2 - cos(x*y*z)",
  };
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.2, 1.5);
  for (const auto& text : corpus) {
    const Expr e = parse(text, v);
    const auto grad = gradient(e, v);
    const auto hess = hessian(e, v);
    const Expr back = parse(unparse(e), v);
    for (int k = 0; k < 100; ++k) {
      std::vector<double> p{u(rng), u(rng), u(rng)};
      for (std::size_t i = 0; i < 3; ++i) {
        auto pp = p, pm = p;
        const double h = 1e-6;
        pp[i] += h;
        pm[i] -= h;
        const double fd = (e.eval(pp) - e.eval(pm)) / (2 * h);
        const double an = grad[i].eval(p);
        CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(an)));
        for (std::size_t j = 0; j < 3; ++j) CHECK(std::fabs(hess[i][j].eval(p) - hess[j][i].eval(p)) <= 1e-12);
      }
      CHECK(std::fabs(back.eval(p) - e.eval(p)) <= 1e-12);
    }
  }
}

TEST_CASE("substitute and rebind") {
  const VarSpace v = xyz();
  const Expr e = parse("x*y + z", v);
  const Expr s = substitute(e, 0, parse("2*z", v));
  CHECK(s.eval(std::vector<double>{100, 3, 1}) == doctest::Approx(7.0));
  const VarSpace w({"z", "y", "x", "t"});
  const Expr r = rebind(e, w);
  CHECK(r.eval(std::vector<double>{1, 3, 2, 9}) == doctest::Approx(7.0));
  CHECK_THROWS_AS(rebind(e, VarSpace({"x", "y"})), InputError);
  CHECK(depends_on(e, 2));
  CHECK_FALSE(depends_on(parse("x*y", v), 2));
}

TEST_CASE("var space validation") {
  CHECK_THROWS_AS(VarSpace({"x", "x"}), InputError);
  CHECK_THROWS_AS(VarSpace(std::vector<std::string>{}), InputError);
  const VarSpace s({"x", "lambda"});
  CHECK(s.fresh_name("lambda") == "lambda_");
  CHECK(s.extended({"mu"}).size() == 3);
}
