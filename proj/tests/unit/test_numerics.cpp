#include <cmath>
#include <random>

#include "doctest.h"
#include "pfaffopt/errors.hpp"
#include "pfaffopt/numerics.hpp"

using namespace pfaffopt;
using namespace pfaffopt::numerics;

TEST_CASE("newton scalar and systems") {
  NonlinearSystem sys{[](const Vector& x) { return Vector{x[0] * x[0] - 4}; },
                      [](const Vector& x) { return Matrix{{2 * x[0]}}; }};
  const auto r = newton_solve(sys, {3.0});
  CHECK(std::fabs(r.x[0] - 2.0) <= 1e-12);
  CHECK(r.residual <= 1e-10);

  const VarSpace s({"x", "y"});
  auto lin = make_system({parse("2*x - 1", s), parse("2*y - 1", s)}, s);
  const auto r2 = newton_solve(lin, {5.0, -3.0});
  CHECK(r2.x[0] == doctest::Approx(0.5));
  CHECK(r2.x[1] == doctest::Approx(0.5));

  const VarSpace v({"x", "y", "z"});
  // grad(x^2+y^2+z^2) + 2*(0, x, 1)
  auto ncp = make_system({parse("2*x", v), parse("2*y + 2*x", v), parse("2*z + 2", v)}, v);
  const auto r3 = newton_solve(ncp, {1.0, 1.0, 1.0});
  CHECK(std::fabs(r3.x[0]) <= 1e-12);
  CHECK(std::fabs(r3.x[1]) <= 1e-12);
  CHECK(std::fabs(r3.x[2] + 1) <= 1e-12);

  NonlinearSystem sing{[](const Vector& x) { return Vector{x[0] + x[1] - 1, 2 * x[0] + 2 * x[1] - 2}; },
                       [](const Vector&) { return Matrix{{1, 1}, {2, 2}}; }};
  CHECK_THROWS_AS(newton_solve(sing, {0.0, 0.0}), SingularJacobianError);

  NonlinearSystem none{[](const Vector& x) { return Vector{x[0] * x[0] + 1}; },
                       [](const Vector& x) { return Matrix{{2 * x[0]}}; }};
  CHECK_THROWS_AS(newton_solve(none, {0.7}), SolverError);
}

TEST_CASE("levenberg marquardt on an overdetermined system") {
  NonlinearSystem sys{[](const Vector& x) { return Vector{x[0] - 1, x[1] - 2, x[0] + x[1] - 3}; },
                      [](const Vector&) { return Matrix{{1, 0}, {0, 1}, {1, 1}}; }};
  const auto r = levenberg_marquardt(sys, {10, -10});
  CHECK(r.residual <= 1e-10);
  CHECK(r.x[0] == doctest::Approx(1.0));
}

TEST_CASE("linear algebra") {
  const Matrix a{{4, 1, 0}, {1, 3, 1}, {0, 1, 2}};
  const Vector b{1, 2, 3};
  const Vector x = solve(a, b);
  const Vector ax = a * x;
  for (int i = 0; i < 3; ++i) CHECK(ax[i] == doctest::Approx(b[i]));
  CHECK(determinant(a) == doctest::Approx(18.0));
  const Matrix id = a * inverse(a);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(std::fabs(id(i, j) - (i == j)) <= 1e-12);
  const auto eig = symmetric_eigen(Matrix{{2, 1}, {1, 2}});
  CHECK(eig.values[0] == doctest::Approx(1.0));
  CHECK(eig.values[1] == doctest::Approx(3.0));
  const Vector ls = least_squares(Matrix{{1, 0}, {0, 1}, {1, 1}}, Vector{1, 2, 3});
  CHECK(ls[0] == doctest::Approx(1.0));
  CHECK(ls[1] == doctest::Approx(2.0));
  CHECK(determinant(Matrix{{1, 2}, {2, 4}}) == 0.0);
}

TEST_CASE("rk4") {
  const double c = rk4_integrate([](double, double) { return -0.5; }, 2.0, 0.0, 0.5, 100);
  CHECK(std::fabs(c - 0.75) <= 1e-12);
  const double e = rk4_integrate([](double, double y) { return y; }, 0.0, 1.0, 1.0, 1000);
  CHECK(std::fabs(e - std::exp(1.0)) <= 1e-8);
  const double mu0 = -1.0;
  const double c2 = rk4_integrate([](double mu, double) { return 1.0 / (mu * mu * mu); }, mu0, 0.0, -0.5, 200);
  CHECK(std::fabs(c2 + 0.5 * (1.0 / 0.25 - 1.0)) <= 1e-8);

  auto err = [](int steps) {
    return std::fabs(rk4_integrate([](double, double y) { return y; }, 0.0, 1.0, 1.0, steps) - std::exp(1.0));
  };
  const double ratio = err(20) / err(40);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);

  CHECK_THROWS_AS(rk4_integrate([](double t, double) -> double {
                    if (t > 0.5) throw DomainError("bad");
                    return 1.0;
                  }, 0.0, 0.0, 1.0, 10),
                  OdeDomainError);
}

TEST_CASE("null space and signatures") {
  const auto b = null_space_basis(Matrix{{1, 0, 0}}, 1e-10);
  REQUIRE(b.size() == 2);
  for (const auto& v : b) CHECK(std::fabs(v[0]) <= 1e-14);
  CHECK(std::fabs(dot(b[0], b[1])) <= 1e-12);

  const auto plane = null_space_basis(Matrix{{0, -1, 1}}, 1e-10);
  REQUIRE(plane.size() == 2);
  bool has_diag = false;
  for (const auto& v : plane)
    if (std::fabs(v[1] - v[2]) <= 1e-12 && std::fabs(v[1]) > 0.1) has_diag = true;
  CHECK(has_diag);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Matrix a(2, 5);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 5; ++j) a(i, j) = n01(rng);
  const auto nb = null_space_basis(a);
  CHECK(nb.size() == 3);
  for (const auto& v : nb) CHECK(norm2(a * v) <= 1e-10);
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = 0; j < nb.size(); ++j) CHECK(std::fabs(dot(nb[i], nb[j]) - (i == j)) <= 1e-10);

  auto q_for = [](double mu) { return Matrix{{-1, -mu / 2, 0}, {-mu / 2, -1, 0}, {0, 0, -1}}; };
  const auto s1 = restricted_signature(q_for(1.0), plane);
  CHECK(s1 == Signature{0, 2, 0});
  const auto s3 = restricted_signature(q_for(3.0), plane);
  CHECK(s3 == Signature{1, 1, 0});
  const std::vector<std::size_t> order{2, 1, 0};
  const auto plane2 = null_space_basis(Matrix{{0, -1, 1}}, 1e-10, order);
  CHECK(restricted_signature(q_for(3.0), plane2) == s3);

  CHECK(signature(Matrix::identity(4)) == Signature{4, 0, 0});
  CHECK(signature(Matrix{{1, 0}, {0, 0}}) == Signature{1, 0, 1});
  CHECK_THROWS_AS(signature(Matrix{{1, 2}, {0, 1}}), InputError);
  CHECK(matrix_rank(Matrix{{1, 2}, {2, 4}}) == 1);
}

TEST_CASE("derivative5") {
  CHECK(derivative5([](double x) { return std::sin(x); }, 0.3, 1e-3) == doctest::Approx(std::cos(0.3)).epsilon(1e-10));
}
