#include <cmath>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/numerics.hpp"

namespace pfaffopt::numerics {

namespace {

Vector call_rhs(const OdeRhs& f, double t, const Vector& y) {
  try {
    Vector d = f(t, y);
    for (double v : d) {
      if (!std::isfinite(v)) throw DomainError("non-finite derivative");
    }
    return d;
  } catch (const OdeDomainError&) {
    throw;
  } catch (const DomainError& e) {
    throw OdeDomainError(t, e.what());
  }
}

Vector rk4_step(const OdeRhs& f, double t, const Vector& y, double h) {
  const Vector k1 = call_rhs(f, t, y);
  const Vector k2 = call_rhs(f, t + h / 2, axpy(h / 2, k1, y));
  const Vector k3 = call_rhs(f, t + h / 2, axpy(h / 2, k2, y));
  const Vector k4 = call_rhs(f, t + h, axpy(h, k3, y));
  Vector out = y;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

}  // namespace

int steps_for(double t0, double t1, double h) {
  return std::max(1, static_cast<int>(std::ceil(std::fabs(t1 - t0) / h - 1e-9)));
}

Vector rk4_integrate(const OdeRhs& f, double t0, Vector y, double t1, int steps) {
  if (steps < 1) throw InputError("RK4 needs at least one step");
  const double h = (t1 - t0) / steps;
  for (int k = 0; k < steps; ++k) y = rk4_step(f, t0 + k * h, y, h);
  return y;
}

double rk4_integrate(const ScalarOdeRhs& f, double t0, double y0, double t1, int steps) {
  OdeRhs vf = [&f](double t, const Vector& y) { return Vector{f(t, y[0])}; };
  return rk4_integrate(vf, t0, Vector{y0}, t1, steps)[0];
}

std::vector<TrajectoryPoint> rk4_trajectory(const OdeRhs& f, double t0, Vector y, double t1, int steps) {
  if (steps < 1) throw InputError("RK4 needs at least one step");
  const double h = (t1 - t0) / steps;
  std::vector<TrajectoryPoint> out;
  out.reserve(steps + 1);
  out.push_back({t0, y});
  for (int k = 0; k < steps; ++k) {
    y = rk4_step(f, t0 + k * h, y, h);
    out.push_back({t0 + (k + 1) * h, y});
  }
  return out;
}

}  // namespace pfaffopt::numerics
