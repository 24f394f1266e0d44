#include "pfaffopt/darboux.hpp"

#include <algorithm>
#include <cmath>

#include "pfaffopt/errors.hpp"

namespace pfaffopt::darboux {

namespace {

std::size_t expected_size(CanonicalKind kind, int p) {
  return kind == CanonicalKind::darboux_rank_p ? 2 * std::size_t(p) : 2 * std::size_t(p) + 1;
}

void check_shape(CanonicalKind kind, int p, const VarSpace& space) {
  if (p < 1) throw InputError("rank p must be at least 1");
  if (space.size() != expected_size(kind, p))
    throw InputError(std::string(canonical_kind_name(kind)) + " with p = " + std::to_string(p) + " needs " +
                     std::to_string(expected_size(kind, p)) + " variables, got " + std::to_string(space.size()));
}

Expr var(const VarSpace& s, std::size_t i) { return Expr::variable(i, s.name(i)); }

nonholonomic::NcpSolveResult solve_canonical(CanonicalKind kind, const Expr& f, const VarSpace& space, int p,
                                             double mu, const StartSpec& starts, Sense sense) {
  Program prog;
  prog.space = space;
  prog.objective = f;
  prog.sense = sense;
  prog.pfaff.push_back(build_canonical(kind, p, space));
  return nonholonomic::ncp_solve(prog, {mu}, starts);
}

}  // namespace

std::string_view canonical_kind_name(CanonicalKind k) {
  switch (k) {
    case CanonicalKind::darboux_rank_p: return "darboux_rank_p";
    case CanonicalKind::contact: return "contact";
    case CanonicalKind::symmetric_normal: return "symmetric_normal";
  }
  return "?";
}

CanonicalKind canonical_kind_from_name(std::string_view name) {
  for (auto k : {CanonicalKind::darboux_rank_p, CanonicalKind::contact, CanonicalKind::symmetric_normal})
    if (canonical_kind_name(k) == name) return k;
  throw InputError("unknown canonical form '" + std::string(name) + "'");
}

PfaffForm build_canonical(CanonicalKind kind, int p, const VarSpace& space) {
  check_shape(kind, p, space);
  const std::size_t P = p;
  PfaffForm w;
  w.coefficients.assign(space.size(), Expr::constant(0.0));
  for (std::size_t i = 0; i < P; ++i) {
    if (kind == CanonicalKind::symmetric_normal) {
      w.coefficients[i] = Expr::constant(-0.5) * var(space, P + i);
      w.coefficients[P + i] = Expr::constant(0.5) * var(space, i);
    } else {
      w.coefficients[P + i] = var(space, i);
    }
  }
  if (kind != CanonicalKind::darboux_rank_p) w.coefficients[2 * P] = Expr::constant(1.0);
  return w;
}

nonholonomic::NcpSolveResult solve_even(const Expr& f, const VarSpace& space, int p, double mu,
                                        const StartSpec& starts, Sense sense) {
  return solve_canonical(CanonicalKind::darboux_rank_p, f, space, p, mu, starts, sense);
}

nonholonomic::NcpSolveResult solve_odd(const Expr& f, const VarSpace& space, int p, double mu,
                                       const StartSpec& starts, Sense sense) {
  return solve_canonical(CanonicalKind::contact, f, space, p, mu, starts, sense);
}

ContactForm2 contact_restricted_form(const Expr& f, const VarSpace& space, int p, const Vector& point, double mu) {
  check_shape(CanonicalKind::contact, p, space);
  if (point.size() != space.size()) throw InputError("point has the wrong dimension");
  const std::size_t P = p, n = space.size(), z = 2 * P;
  const Matrix h = eval_matrix(hessian(f, space), point);
  const Vector x0(point.begin(), point.begin() + P);

  // term by term: H_xx, H_yy, 2 H_xy, mu dx.dy, -2 (H_xz dx + H_yz dy)(x0.dy), H_zz (x0.dy)^2
  ContactForm2 out;
  Matrix m(2 * P, 2 * P);
  for (std::size_t i = 0; i < 2 * P; ++i)
    for (std::size_t j = 0; j < 2 * P; ++j) m(i, j) = h(i, j);
  for (std::size_t i = 0; i < P; ++i) {
    m(i, P + i) += mu / 2;
    m(P + i, i) += mu / 2;
  }
  for (std::size_t a = 0; a < 2 * P; ++a)
    for (std::size_t l = 0; l < P; ++l) {
      m(a, P + l) -= h(a, z) * x0[l];
      m(P + l, a) -= h(a, z) * x0[l];
    }
  for (std::size_t k = 0; k < P; ++k)
    for (std::size_t l = 0; l < P; ++l) m(P + k, P + l) += h(z, z) * x0[k] * x0[l];
  out.written = m;

  Matrix q = h;
  for (std::size_t i = 0; i < P; ++i) {
    q(i, P + i) += mu / 2;
    q(P + i, i) += mu / 2;
  }
  Matrix t(n, 2 * P);
  for (std::size_t i = 0; i < 2 * P; ++i) t(i, i) = 1.0;
  for (std::size_t l = 0; l < P; ++l) t(z, P + l) = -x0[l];
  out.projected = t.transpose() * q * t;
  for (std::size_t i = 0; i < 2 * P; ++i)
    for (std::size_t j = 0; j < 2 * P; ++j)
      out.max_difference = std::max(out.max_difference, std::fabs(out.written(i, j) - out.projected(i, j)));
  out.signature = numerics::signature(out.projected);
  out.classification = classify(out.signature);
  return out;
}

Program phi_reformulate(const Expr& f, const Expr& phi, const VarSpace& space, Sense sense) {
  check_shape(CanonicalKind::contact, 1, space);
  if (depends_on(phi, 0) || depends_on(phi, 2)) throw InputError("phi may depend on y only");
  Program prog;
  prog.space = space;
  prog.objective = f;
  prog.sense = sense;
  prog.holonomic.push_back({var(space, 2) - phi, Relation::eq, 0.0});
  prog.holonomic.push_back({var(space, 0) + diff(phi, 1), Relation::eq, 0.0});
  return prog;
}

std::vector<Expr> contact_rhs(const Expr& k, const VarSpace& space) {
  check_shape(CanonicalKind::contact, 1, space);
  const Expr x = var(space, 0);
  const Expr kx = diff(k, 0), ky = diff(k, 1), kz = diff(k, 2);
  return {Expr::constant(-1.0) * ky + x * kz, kx, k - x * kx};
}

std::vector<FlowPoint> contact_flow(const Expr& k, const VarSpace& space, const Vector& start, double t1, int steps) {
  if (start.size() != 3) throw InputError("contact flow starts from a point (x, y, z)");
  if (steps < 1) throw InputError("steps must be positive");
  const auto rhs = contact_rhs(k, space);
  const auto traj =
      numerics::rk4_trajectory([&](double, const Vector& s) { return eval_all(rhs, s); }, 0.0, start, t1, steps);
  std::vector<FlowPoint> out;
  out.reserve(traj.size());
  for (const auto& pt : traj) {
    double kv;
    try {
      kv = k.eval(pt.y);
    } catch (const DomainError& e) {
      throw OdeDomainError(pt.t, e.what());
    }
    out.push_back({pt.t, pt.y, kv});
  }
  return out;
}

}  // namespace pfaffopt::darboux
