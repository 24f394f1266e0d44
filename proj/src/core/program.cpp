#include "pfaffopt/program.hpp"

#include <cmath>
#include <random>

#include "pfaffopt/errors.hpp"

namespace pfaffopt {

std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::eq: return "=";
    case Relation::le: return "<=";
    case Relation::ge: return ">=";
  }
  return "=";
}

Relation relation_from_name(std::string_view s) {
  if (s == "=" || s == "==") return Relation::eq;
  if (s == "<=") return Relation::le;
  if (s == ">=") return Relation::ge;
  throw InputError("unknown relation '" + std::string(s) + "'");
}

std::string_view sense_name(Sense s) { return s == Sense::min ? "min" : "max"; }

Sense sense_from_name(std::string_view s) {
  if (s == "min") return Sense::min;
  if (s == "max") return Sense::max;
  throw InputError("unknown sense '" + std::string(s) + "'");
}

bool Program::has_inequalities() const {
  for (const auto& c : holonomic)
    if (c.relation != Relation::eq) return true;
  for (const auto& w : pfaff)
    if (w.relation != Relation::eq) return true;
  return false;
}

namespace {

void check_vars(const Expr& e, std::size_t n, const std::string& what) {
  if (e.kind() == NodeKind::variable && e.node().index >= n)
    throw InputError(what + " uses a variable outside the program space");
  for (std::size_t i = 0; i < e.node().children.size(); ++i) check_vars(e.child(i), n, what);
}

}  // namespace

void Program::validate() const {
  const std::size_t n = space.size();
  if (n == 0) throw InputError("program has no variables");
  check_vars(objective, n, "objective");
  for (const auto& c : holonomic) check_vars(c.g, n, "constraint");
  for (const auto& w : pfaff) {
    if (w.coefficients.size() != n)
      throw InputError("Pfaff form needs " + std::to_string(n) + " coefficients, got " +
                       std::to_string(w.coefficients.size()));
    for (const auto& e : w.coefficients) check_vars(e, n, "Pfaff coefficient");
  }
}

std::string_view classification_name(Classification c) {
  switch (c) {
    case Classification::min: return "min";
    case Classification::max: return "max";
    case Classification::saddle: return "saddle";
    case Classification::degenerate: return "degenerate";
  }
  return "degenerate";
}

Classification classify(const numerics::Signature& s) {
  if (s.n_zero > 0) return Classification::degenerate;
  if (s.n_minus == 0) return Classification::min;  // includes the empty form
  if (s.n_plus == 0) return Classification::max;
  return Classification::saddle;
}

std::vector<numerics::Vector> sample_points(const VarSpace& space, const StartSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::vector<numerics::Vector> out;
  out.reserve(spec.count);
  for (int k = 0; k < spec.count; ++k) {
    numerics::Vector p(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto b = space.bounds(i);
      const double lo = b ? b->lower : spec.lower;
      const double hi = b ? b->upper : spec.upper;
      // generate_canonical is not portable across libraries; do the mapping by hand
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      p[i] = lo + (hi - lo) * u;
    }
    out.push_back(std::move(p));
  }
  return out;
}

numerics::Vector eval_all(const std::vector<Expr>& exprs, std::span<const double> x) {
  numerics::Vector out(exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) out[i] = exprs[i].eval(x);
  return out;
}

numerics::Matrix eval_matrix(const ExprMatrix& m, std::span<const double> x) {
  const std::size_t cols = m.empty() ? 0 : m[0].size();
  numerics::Matrix out(m.size(), cols);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) out(i, j) = m[i][j].eval(x);
  return out;
}

bool insert_unique(std::vector<numerics::Vector>& roots, const numerics::Vector& v, double tol) {
  for (const auto& r : roots)
    if (numerics::norm_inf(numerics::sub(r, v)) <= tol) return false;
  roots.push_back(v);
  return true;
}

}  // namespace pfaffopt
