#pragma once

// Problem description shared by every solver: objective, holonomic
// constraints g(x) rel c, Pfaff constraints w = w_i(x) dx^i rel 0.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pfaffopt/expr.hpp"
#include "pfaffopt/numerics.hpp"

namespace pfaffopt {

enum class Relation { eq, le, ge };
enum class Sense { min, max };

std::string_view relation_name(Relation r);
Relation relation_from_name(std::string_view s);  // "=", "<=", ">=" (also "==")
std::string_view sense_name(Sense s);
Sense sense_from_name(std::string_view s);

struct HolonomicConstraint {
  Expr g;
  Relation relation = Relation::eq;
  double constant = 0.0;
};

struct PfaffForm {
  std::vector<Expr> coefficients;  // one per variable of the program space
  Relation relation = Relation::eq;

  /// +1 for = and <= forms, -1 for >= forms: the NCP system uses sign * w.
  double sign() const noexcept { return relation == Relation::ge ? -1.0 : 1.0; }
};

struct Program {
  std::string name;
  VarSpace space;
  Expr objective;
  Sense sense = Sense::min;
  std::vector<HolonomicConstraint> holonomic;
  std::vector<PfaffForm> pfaff;

  std::size_t dimension() const noexcept { return space.size(); }
  bool has_inequalities() const;
  /// Throws InputError on dimension mismatches or variables out of range.
  void validate() const;
};

enum class Classification { min, max, saddle, degenerate };
std::string_view classification_name(Classification c);

/// Classification by the signature of a (restricted) quadratic form.
Classification classify(const numerics::Signature& s);

/// Multistart sampling. Per-variable bounds of the space override the box.
struct StartSpec {
  int count = 32;
  double lower = -10.0;
  double upper = 10.0;
  std::uint64_t seed = 42;
};

/// `spec.count` deterministic uniform points in the sampling box of `space`.
std::vector<numerics::Vector> sample_points(const VarSpace& space, const StartSpec& spec);

/// Evaluates a vector of expressions.
numerics::Vector eval_all(const std::vector<Expr>& exprs, std::span<const double> x);
numerics::Matrix eval_matrix(const ExprMatrix& m, std::span<const double> x);

/// Appends `v` to `roots` unless it lies within `tol` (inf-norm) of one already there.
bool insert_unique(std::vector<numerics::Vector>& roots, const numerics::Vector& v, double tol = 1e-6);

}  // namespace pfaffopt
