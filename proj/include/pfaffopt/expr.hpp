#pragma once

// Symbolic scalar expressions over an ordered set of named variables.
//
// Grammar (see docs/grammar.md):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | identifier | function '(' expr ')' | '(' expr ')'
//
// so -x^2 == -(x^2) and 2^3^2 == 2^(3^2).

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pfaffopt {

struct Bounds {
  double lower;
  double upper;
};

/// Ordered variable names x = (x^1, ..., x^n) with optional sampling bounds.
class VarSpace {
 public:
  VarSpace() = default;
  explicit VarSpace(std::vector<std::string> names,
                    std::vector<std::optional<Bounds>> bounds = {});

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::optional<Bounds> bounds(std::size_t i) const { return bounds_.at(i); }

  /// This space followed by `extra` (names must stay unique).
  VarSpace extended(const std::vector<std::string>& extra) const;

  /// `base`, or `base` with '_' appended until it does not clash.
  std::string fresh_name(const std::string& base) const;

  friend bool operator==(const VarSpace& a, const VarSpace& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::vector<std::optional<Bounds>> bounds_;
};

enum class NodeKind { constant, variable, negate, binary, call };
enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { exp, ln, sqrt, sin, cos, abs };

std::string_view function_name(Function fn);
std::optional<Function> function_from_name(std::string_view name);

class Expr;

/// Immutable expression node. Shared freely between expressions and threads.
struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;        // constant
  std::size_t index = 0;     // variable
  std::string name;          // variable
  BinaryOp op = BinaryOp::add;
  Function fn = Function::exp;
  std::vector<std::shared_ptr<const Node>> children;
};

class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr variable(std::size_t index, std::string name);
  static Expr variable(const VarSpace& space, std::string_view name);

  NodeKind kind() const noexcept { return node_->kind; }
  const Node& node() const noexcept { return *node_; }
  const std::shared_ptr<const Node>& shared() const noexcept { return node_; }
  bool is_constant() const noexcept { return node_->kind == NodeKind::constant; }
  bool is_constant(double v) const noexcept { return is_constant() && node_->value == v; }
  double constant_value() const noexcept { return node_->value; }
  Expr child(std::size_t i) const { return Expr(node_->children.at(i)); }

  /// Evaluates with variable i bound to point[i]. Throws DomainError.
  double eval(std::span<const double> point) const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr make_node(Node node);

  std::shared_ptr<const Node> node_;
};

// Builders. They fold constants and drop additive zeros / multiplicative ones;
// nothing more.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Function fn, const Expr& arg);
inline Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }
inline Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }
inline Expr operator-(const Expr& a, double b) { return a - Expr::constant(b); }

Expr parse(std::string_view text, const VarSpace& space);
std::string unparse(const Expr& e);

double eval(const Expr& e, std::span<const double> point);
double eval(const Expr& e, const VarSpace& space, const std::map<std::string, double>& point);

/// Exact symbolic derivative with respect to variable `index`.
/// Throws ExprError when the expression contains abs().
Expr diff(const Expr& e, std::size_t index);
Expr diff(const Expr& e, const VarSpace& space, std::string_view name);

using ExprMatrix = std::vector<std::vector<Expr>>;

std::vector<Expr> gradient(const Expr& e, const VarSpace& space);
/// Every entry is differentiated independently, so (i, j) and (j, i) are
/// distinct expressions that agree only by mixed-partial symmetry.
ExprMatrix hessian(const Expr& e, const VarSpace& space);
/// Jacobian of a list of expressions: rows = exprs, cols = space variables.
ExprMatrix jacobian(std::span<const Expr> exprs, const VarSpace& space);

/// Replaces variable `index` by `replacement` everywhere.
Expr substitute(const Expr& e, std::size_t index, const Expr& replacement);
/// Re-binds every variable by name into `target`. Throws InputError when a
/// name is missing from `target`.
Expr rebind(const Expr& e, const VarSpace& target);

bool depends_on(const Expr& e, std::size_t index);
bool contains_function(const Expr& e, Function fn);

}  // namespace pfaffopt
