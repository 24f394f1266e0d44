#include "pfaffopt/expr.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "pfaffopt/errors.hpp"

namespace pfaffopt {

VarSpace::VarSpace(std::vector<std::string> names, std::vector<std::optional<Bounds>> bounds)
    : names_(std::move(names)), bounds_(std::move(bounds)) {
  if (names_.empty()) throw InputError("variable space must have at least one variable");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw InputError("empty variable name");
    if (!seen.insert(n).second) throw InputError("duplicate variable name '" + n + "'");
  }
  if (bounds_.empty()) bounds_.resize(names_.size());
  if (bounds_.size() != names_.size()) throw InputError("bounds/variables size mismatch");
  for (const auto& b : bounds_) {
    if (b && !(b->lower < b->upper)) throw InputError("variable bounds must satisfy lower < upper");
  }
}

std::optional<std::size_t> VarSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

VarSpace VarSpace::extended(const std::vector<std::string>& extra) const {
  auto names = names_;
  auto bounds = bounds_;
  names.insert(names.end(), extra.begin(), extra.end());
  bounds.resize(names.size());
  return VarSpace(std::move(names), std::move(bounds));
}

std::string VarSpace::fresh_name(const std::string& base) const {
  std::string name = base;
  while (index_of(name)) name += '_';
  return name;
}

std::string_view function_name(Function fn) {
  switch (fn) {
    case Function::exp: return "exp";
    case Function::ln: return "ln";
    case Function::sqrt: return "sqrt";
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    case Function::abs: return "abs";
  }
  return "?";
}

std::optional<Function> function_from_name(std::string_view name) {
  for (Function fn : {Function::exp, Function::ln, Function::sqrt, Function::sin, Function::cos,
                      Function::abs}) {
    if (function_name(fn) == name) return fn;
  }
  return std::nullopt;
}

Expr make_node(Node node) { return Expr(std::make_shared<const Node>(std::move(node))); }

Expr Expr::constant(double value) {
  Node n;
  n.kind = NodeKind::constant;
  n.value = value;
  return make_node(std::move(n));
}

Expr Expr::variable(std::size_t index, std::string name) {
  Node n;
  n.kind = NodeKind::variable;
  n.index = index;
  n.name = std::move(name);
  return make_node(std::move(n));
}

Expr Expr::variable(const VarSpace& space, std::string_view name) {
  auto idx = space.index_of(name);
  if (!idx) throw InputError("unknown variable '" + std::string(name) + "'");
  return variable(*idx, std::string(name));
}

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::add: return checked(a + b, "addition");
    case BinaryOp::sub: return checked(a - b, "subtraction");
    case BinaryOp::mul: return checked(a * b, "multiplication");
    case BinaryOp::div:
      if (b == 0.0) throw DomainError("division by zero");
      return checked(a / b, "division");
    case BinaryOp::pow:
      if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
      if (a < 0.0 && b != std::floor(b)) throw DomainError("negative base with non-integer exponent");
      return checked(std::pow(a, b), "power");
  }
  return 0.0;
}

double apply_function(Function fn, double x) {
  switch (fn) {
    case Function::exp: return checked(std::exp(x), "exp");
    case Function::ln:
      if (x <= 0.0) throw DomainError("ln of non-positive argument");
      return std::log(x);
    case Function::sqrt:
      if (x < 0.0) throw DomainError("sqrt of negative argument");
      return std::sqrt(x);
    case Function::sin: return std::sin(x);
    case Function::cos: return std::cos(x);
    case Function::abs: return std::fabs(x);
  }
  return 0.0;
}

double eval_node(const Node& n, std::span<const double> point) {
  switch (n.kind) {
    case NodeKind::constant: return n.value;
    case NodeKind::variable:
      if (n.index >= point.size()) throw InputError("variable '" + n.name + "' is unbound");
      return checked(point[n.index], "variable binding");
    case NodeKind::negate: return -eval_node(*n.children[0], point);
    case NodeKind::binary:
      return apply_binary(n.op, eval_node(*n.children[0], point), eval_node(*n.children[1], point));
    case NodeKind::call: return apply_function(n.fn, eval_node(*n.children[0], point));
  }
  return 0.0;
}

Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) {
    try {
      return Expr::constant(apply_binary(op, a.constant_value(), b.constant_value()));
    } catch (const DomainError&) {
      // keep the node; the error surfaces on evaluation
    }
  }
  Node n;
  n.kind = NodeKind::binary;
  n.op = op;
  n.children = {a.shared(), b.shared()};
  return make_node(std::move(n));
}

}  // namespace

double Expr::eval(std::span<const double> point) const { return eval_node(*node_, point); }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return binary(BinaryOp::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return binary(BinaryOp::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  return binary(BinaryOp::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(0.0) && !(b.is_constant(0.0))) return Expr::constant(0.0);
  return binary(BinaryOp::div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.constant_value());
  if (a.kind() == NodeKind::negate) return a.child(0);
  Node n;
  n.kind = NodeKind::negate;
  n.children = {a.shared()};
  return make_node(std::move(n));
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return Expr::constant(1.0);
  return binary(BinaryOp::pow, base, exponent);
}

Expr call(Function fn, const Expr& arg) {
  if (arg.is_constant()) {
    try {
      return Expr::constant(apply_function(fn, arg.constant_value()));
    } catch (const DomainError&) {
    }
  }
  Node n;
  n.kind = NodeKind::call;
  n.fn = fn;
  n.children = {arg.shared()};
  return make_node(std::move(n));
}

double eval(const Expr& e, std::span<const double> point) { return e.eval(point); }

double eval(const Expr& e, const VarSpace& space, const std::map<std::string, double>& point) {
  std::vector<double> values(space.size(), 0.0);
  std::vector<bool> bound(space.size(), false);
  for (const auto& [name, value] : point) {
    if (auto idx = space.index_of(name)) {
      values[*idx] = value;
      bound[*idx] = true;
    }
  }
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (!bound[i] && depends_on(e, i)) {
      throw InputError("variable '" + space.name(i) + "' is unbound");
    }
  }
  return e.eval(values);
}

namespace {

void unparse_into(const Node& n, std::string& out) {
  switch (n.kind) {
    case NodeKind::constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0.0) {
        out += '(';
        out += buf;
        out += ')';
      } else {
        out += buf;
      }
      return;
    }
    case NodeKind::variable: out += n.name; return;
    case NodeKind::negate:
      out += "(-";
      unparse_into(*n.children[0], out);
      out += ')';
      return;
    case NodeKind::binary: {
      static constexpr char ops[] = {'+', '-', '*', '/', '^'};
      out += '(';
      unparse_into(*n.children[0], out);
      out += ops[static_cast<int>(n.op)];
      unparse_into(*n.children[1], out);
      out += ')';
      return;
    }
    case NodeKind::call:
      out += function_name(n.fn);
      out += '(';
      unparse_into(*n.children[0], out);
      out += ')';
      return;
  }
}

template <typename Leaf>
Expr transform(const Expr& e, const Leaf& leaf) {
  switch (e.kind()) {
    case NodeKind::constant: return e;
    case NodeKind::variable: return leaf(e);
    case NodeKind::negate: return -transform(e.child(0), leaf);
    case NodeKind::binary: {
      Expr a = transform(e.child(0), leaf);
      Expr b = transform(e.child(1), leaf);
      switch (e.node().op) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div: return a / b;
        case BinaryOp::pow: return pow(a, b);
      }
      break;
    }
    case NodeKind::call: return call(e.node().fn, transform(e.child(0), leaf));
  }
  return e;
}

}  // namespace

std::string unparse(const Expr& e) {
  std::string out;
  unparse_into(e.node(), out);
  return out;
}

Expr substitute(const Expr& e, std::size_t index, const Expr& replacement) {
  return transform(e, [&](const Expr& v) { return v.node().index == index ? replacement : v; });
}

Expr rebind(const Expr& e, const VarSpace& target) {
  return transform(e, [&](const Expr& v) { return Expr::variable(target, v.node().name); });
}

bool depends_on(const Expr& e, std::size_t index) {
  const Node& n = e.node();
  if (n.kind == NodeKind::variable) return n.index == index;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (depends_on(e.child(i), index)) return true;
  }
  return false;
}

bool contains_function(const Expr& e, Function fn) {
  const Node& n = e.node();
  if (n.kind == NodeKind::call && n.fn == fn) return true;
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    if (contains_function(e.child(i), fn)) return true;
  }
  return false;
}

}  // namespace pfaffopt
