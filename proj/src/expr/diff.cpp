#include <cmath>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/expr.hpp"

namespace pfaffopt {

Expr diff(const Expr& e, std::size_t index) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::constant: return Expr::constant(0.0);
    case NodeKind::variable: return Expr::constant(n.index == index ? 1.0 : 0.0);
    case NodeKind::negate: return -diff(e.child(0), index);
    case NodeKind::binary: {
      const Expr a = e.child(0);
      const Expr b = e.child(1);
      switch (n.op) {
        case BinaryOp::add: return diff(a, index) + diff(b, index);
        case BinaryOp::sub: return diff(a, index) - diff(b, index);
        case BinaryOp::mul: return diff(a, index) * b + a * diff(b, index);
        case BinaryOp::div:
          return (diff(a, index) * b - a * diff(b, index)) / pow(b, Expr::constant(2.0));
        case BinaryOp::pow: {
          const Expr da = diff(a, index);
          if (!depends_on(b, index)) {
            // d(a^c) = c a^(c-1) da; keeps negative bases with integer powers legal
            return b * pow(a, b - 1.0) * da;
          }
          const Expr db = diff(b, index);
          if (!depends_on(a, index)) return e * call(Function::ln, a) * db;
          return e * (db * call(Function::ln, a) + b * da / a);
        }
      }
      break;
    }
    case NodeKind::call: {
      const Expr u = e.child(0);
      const Expr du = diff(u, index);
      switch (n.fn) {
        case Function::exp: return e * du;
        case Function::ln: return du / u;
        case Function::sqrt: return du / (Expr::constant(2.0) * e);
        case Function::sin: return call(Function::cos, u) * du;
        case Function::cos: return -(call(Function::sin, u) * du);
        case Function::abs: throw ExprError("abs() is not differentiable");
      }
      break;
    }
  }
  return Expr::constant(0.0);
}

Expr diff(const Expr& e, const VarSpace& space, std::string_view name) {
  auto idx = space.index_of(name);
  if (!idx) throw InputError("unknown variable '" + std::string(name) + "'");
  return diff(e, *idx);
}

std::vector<Expr> gradient(const Expr& e, const VarSpace& space) {
  std::vector<Expr> g;
  g.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) g.push_back(diff(e, i));
  return g;
}

ExprMatrix hessian(const Expr& e, const VarSpace& space) {
  const auto g = gradient(e, space);
  ExprMatrix h(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    h[i].reserve(space.size());
    for (std::size_t j = 0; j < space.size(); ++j) h[i].push_back(diff(g[i], j));
  }
  return h;
}

ExprMatrix jacobian(std::span<const Expr> exprs, const VarSpace& space) {
  ExprMatrix jac;
  jac.reserve(exprs.size());
  for (const auto& e : exprs) jac.push_back(gradient(e, space));
  return jac;
}

}  // namespace pfaffopt
