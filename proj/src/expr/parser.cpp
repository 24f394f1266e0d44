#include <cctype>
#include <charconv>
#include <string>

#include "pfaffopt/errors.hpp"
#include "pfaffopt/expr.hpp"

namespace pfaffopt {
namespace {

class Parser {
 public:
  Parser(std::string_view text, const VarSpace& space) : text_(text), space_(space) {}

  Expr parse_all() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what, ParseError::Kind kind = ParseError::Kind::syntax) {
    throw ParseError(kind, pos_, what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = lhs + parse_term();
      } else if (accept('-')) {
        lhs = lhs - parse_term();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = lhs * parse_unary();
      } else if (accept('/')) {
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return -parse_unary();
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (accept('^')) return pow(base, parse_unary());
    return base;
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      digits();
    }
    // exponent only when a digit follows, so "2e" is not swallowed
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        digits();
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::constant(value);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      ++pos_;
    }
    const std::string_view name = text_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      auto fn = function_from_name(name);
      if (!fn) {
        pos_ = start;
        fail("unknown function '" + std::string(name) + "'", ParseError::Kind::unknown_function);
      }
      ++pos_;
      Expr arg = parse_expr();
      expect(')');
      return call(*fn, arg);
    }
    auto idx = space_.index_of(name);
    if (!idx) {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'", ParseError::Kind::unknown_identifier);
    }
    return Expr::variable(*idx, std::string(name));
  }

  std::string_view text_;
  const VarSpace& space_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const VarSpace& space) { return Parser(text, space).parse_all(); }

}  // namespace pfaffopt
