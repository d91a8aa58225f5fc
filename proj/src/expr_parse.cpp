#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>

#include "alg/expr.hpp"

// Grammar (see docs/expression-grammar.md):
//
//   expression := term { ('+' | '-') term }
//   term       := factor { ('*' | '/') factor }
//   factor     := '-' factor | power
//   power      := atom { '^' exponent }
//   exponent   := ['-'] integer | '(' ['-'] integer ')'
//   atom       := number | coordinate | function '(' expression ')'
//              | '(' expression ')'
//   function   := 'sin' | 'cos' | 'exp'
//
// Numbers are unsigned decimal literals with optional fraction and optional
// e/E exponent.  Coordinates must be declared by the caller.

namespace alg {

namespace {

class Parser {
 public:
  Parser(std::string_view text, std::span<const std::string> coords)
      : storage_(text), text_(storage_), coords_(coords) {}

  Expr run() {
    Expr e = expression();
    skip_spaces();
    if (pos_ != text_.size()) {
      throw ParseError("unexpected trailing input", pos_);
    }
    return e;
  }

 private:
  void skip_spaces() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool consume(char c) {
    skip_spaces();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_spaces();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (consume('+')) {
        e = Expr::add(std::move(e), term());
      } else if (consume('-')) {
        e = Expr::sub(std::move(e), term());
      } else {
        return e;
      }
    }
  }

  Expr term() {
    Expr e = factor();
    for (;;) {
      if (consume('*')) {
        e = Expr::mul(std::move(e), factor());
      } else if (consume('/')) {
        e = Expr::div(std::move(e), factor());
      } else {
        return e;
      }
    }
  }

  Expr factor() {
    if (consume('-')) return Expr::neg(factor());
    return power();
  }

  Expr power() {
    Expr e = atom();
    while (consume('^')) {
      e = Expr::pow(std::move(e), exponent());
    }
    return e;
  }

  int exponent() {
    skip_spaces();
    bool parenthesized = consume('(');
    skip_spaces();
    bool negative = consume('-');
    skip_spaces();
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    if (pos_ == start) {
      throw ParseError("exponent must be an integer literal", start);
    }
    if (pos_ < text_.size() &&
        (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      throw ParseError("exponent must be an integer literal", start);
    }
    long v = std::strtol(std::string(text_.substr(start, pos_ - start)).c_str(),
                         nullptr, 10);
    if (parenthesized && !consume(')')) {
      throw ParseError("expected ')' after exponent", pos_);
    }
    return static_cast<int>(negative ? -v : v);
  }

  Expr atom() {
    skip_spaces();
    if (pos_ >= text_.size()) {
      throw ParseError("unexpected end of input", pos_);
    }
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return number();
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      return identifier();
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    // Scan the decimal token by hand; strtod alone would also accept hex
    // floats and signs, which are not part of the grammar.
    std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      frac_digits = digits();
    }
    if (int_digits == 0 && frac_digits == 0) {
      throw ParseError("malformed number", start);
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (digits() == 0) pos_ = mark;  // the 'e' was not an exponent marker
    }
    std::string token(text_.substr(start, pos_ - start));
    return Expr::constant(std::strtod(token.c_str(), nullptr));
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!consume('(')) {
        throw ParseError("expected '(' after function name '" + name + "'",
                         pos_);
      }
      Expr arg = expression();
      if (!consume(')')) throw ParseError("expected ')'", pos_);
      if (name == "sin") return Expr::sin(std::move(arg));
      if (name == "cos") return Expr::cos(std::move(arg));
      return Expr::exp(std::move(arg));
    }
    for (const std::string& coord : coords_) {
      if (coord == name) return Expr::variable(std::move(name));
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string storage_;
  std::string_view text_;
  std::span<const std::string> coords_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view text, std::span<const std::string> coords) {
  return Parser(text, coords).run();
}

}  // namespace alg
