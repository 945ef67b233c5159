#include "bracket_reach/expr_parser.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::fields {

namespace {

class Parser {
 public:
  Parser(const std::string& text, int dim, const std::map<std::string, double>& constants,
         int line, int column)
      : text_(text), dim_(dim), constants_(constants), line_(line), column_(column) {}

  Expr parse() {
    Expr e = expression();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, line_, column_ + static_cast<int>(pos_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  Expr expression() {
    Expr e = term();
    while (true) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    while (true) {
      if (accept('*'))
        e = e * unary();
      else if (accept('/'))
        e = e / unary();
      else
        return e;
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    const std::size_t at = pos_;
    Expr exponent = unary();
    if (!exponent.is_constant()) {
      pos_ = at;
      fail("exponent must be a constant");
    }
    return pow(base, exponent.constant_value());
  }

  double constant_argument() {
    const std::size_t at = pos_;
    Expr e = expression();
    if (!e.is_constant()) {
      pos_ = at;
      fail("argument must be a constant");
    }
    return e.constant_value();
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = expression();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const char* begin = text_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return constant(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      if (name == "bump") {
        const double r1 = constant_argument();
        expect(',');
        const double r2 = constant_argument();
        expect(',');
        Expr arg = expression();
        expect(')');
        if (!(r1 < r2)) {
          pos_ = start;
          fail("bump needs r1 < r2");
        }
        return bump(r1, r2, arg);
      }
      Expr arg = expression();
      expect(')');
      if (name == "sin") return sin(arg);
      if (name == "cos") return cos(arg);
      if (name == "exp") return exp(arg);
      if (name == "sqrt") return sqrt(arg);
      if (name == "abs") return abs(arg);
      pos_ = start;
      fail("unknown function '" + name + "'");
    }
    if (name.size() > 1 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int i = std::stoi(name.substr(1));
      if (i < 1 || i > dim_) {
        pos_ = start;
        fail("coordinate '" + name + "' out of range for dimension " + std::to_string(dim_));
      }
      return variable(i - 1);
    }
    if (auto it = constants_.find(name); it != constants_.end()) return constant(it->second);
    if (name == "pi") return constant(std::numbers::pi);
    pos_ = start;
    fail("unknown name '" + name + "'");
  }

  const std::string& text_;
  int dim_;
  const std::map<std::string, double>& constants_;
  int line_;
  int column_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expression(const std::string& text, int dim,
                      const std::map<std::string, double>& constants, int line, int column) {
  return Parser(text, dim, constants, line, column).parse();
}

}  // namespace bracket_reach::fields
