#include "bracket_reach/expr.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "bracket_reach/tape.hpp"

namespace bracket_reach::fields {

namespace {

Expr make(Node n) { return Expr(std::make_shared<const Node>(std::move(n))); }

Expr unary(Op op, const Expr& a) {
  Node n;
  n.op = op;
  n.a = a;
  return make(std::move(n));
}

Expr binary(Op op, const Expr& a, const Expr& b) {
  Node n;
  n.op = op;
  n.a = a;
  n.b = b;
  return make(std::move(n));
}

bool is_integer(double v) { return std::floor(v) == v && std::abs(v) < 1e9; }

// Coefficients of P_n where psi^(n)(t) = P_n(1/t) exp(-1/t) for
// psi(t) = exp(-1/t), t > 0.  P_{n+1}(u) = u^2 (P_n(u) - P_n'(u)).
const std::vector<double>& psi_polynomial(int n) {
  static const std::vector<std::vector<double>> table = [] {
    std::vector<std::vector<double>> t{{1.0}};
    for (int k = 0; k < 40; ++k) {
      const auto& p = t.back();
      std::vector<double> next(p.size() + 2, 0.0);
      for (std::size_t i = 0; i < p.size(); ++i) {
        next[i + 2] += p[i];
        if (i > 0) next[i + 1] -= static_cast<double>(i) * p[i];
      }
      t.push_back(std::move(next));
    }
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

double psi_derivative(int n, double t) {
  if (t <= 0.0) return 0.0;
  const double u = 1.0 / t;
  const double log_u = std::log(u);
  double sum = 0.0;
  const auto& p = psi_polynomial(n);
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] == 0.0) continue;
    const double mag = std::exp(std::log(std::abs(p[m])) + m * log_u - u);
    sum += p[m] > 0 ? mag : -mag;
  }
  return sum;
}

// Taylor coefficients S^(j)(t0)/j!, j = 0..n, of the smooth step
// S(t) = psi(t) / (psi(t) + psi(1 - t)).
std::vector<double> smoothstep_series(double t0, int n) {
  std::vector<double> s(n + 1, 0.0);
  if (t0 >= 1.0) {
    s[0] = 1.0;
    return s;
  }
  if (t0 <= 0.0) return s;
  std::vector<double> a(n + 1), den(n + 1);
  double fact = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) fact *= j;
    a[j] = psi_derivative(j, t0) / fact;
    const double b = psi_derivative(j, 1.0 - t0) / fact;
    den[j] = a[j] + ((j % 2) ? -b : b);
  }
  for (int j = 0; j <= n; ++j) {
    double acc = a[j];
    for (int i = 1; i <= j; ++i) acc -= den[i] * s[j - i];
    s[j] = acc / den[0];
  }
  return s;
}

}  // namespace

double bump_profile(double r1, double r2, int k, double arg) {
  const double width = r2 - r1;
  const double t = (r2 - arg) / width;
  const auto s = smoothstep_series(t, k);
  double fact = 1.0;
  for (int i = 2; i <= k; ++i) fact *= i;
  return s[k] * fact * std::pow(-1.0 / width, k);
}

std::vector<double> bump_profile_series(double r1, double r2, int k, int count, double arg) {
  const double width = r2 - r1;
  const double t = (r2 - arg) / width;
  const auto s = smoothstep_series(t, k + count);
  std::vector<double> d(count + 1);
  for (int n = 0; n <= count; ++n) {
    const int m = k + n;
    double fact = 1.0;
    for (int i = 2; i <= m; ++i) fact *= i;
    d[n] = s[m] * fact * std::pow(-1.0 / width, m);
  }
  return d;
}

Expr::Expr() {
  static const auto zero = std::make_shared<const Node>();
  node_ = zero;
}

bool Expr::is_constant() const { return node_->op == Op::kConst; }
bool Expr::is_constant(double v) const { return is_constant() && node_->value == v; }
double Expr::constant_value() const { return node_->value; }

Expr constant(double v) {
  Node n;
  n.op = Op::kConst;
  n.value = v;
  return make(std::move(n));
}

Expr variable(int i) {
  Node n;
  n.op = Op::kVar;
  n.index = i;
  return make(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() + b.constant_value());
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.node().op == Op::kNeg) return a - b.node().a;
  return binary(Op::kAdd, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() - b.constant_value());
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (a.get() == b.get()) return constant(0.0);
  if (b.node().op == Op::kNeg) return a + b.node().a;
  return binary(Op::kSub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return constant(0.0);
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() * b.constant_value());
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  if (b.is_constant()) return b * a;
  if (a.node().op == Op::kNeg) return -(a.node().a * b);
  if (b.node().op == Op::kNeg) return -(a * b.node().a);
  if (a.is_constant() && b.node().op == Op::kMul && b.node().a.is_constant())
    return constant(a.constant_value() * b.node().a.constant_value()) * b.node().b;
  return binary(Op::kMul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return constant(0.0);
  if (a.is_constant() && b.is_constant()) return constant(a.constant_value() / b.constant_value());
  if (b.is_constant(1.0)) return a;
  if (b.is_constant()) return constant(1.0 / b.constant_value()) * a;
  return binary(Op::kDiv, a, b);
}

Expr operator-(const Expr& a) {
  if (a.is_constant()) return constant(-a.constant_value());
  if (a.node().op == Op::kNeg) return a.node().a;
  return unary(Op::kNeg, a);
}

Expr pow(const Expr& base, double exponent) {
  if (exponent == 0.0) return constant(1.0);
  if (exponent == 1.0) return base;
  if (base.is_constant()) return constant(std::pow(base.constant_value(), exponent));
  if (base.node().op == Op::kPow && is_integer(exponent) && is_integer(base.node().value))
    return pow(base.node().a, exponent * base.node().value);
  Node n;
  n.op = Op::kPow;
  n.value = exponent;
  n.a = base;
  return make(std::move(n));
}

Expr sin(const Expr& a) {
  if (a.is_constant()) return constant(std::sin(a.constant_value()));
  return unary(Op::kSin, a);
}

Expr cos(const Expr& a) {
  if (a.is_constant()) return constant(std::cos(a.constant_value()));
  return unary(Op::kCos, a);
}

Expr exp(const Expr& a) {
  if (a.is_constant()) return constant(std::exp(a.constant_value()));
  return unary(Op::kExp, a);
}

Expr sqrt(const Expr& a) {
  if (a.is_constant()) return constant(std::sqrt(a.constant_value()));
  return unary(Op::kSqrt, a);
}

Expr abs(const Expr& a) {
  if (a.is_constant()) return constant(std::abs(a.constant_value()));
  return unary(Op::kAbs, a);
}

Expr sign(const Expr& a) {
  if (a.is_constant()) {
    const double v = a.constant_value();
    return constant(v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0));
  }
  return unary(Op::kSign, a);
}

Expr bump(double r1, double r2, const Expr& arg, int derivative_order) {
  if (arg.is_constant()) return constant(bump_profile(r1, r2, derivative_order, arg.constant_value()));
  Node n;
  n.op = Op::kBump;
  n.index = derivative_order;
  n.r1 = r1;
  n.r2 = r2;
  n.a = arg;
  return make(std::move(n));
}

Expr derivative(const Expr& e, int i) {
  std::unordered_map<const Node*, Expr> memo;
  std::function<Expr(const Expr&)> d = [&](const Expr& x) -> Expr {
    if (auto it = memo.find(x.get()); it != memo.end()) return it->second;
    const Node& n = x.node();
    Expr r;
    switch (n.op) {
      case Op::kConst:
        r = constant(0.0);
        break;
      case Op::kVar:
        r = constant(n.index == i ? 1.0 : 0.0);
        break;
      case Op::kAdd:
        r = d(n.a) + d(n.b);
        break;
      case Op::kSub:
        r = d(n.a) - d(n.b);
        break;
      case Op::kMul:
        r = d(n.a) * n.b + n.a * d(n.b);
        break;
      case Op::kDiv: {
        const Expr da = d(n.a);
        const Expr db = d(n.b);
        r = da / n.b - (n.a * db) / pow(n.b, 2.0);
        break;
      }
      case Op::kNeg:
        r = -d(n.a);
        break;
      case Op::kPow:
        r = (constant(n.value) * pow(n.a, n.value - 1.0)) * d(n.a);
        break;
      case Op::kSin:
        r = cos(n.a) * d(n.a);
        break;
      case Op::kCos:
        r = -(sin(n.a) * d(n.a));
        break;
      case Op::kExp:
        r = x * d(n.a);
        break;
      case Op::kSqrt:
        r = (constant(0.5) * pow(n.a, -0.5)) * d(n.a);
        break;
      case Op::kAbs:
        r = sign(n.a) * d(n.a);
        break;
      case Op::kSign:
        r = constant(0.0);
        break;
      case Op::kBump:
        r = bump(n.r1, n.r2, n.a, n.index + 1) * d(n.a);
        break;
    }
    memo.emplace(x.get(), r);
    return r;
  };
  return d(e);
}

double evaluate(const Expr& e, std::span<const double> x) {
  const Tape tape(std::span<const Expr>(&e, 1));
  double out = 0.0;
  tape.run(x, std::span<double>(&out, 1));
  return out;
}

Jet evaluate(const Expr& e, std::span<const Jet> x) {
  const Tape tape(std::span<const Expr>(&e, 1));
  Jet out;
  tape.run(x, std::span<Jet>(&out, 1));
  return out;
}

std::size_t node_count(const Expr& e) {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{e.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->op == Op::kConst || n->op == Op::kVar) continue;
    stack.push_back(n->a.get());
    if (n->op >= Op::kAdd && n->op <= Op::kDiv) stack.push_back(n->b.get());
  }
  return seen.size();
}

std::string to_string(const Expr& e) {
  std::ostringstream os;
  os.precision(12);
  std::function<void(const Expr&)> p = [&](const Expr& x) {
    const Node& n = x.node();
    auto bin = [&](const char* sym) {
      os << '(';
      p(n.a);
      os << ' ' << sym << ' ';
      p(n.b);
      os << ')';
    };
    auto fn = [&](const char* name) {
      os << name << '(';
      p(n.a);
      os << ')';
    };
    switch (n.op) {
      case Op::kConst:
        os << n.value;
        break;
      case Op::kVar:
        os << 'x' << (n.index + 1);
        break;
      case Op::kAdd:
        bin("+");
        break;
      case Op::kSub:
        bin("-");
        break;
      case Op::kMul:
        bin("*");
        break;
      case Op::kDiv:
        bin("/");
        break;
      case Op::kNeg:
        os << "(-";
        p(n.a);
        os << ')';
        break;
      case Op::kPow:
        os << '(';
        p(n.a);
        os << ")^" << n.value;
        break;
      case Op::kSin:
        fn("sin");
        break;
      case Op::kCos:
        fn("cos");
        break;
      case Op::kExp:
        fn("exp");
        break;
      case Op::kSqrt:
        fn("sqrt");
        break;
      case Op::kAbs:
        fn("abs");
        break;
      case Op::kSign:
        fn("sign");
        break;
      case Op::kBump:
        os << "bump" << (n.index > 0 ? "_d" + std::to_string(n.index) : "") << '(' << n.r1
           << ", " << n.r2 << ", ";
        p(n.a);
        os << ')';
        break;
    }
  };
  p(e);
  return os.str();
}

}  // namespace bracket_reach::fields
