#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bracket_reach/jet.hpp"

namespace bracket_reach::fields {

enum class Op {
  kConst,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kPow,
  kSin,
  kCos,
  kExp,
  kSqrt,
  kAbs,
  kSign,
  kBump,
};

struct Node;

/// Immutable scalar expression over the coordinates x1..xN.  Copies share
/// structure; all constructors simplify trivially (constant folding, zero and
/// one absorption) so derivative trees stay small.
class Expr {
 public:
  Expr();  // the constant 0
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  const Node& node() const { return *node_; }
  const Node* get() const { return node_.get(); }

  bool is_constant() const;
  bool is_constant(double v) const;
  double constant_value() const;

 private:
  std::shared_ptr<const Node> node_;
};

struct Node {
  Op op = Op::kConst;
  double value = 0.0;  // constant value, or Pow exponent
  int index = 0;       // variable index, or Bump derivative order
  double r1 = 0.0;     // Bump inner radius
  double r2 = 0.0;     // Bump outer radius
  Expr a{nullptr};
  Expr b{nullptr};
};

Expr constant(double v);
/// Zero-based coordinate index: variable(0) is x1.
Expr variable(int i);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

inline Expr operator+(const Expr& a, double b) { return a + constant(b); }
inline Expr operator+(double a, const Expr& b) { return constant(a) + b; }
inline Expr operator-(const Expr& a, double b) { return a - constant(b); }
inline Expr operator-(double a, const Expr& b) { return constant(a) - b; }
inline Expr operator*(const Expr& a, double b) { return a * constant(b); }
inline Expr operator*(double a, const Expr& b) { return constant(a) * b; }
inline Expr operator/(const Expr& a, double b) { return a / constant(b); }
inline Expr operator/(double a, const Expr& b) { return constant(a) / b; }

Expr pow(const Expr& base, double exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);
Expr sqrt(const Expr& a);
Expr abs(const Expr& a);
Expr sign(const Expr& a);
/// Smooth radial cut-off: 1 for arg <= r1, 0 for arg >= r2, C-infinity in
/// between.  `derivative_order` > 0 denotes the corresponding derivative of
/// the profile with respect to its argument.
Expr bump(double r1, double r2, const Expr& arg, int derivative_order = 0);

/// Exact partial derivative with respect to coordinate i (zero-based).
Expr derivative(const Expr& e, int i);

double evaluate(const Expr& e, std::span<const double> x);
Jet evaluate(const Expr& e, std::span<const Jet> x);

/// Number of distinct nodes in the expression DAG.
std::size_t node_count(const Expr& e);
std::string to_string(const Expr& e);

/// k-th derivative of the bump profile with respect to its argument.
double bump_profile(double r1, double r2, int k, double arg);

}  // namespace bracket_reach::fields
