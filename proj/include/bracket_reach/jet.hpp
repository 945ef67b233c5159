#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace bracket_reach::fields {

/// Monomial layout for truncated multivariate Taylor polynomials of a fixed
/// dimension and total order.  Coefficient 0 is the constant term; the
/// layout is graded (all degree-d monomials precede degree d+1).
class JetSpace {
 public:
  JetSpace(int dim, int order);

  int dim() const { return dim_; }
  int order() const { return order_; }
  std::size_t size() const { return exponents_.size(); }

  const std::vector<int>& exponents(std::size_t k) const { return exponents_[k]; }
  int degree(std::size_t k) const { return degrees_[k]; }
  /// Product of factorials of the exponents (alpha!).
  double factorial_weight(std::size_t k) const { return weights_[k]; }
  /// Coefficient index of the linear monomial x_i.
  std::size_t linear_index(int i) const { return static_cast<std::size_t>(1 + i); }

  struct Product {
    std::uint32_t lhs, rhs, out;
  };
  const std::vector<Product>& products() const { return products_; }

 private:
  int dim_;
  int order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<double> weights_;
  std::vector<Product> products_;
};

/// Truncated Taylor expansion of a scalar function around a point.
/// Arithmetic follows the "strong zero" convention: multiplying by an
/// identically-zero jet yields zero even if the other operand is not finite.
class Jet {
 public:
  Jet() = default;
  Jet(std::shared_ptr<const JetSpace> space, double value);

  static Jet variable(std::shared_ptr<const JetSpace> space, int i, double at);

  const JetSpace& space() const { return *space_; }
  const std::shared_ptr<const JetSpace>& space_ptr() const { return space_; }
  double value() const { return c_[0]; }
  std::span<const double> coefficients() const { return c_; }
  /// Partial derivative d^alpha f for the monomial at index k.
  double partial(std::size_t k) const { return c_[k] * space_->factorial_weight(k); }
  bool is_zero() const;

  /// f(this) given f and its derivatives at value(): derivs[n] = f^(n)(value()).
  /// derivs must hold at least order()+1 entries.
  Jet compose(std::span<const double> derivs) const;

  Jet operator-() const;
  friend Jet operator+(const Jet& a, const Jet& b);
  friend Jet operator-(const Jet& a, const Jet& b);
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

}  // namespace bracket_reach::fields
