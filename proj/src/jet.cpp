#include "bracket_reach/jet.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>

namespace bracket_reach::fields {

namespace {

void enumerate(int dim, int remaining, std::vector<int>& current, int var,
               std::vector<std::vector<int>>& out) {
  if (var == dim) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[var] = e;
    enumerate(dim, remaining - e, current, var + 1, out);
  }
  current[var] = 0;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

JetSpace::JetSpace(int dim, int order) : dim_(dim), order_(order) {
  std::vector<std::vector<int>> all;
  std::vector<int> current(dim, 0);
  enumerate(dim, order, current, 0, all);
  // Graded order; within a degree, reverse-lexicographic so that x_0 comes
  // first among linear terms.
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    int da = 0, db = 0;
    for (int e : a) da += e;
    for (int e : b) db += e;
    if (da != db) return da < db;
    return a > b;
  });
  exponents_ = std::move(all);
  std::map<std::vector<int>, std::uint32_t> index;
  for (std::size_t k = 0; k < exponents_.size(); ++k) {
    index.emplace(exponents_[k], static_cast<std::uint32_t>(k));
    int d = 0;
    double w = 1.0;
    for (int e : exponents_[k]) {
      d += e;
      w *= factorial(e);
    }
    degrees_.push_back(d);
    weights_.push_back(w);
  }
  std::vector<int> sum(dim);
  for (std::size_t a = 0; a < exponents_.size(); ++a) {
    for (std::size_t b = 0; b < exponents_.size(); ++b) {
      if (degrees_[a] + degrees_[b] > order_) continue;
      for (int i = 0; i < dim; ++i) sum[i] = exponents_[a][i] + exponents_[b][i];
      products_.push_back({static_cast<std::uint32_t>(a),
                           static_cast<std::uint32_t>(b), index.at(sum)});
    }
  }
}

Jet::Jet(std::shared_ptr<const JetSpace> space, double value)
    : space_(std::move(space)), c_(space_->size(), 0.0) {
  c_[0] = value;
}

Jet Jet::variable(std::shared_ptr<const JetSpace> space, int i, double at) {
  Jet j(space, at);
  if (space->order() > 0) j.c_[space->linear_index(i)] = 1.0;
  return j;
}

bool Jet::is_zero() const {
  for (double c : c_)
    if (c != 0.0) return false;
  return true;
}

Jet Jet::compose(std::span<const double> derivs) const {
  const int order = space_->order();
  assert(static_cast<int>(derivs.size()) > order);
  Jet result(space_, derivs[0]);
  bool any = false;
  for (int n = 1; n <= order; ++n) any = any || derivs[n] != 0.0;
  if (!any) return result;
  Jet h = *this;
  h.c_[0] = 0.0;
  Jet power = h;
  double inv_fact = 1.0;
  for (int n = 1; n <= order; ++n) {
    inv_fact /= n;
    if (n > 1) power = power * h;
    if (derivs[n] == 0.0) continue;
    const double w = derivs[n] * inv_fact;
    for (std::size_t k = 1; k < c_.size(); ++k) result.c_[k] += w * power.c_[k];
  }
  return result;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& c : r.c_) c = -c;
  return r;
}

Jet operator+(const Jet& a, const Jet& b) {
  Jet r = a;
  for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] += b.c_[k];
  return r;
}

Jet operator-(const Jet& a, const Jet& b) {
  Jet r = a;
  for (std::size_t k = 0; k < r.c_.size(); ++k) r.c_[k] -= b.c_[k];
  return r;
}

Jet operator*(const Jet& a, const Jet& b) {
  Jet r(a.space_, 0.0);
  if (a.is_zero() || b.is_zero()) return r;
  for (const auto& p : a.space_->products()) r.c_[p.out] += a.c_[p.lhs] * b.c_[p.rhs];
  return r;
}

Jet operator/(const Jet& a, const Jet& b) {
  if (a.is_zero()) return Jet(a.space_, 0.0);
  const int order = a.space_->order();
  std::vector<double> d(order + 1);
  const double v = b.value();
  // d^n/du^n (1/u) = (-1)^n n! / u^{n+1}
  double f = 1.0;
  for (int n = 0; n <= order; ++n) {
    d[n] = ((n % 2) ? -f : f) / std::pow(v, n + 1);
    f *= (n + 1);
  }
  return a * b.compose(d);
}

}  // namespace bracket_reach::fields
