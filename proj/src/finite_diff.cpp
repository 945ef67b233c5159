#include "bracket_reach/finite_diff.hpp"

#include <cmath>
#include <map>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::numeric {

std::vector<double> fornberg_weights(int m, std::span<const double> nodes) {
  const int n = static_cast<int>(nodes.size()) - 1;
  if (m < 0 || n < m) throw InvalidArgument("fornberg_weights: need more nodes than the order");
  // c[j][k]: weight of node j for derivative k.
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = nodes[0];
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = nodes[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = nodes[i] - nodes[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = c[j][m];
  return w;
}

CentralStencil central_stencil(int derivative, int accuracy) {
  if (derivative < 1 || accuracy < 2 || accuracy % 2)
    throw InvalidArgument("central_stencil: derivative >= 1 and even accuracy >= 2 required");
  const int points = 2 * ((derivative + 1) / 2) - 1 + accuracy;
  const int k = (points - 1) / 2;
  std::vector<double> nodes;
  for (int j = -k; j <= k; ++j) nodes.push_back(static_cast<double>(j));
  return {derivative, accuracy, k, fornberg_weights(derivative, nodes)};
}

Matrix curve_derivatives(const std::function<Vector(double)>& curve, int max_order, double h,
                         Execution exec) {
  if (max_order < 1) throw InvalidArgument("curve_derivatives: max_order must be >= 1");
  if (!(h > 0.0)) throw InvalidArgument("curve_derivatives: step must be positive");
  constexpr int kAccuracy = 4;
  std::vector<CentralStencil> stencils;
  for (int m = 1; m <= max_order; ++m) stencils.push_back(central_stencil(m, kAccuracy));

  // Sample offsets in units of h/2, shared by both Richardson levels.
  std::map<int, std::size_t> slot;
  for (const auto& st : stencils) {
    for (int j = -st.half_width; j <= st.half_width; ++j) {
      slot.emplace(2 * j, 0);
      if (st.derivative >= 3) slot.emplace(j, 0);
    }
  }
  std::vector<int> halves;
  for (auto& [key, index] : slot) {
    index = halves.size();
    halves.push_back(key);
  }
  std::vector<Vector> values(halves.size());
  for_each_index(halves.size(), exec,
                 [&](std::size_t i) { values[i] = curve(0.5 * h * halves[i]); });

  const auto n = values.front().size();
  Matrix out(n, max_order);
  for (const auto& st : stencils) {
    auto apply = [&](int scale) {  // scale 2: spacing h, scale 1: spacing h/2
      Vector acc = Vector::Zero(n);
      for (int j = -st.half_width; j <= st.half_width; ++j) {
        const double w = st.weights[static_cast<std::size_t>(j + st.half_width)];
        if (w != 0.0) acc += w * values[slot.at(scale * j)];
      }
      return Vector(acc / std::pow(0.5 * scale * h, st.derivative));
    };
    Vector d = apply(2);
    if (st.derivative >= 3) {
      const double f = std::pow(2.0, kAccuracy);
      d = (f * apply(1) - d) / (f - 1.0);
    }
    out.col(st.derivative - 1) = d;
  }
  return out;
}

Vector curve_velocity(const std::function<Vector(double)>& curve, double h, Execution exec) {
  return curve_derivatives(curve, 1, h, exec).col(0);
}

}  // namespace bracket_reach::numeric
