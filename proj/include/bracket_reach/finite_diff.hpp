#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bracket_reach/field.hpp"
#include "bracket_reach/parallel.hpp"

namespace bracket_reach::numeric {

/// Weights w_k such that sum_k w_k f(nodes[k]) approximates f^(m)(0)
/// (Fornberg's recursion).
std::vector<double> fornberg_weights(int m, std::span<const double> nodes);

/// Central stencil on offsets -K..K (in units of h) for the m-th derivative
/// with the given even accuracy order.
struct CentralStencil {
  int derivative;
  int accuracy;
  int half_width;
  std::vector<double> weights;  // index j + half_width for offset j
};
CentralStencil central_stencil(int derivative, int accuracy);

/// Derivatives of order 1..max_order at t = 0 of a curve g: R -> R^N.
/// Orders <= 2 use the 4th-order five-point stencils; higher orders use
/// 4th-order central stencils at h and h/2 combined by one Richardson step.
/// Column m-1 of the result holds the m-th derivative.  The curve samples
/// are independent and are evaluated according to `exec`.
Matrix curve_derivatives(const std::function<Vector(double)>& curve, int max_order, double h,
                         Execution exec = Execution::kParallel);

/// First derivative at 0 with the five-point 4th-order stencil.
Vector curve_velocity(const std::function<Vector(double)>& curve, double h,
                      Execution exec = Execution::kParallel);

}  // namespace bracket_reach::numeric
