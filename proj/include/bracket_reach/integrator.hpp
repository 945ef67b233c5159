#pragma once

#include <vector>

#include "bracket_reach/field.hpp"

namespace bracket_reach::flows {

/// Default bound on the local error per unit time.
inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr double kMinStep = 1e-14;

/// Phi^X_t(x0) via adaptive Dormand-Prince 5(4) with local error per unit
/// time <= tol.  Negative t integrates backward.  Throws DomainEscape when
/// the trajectory leaves `box` and StepUnderflow when the step collapses.
Vector integrate_flow(const fields::SmoothField& field, const fields::Box& box, const Vector& x0,
                      double t, double tol = kDefaultTolerance);

struct FlowSample {
  double s;  // arc-local time
  Vector x;
};

/// As integrate_flow, additionally recording the state at `intervals` + 1
/// uniformly spaced times (steps are clipped to land on each sample time).
std::vector<FlowSample> integrate_flow_sampled(const fields::SmoothField& field,
                                               const fields::Box& box, const Vector& x0, double t,
                                               int intervals, double tol = kDefaultTolerance);

}  // namespace bracket_reach::flows
