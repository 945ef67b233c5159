#pragma once

#include <optional>
#include <vector>

#include "bracket_reach/field.hpp"
#include "bracket_reach/flow_program.hpp"
#include "bracket_reach/parallel.hpp"

namespace bracket_reach::commutator {

/// Number of flows in the commutator program of a length-r word:
/// 2^r + 2^(r-1) - 2.
long long flow_count(int r);

/// G_(k,rest),t = Phi^Xk_-t o G_rest,t o Phi^Xk_t o (G_rest,t)^-1, with
/// G_(k),t = Phi^Xk_t.  All schedules are PlainT.
flows::FlowProgram build_G(const fields::SpecPtr& spec, const fields::BracketWord& w);

/// G with t replaced by t^(1/r); defined for t >= 0.
flows::FlowProgram build_g(const fields::SpecPtr& spec, const fields::BracketWord& w);

/// f_t = (g_delta)^-1 o g_(t+delta): the shifted family, smooth in t on
/// (-delta/2, delta/2) and the identity at t = 0.
flows::FlowProgram build_f(const fields::SpecPtr& spec, const fields::BracketWord& w,
                           double delta);

/// The delta a program from build_f was built with (0 if none).
double program_delta(const flows::FlowProgram& f);

/// Default finite-difference step for a word of length r.
double default_taylor_step(int r);

struct TaylorOrder {
  int order = 0;
  Vector derivative;    // d^m/dt^m G_(w,t)(x0) at t = 0
  double magnitude = 0.0;  // max-abs of `derivative`
  Vector target;        // 0 below r, r! X_w(x0) at r
  double error = 0.0;   // max-abs(derivative - target) / (1 + max-abs(r! X_w(x0)))
  double tolerance = 0.0;
  bool pass = false;
};

struct TaylorReport {
  fields::BracketWord word;
  Vector x0;
  double h = 0.0;
  Vector bracket;  // X_w(x0)
  double scale = 1.0;  // 1 + max-abs(r! X_w(x0))
  std::vector<TaylorOrder> orders;
  bool passed() const;
};

inline constexpr double kVanishingTolerance = 1e-3;
inline constexpr double kLeadingTolerance = 1e-2;

/// Finite-difference check that the first r-1 t-derivatives of G_(w,t)(x0)
/// vanish at t = 0 and the r-th equals r! X_w(x0).
TaylorReport verify_taylor(const fields::SpecPtr& spec, const fields::BracketWord& w,
                           const Vector& x0, std::optional<double> h = std::nullopt,
                           double tol = flows::kDefaultTolerance,
                           Execution exec = Execution::kParallel);

/// d/dt f_t(x0) at t = 0 for a program from build_f, by a central
/// difference with step delta/8.
Vector approx_velocity(const flows::FlowProgram& f, const Vector& x0,
                       double tol = flows::kDefaultTolerance,
                       Execution exec = Execution::kParallel);

}  // namespace bracket_reach::commutator
