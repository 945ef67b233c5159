#pragma once

#include <string>
#include <vector>

#include "bracket_reach/field.hpp"
#include "bracket_reach/integrator.hpp"

namespace bracket_reach::flows {

/// Flow-time schedule sigma(t) of one atom of a flow program.
///   kPlainT      sigma(t) = sign * t
///   kConst       sigma(t) = value                      (frozen at `delta`)
///   kSignedRoot  sigma(t) = sign * (t + offset)^(1/root), needs t + offset >= 0
class Schedule {
 public:
  enum class Kind { kPlainT, kConst, kSignedRoot };

  static Schedule plain(double sign = 1.0);
  static Schedule constant(double value, double delta);
  static Schedule signed_root(double sign, int root, double offset);

  double operator()(double t) const;
  Schedule negated() const;

  Kind kind() const { return kind_; }
  double sign() const { return sign_; }
  int root() const { return root_; }
  double offset() const { return offset_; }
  double value() const { return value_; }
  /// The delta that produced a Const or SignedRoot schedule (0 for PlainT).
  double delta() const { return delta_; }
  std::string to_string() const;

  bool operator==(const Schedule&) const = default;

 private:
  Kind kind_ = Kind::kPlainT;
  double sign_ = 1.0;
  int root_ = 1;
  double offset_ = 0.0;
  double value_ = 0.0;
  double delta_ = 0.0;
};

struct FlowAtom {
  int generator;  // 1-based
  Schedule schedule;
  bool operator==(const FlowAtom&) const = default;
};

/// Ordered composition of generator flows.  Atoms are stored in execution
/// order: atoms()[0] acts first on the input point (the innermost factor).
class FlowProgram {
 public:
  FlowProgram() = default;
  FlowProgram(fields::SpecPtr spec, std::vector<FlowAtom> atoms);

  const std::vector<FlowAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  const fields::SpecPtr& spec() const { return spec_; }
  int dim() const { return spec_->dim; }

  /// This program followed by `later`.
  FlowProgram then(const FlowProgram& later) const;
  /// Every schedule replaced by the constant it takes at t.
  FlowProgram realized(double t) const;
  /// Flow durations sigma_j(t) in execution order.
  std::vector<double> durations(double t) const;

  bool operator==(const FlowProgram& other) const {
    return spec_ == other.spec_ && atoms_ == other.atoms_;
  }

 private:
  fields::SpecPtr spec_;
  std::vector<FlowAtom> atoms_;
};

/// Runs each atom's flow for sigma_j(t), innermost first.  Errors from the
/// integrator carry the offending atom index.
Vector apply_program(const FlowProgram& program, const Vector& x0, double t,
                     double tol = kDefaultTolerance);

/// Atoms reversed and each schedule negated.
FlowProgram invert_program(const FlowProgram& program);

}  // namespace bracket_reach::flows
