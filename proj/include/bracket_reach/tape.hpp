#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bracket_reach/expr.hpp"
#include "bracket_reach/jet.hpp"

namespace bracket_reach::fields {

/// Linearised form of a set of expressions: every distinct DAG node becomes
/// one instruction, evaluated once per call in topological order.
class Tape {
 public:
  explicit Tape(std::span<const Expr> roots);

  std::size_t instruction_count() const { return code_.size(); }
  std::size_t output_count() const { return outputs_.size(); }

  void run(std::span<const double> x, std::span<double> out) const;
  void run(std::span<const Jet> x, std::span<Jet> out) const;

 private:
  struct Instruction {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    int index = 0;
    double value = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
  };
  template <typename T>
  void execute(std::span<const T> x, std::vector<T>& slots) const;

  std::vector<Instruction> code_;
  std::vector<std::uint32_t> outputs_;
};

/// Derivatives k..k+count of the bump profile at `arg`.
std::vector<double> bump_profile_series(double r1, double r2, int k, int count, double arg);

}  // namespace bracket_reach::fields
