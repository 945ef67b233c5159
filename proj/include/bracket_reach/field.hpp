#pragma once

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "bracket_reach/expr.hpp"
#include "bracket_reach/tape.hpp"

namespace bracket_reach {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace fields {

/// Vector field on R^N given by one expression per coordinate component.
/// The Jacobian (entry (i, j) = dX^i/dx^j) is derived symbolically on first
/// use; instances are cheap to copy and safe to evaluate concurrently.
class SmoothField {
 public:
  SmoothField() = default;
  explicit SmoothField(std::vector<Expr> components);

  int dim() const { return state_ ? static_cast<int>(state_->components.size()) : 0; }
  const std::vector<Expr>& components() const { return state_->components; }

  Vector operator()(const Vector& x) const;
  void evaluate(std::span<const double> x, std::span<double> out) const;
  Matrix jacobian(const Vector& x) const;
  /// Row-major N*N symbolic Jacobian.
  const std::vector<Expr>& jacobian_exprs() const;

  /// Total node count of the component expressions.
  std::size_t complexity() const;

 private:
  struct State {
    std::vector<Expr> components;
    Tape tape;
    mutable std::once_flag jacobian_once;
    mutable std::vector<Expr> jacobian;
    mutable std::unique_ptr<Tape> jacobian_tape;
    explicit State(std::vector<Expr> c);
  };
  const State& ensure_jacobian() const;

  std::shared_ptr<const State> state_;
};

/// Index tuple (i1, ..., ir), 1-based, naming the right-nested bracket
/// [X_i1, [X_i2, ... [X_i(r-1), X_ir] ...]].
class BracketWord {
 public:
  BracketWord() = default;
  explicit BracketWord(std::vector<int> indices);
  BracketWord(std::initializer_list<int> indices) : BracketWord(std::vector<int>(indices)) {}

  /// Parses "1,2,3" (also accepts "(1,2,3)").
  static BracketWord parse(const std::string& text);

  int length() const { return static_cast<int>(indices_.size()); }
  int operator[](int k) const { return indices_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& indices() const { return indices_; }
  int first() const { return indices_.front(); }
  BracketWord tail() const;
  std::string to_string() const;

  /// Throws IndexOutOfRange unless every index lies in [1, generators].
  void validate(int generators) const;

  auto operator<=>(const BracketWord&) const = default;

 private:
  std::vector<int> indices_;
};

/// Axis-aligned closed box, the neighbourhood the local constructions live in.
struct Box {
  Vector lower;
  Vector upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vector& x) const;
  bool contains(std::span<const double> x) const;
  /// Distance from x to the boundary (negative outside).
  double margin(const Vector& x) const;
  /// Box scaled about its centre by `factor`.
  Box shrunk(double factor) const;
  /// Lattice with `per_axis` points per coordinate (endpoints included).
  std::vector<Vector> grid(int per_axis) const;
};

/// Generators X1..Xp on a common domain box.
struct DistributionSpec {
  std::string name;
  int dim = 0;
  std::vector<SmoothField> generators;
  Box box;

  DistributionSpec() = default;
  DistributionSpec(std::string name, std::vector<SmoothField> generators, Box box);
  int generator_count() const { return static_cast<int>(generators.size()); }
  const SmoothField& generator(int k) const;  // 1-based
};

using SpecPtr = std::shared_ptr<const DistributionSpec>;

/// [X, Y] = JY * X - JX * Y.
SmoothField lie_bracket(const SmoothField& x, const SmoothField& y);

/// X_(i1..ir).  Length one returns the generator itself.
SmoothField iterated_bracket(const DistributionSpec& spec, const BracketWord& word);

/// Memoised right-nested brackets for one spec; shares sub-brackets between
/// words with a common tail.  Thread-safe.
class BracketTable {
 public:
  explicit BracketTable(SpecPtr spec) : spec_(std::move(spec)) {}
  const SmoothField& get(const BracketWord& word) const;
  const DistributionSpec& spec() const { return *spec_; }
  const SpecPtr& spec_ptr() const { return spec_; }

 private:
  SpecPtr spec_;
  mutable std::mutex mutex_;
  mutable std::map<BracketWord, std::unique_ptr<SmoothField>> cache_;
};

/// All right-nested words of length 1..max_length over p generators,
/// ordered by length then lexicographically.
std::vector<BracketWord> enumerate_words(int generators, int max_length);

}  // namespace fields
}  // namespace bracket_reach
