#pragma once

#include <optional>
#include <vector>

#include "bracket_reach/field.hpp"
#include "bracket_reach/parallel.hpp"

namespace bracket_reach::filtration {

inline constexpr double kDefaultRankTol = 1e-8;

/// Numeric rank of D^(-l) at one point for l = 1..max_length.
struct RankProfile {
  std::vector<int> ranks;
  /// sigma_rank / sigma_(rank+1) of the value matrix at each level
  /// (infinity when nothing follows the last retained singular value).
  std::vector<double> gaps;
};

/// Numeric rank of a set of column vectors with threshold rel_tol * sigma_max.
int numeric_rank(const Matrix& columns, double rel_tol, double* gap = nullptr);

RankProfile filtration_ranks(const fields::BracketTable& table, const Vector& x, int max_length,
                             double rank_tol = kDefaultRankTol);

struct MinimalDepth {
  std::optional<int> mu;  // empty: not stabilized within max_length
  bool uniform = false;
  int M = 0;  // common rank at mu (0 when not uniform or not stabilized)
};

/// Smallest l such that every sample's rank vector is constant on
/// [l, max_length], or reaches the ambient dimension at l.
MinimalDepth minimal_depth(const std::vector<RankProfile>& profiles, int dim);

struct Frame {
  std::vector<fields::BracketWord> words;
  /// Coordinates of the best M x M minor of the frame value matrix.
  std::vector<int> chart_rows;
  /// Signed determinant of that minor at the selection point.
  double det = 0.0;
};

/// Greedy choice of M words of length <= mu (length then lexicographic order),
/// accepting a word iff it raises the numeric rank at x.
Frame select_frame(const fields::BracketTable& table, const Vector& x, int mu, int M,
                   double rank_tol = kDefaultRankTol);

/// Values of the frame words at x as columns (N x M).
Matrix frame_values(const fields::BracketTable& table, const std::vector<fields::BracketWord>& words,
                    const Vector& x);

/// Best M x M minor (largest |det|) over row subsets of an N x M matrix.
struct Minor {
  std::vector<int> rows;
  double det = 0.0;
};
Minor best_minor(const Matrix& values);

struct FiltrationReport {
  std::vector<Vector> samples;
  std::vector<RankProfile> profiles;
  int max_length = 0;
  double rank_tol = kDefaultRankTol;
  MinimalDepth depth;
  bool bracket_generating = false;
  Vector frame_point;          // box centre
  std::optional<Frame> frame;  // selected at frame_point when uniform
};

/// Per-sample rank sweep (samples processed independently according to
/// `exec`), minimal depth and, for uniform types, the frame.
FiltrationReport analyze(const fields::SpecPtr& spec, const std::vector<Vector>& samples,
                         int max_length, double rank_tol = kDefaultRankTol,
                         Execution exec = Execution::kParallel);

/// Default sampling lattice: 5^min(N,4) points over the box (per-axis
/// count reduced so the total stays at that size for N > 4).
std::vector<Vector> default_samples(const fields::Box& box);

}  // namespace bracket_reach::filtration
