#include "bracket_reach/filtration.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <limits>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::filtration {

using fields::BracketWord;

int numeric_rank(const Matrix& columns, double rel_tol, double* gap) {
  const double inf = std::numeric_limits<double>::infinity();
  if (columns.size() == 0) {
    if (gap) *gap = inf;
    return 0;
  }
  Eigen::JacobiSVD<Matrix> svd(columns);
  const auto& s = svd.singularValues();
  int rank = 0;
  if (s[0] > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] > rel_tol * s[0]) ++rank;
  if (gap) {
    if (rank == 0)
      *gap = s[0] > 0.0 ? 0.0 : inf;
    else if (rank >= s.size() || s[rank] == 0.0)
      *gap = inf;
    else
      *gap = s[rank - 1] / s[rank];
  }
  return rank;
}

RankProfile filtration_ranks(const fields::BracketTable& table, const Vector& x, int max_length,
                             double rank_tol) {
  const auto& spec = table.spec();
  if (max_length < 1) throw InvalidArgument("filtration_ranks: max_length must be >= 1");
  if (x.size() != spec.dim) throw DimensionMismatch("filtration_ranks: point dimension");
  if (!(rank_tol > 0.0)) throw InvalidArgument("filtration_ranks: rank_tol must be positive");
  const auto words = fields::enumerate_words(spec.generator_count(), max_length);
  Matrix values(spec.dim, static_cast<Eigen::Index>(words.size()));
  for (std::size_t i = 0; i < words.size(); ++i)
    values.col(static_cast<Eigen::Index>(i)) = table.get(words[i])(x);

  RankProfile out;
  Eigen::Index used = 0;
  for (int len = 1; len <= max_length; ++len) {
    while (used < static_cast<Eigen::Index>(words.size()) &&
           words[static_cast<std::size_t>(used)].length() <= len)
      ++used;
    double gap = 0.0;
    out.ranks.push_back(numeric_rank(values.leftCols(used), rank_tol, &gap));
    out.gaps.push_back(gap);
  }
  return out;
}

MinimalDepth minimal_depth(const std::vector<RankProfile>& profiles, int dim) {
  if (profiles.empty()) throw InvalidArgument("minimal_depth: no samples");
  MinimalDepth out;
  int mu = 1;
  for (const auto& p : profiles) {
    const int L = static_cast<int>(p.ranks.size());
    std::optional<int> first;
    for (int l = 1; l <= L && !first; ++l) {
      const int r = p.ranks[static_cast<std::size_t>(l - 1)];
      if (r == dim) {
        first = l;
        break;
      }
      // Constancy on [l, L] only says something when the window has room.
      if (l == L) break;
      bool constant = true;
      for (int k = l; k < L; ++k) constant = constant && p.ranks[static_cast<std::size_t>(k)] == r;
      if (constant) first = l;
    }
    if (!first) return out;
    mu = std::max(mu, *first);
  }
  out.mu = mu;
  const int M = profiles.front().ranks[static_cast<std::size_t>(mu - 1)];
  out.uniform = true;
  for (const auto& p : profiles)
    out.uniform = out.uniform && p.ranks[static_cast<std::size_t>(mu - 1)] == M;
  out.M = out.uniform ? M : 0;
  return out;
}

Matrix frame_values(const fields::BracketTable& table, const std::vector<BracketWord>& words,
                    const Vector& x) {
  Matrix v(table.spec().dim, static_cast<Eigen::Index>(words.size()));
  for (std::size_t i = 0; i < words.size(); ++i)
    v.col(static_cast<Eigen::Index>(i)) = table.get(words[i])(x);
  return v;
}

Minor best_minor(const Matrix& values) {
  const int n = static_cast<int>(values.rows());
  const int m = static_cast<int>(values.cols());
  if (m == 0 || m > n) throw InvalidArgument("best_minor: need 1 <= M <= N columns");
  Minor best;
  std::vector<int> rows(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) rows[static_cast<std::size_t>(i)] = i;
  Matrix sub(m, m);
  while (true) {
    for (int i = 0; i < m; ++i) sub.row(i) = values.row(rows[static_cast<std::size_t>(i)]);
    const double det = sub.fullPivLu().determinant();
    if (best.rows.empty() || std::abs(det) > std::abs(best.det)) best = {rows, det};
    // Next combination in lexicographic order.
    int i = m - 1;
    while (i >= 0 && rows[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++rows[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j)
      rows[static_cast<std::size_t>(j)] = rows[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

Frame select_frame(const fields::BracketTable& table, const Vector& x, int mu, int M,
                   double rank_tol) {
  const auto& spec = table.spec();
  if (mu < 1 || M < 1 || M > spec.dim) throw InvalidArgument("select_frame: invalid mu or M");
  if (x.size() != spec.dim) throw DimensionMismatch("select_frame: point dimension");
  Frame frame;
  Matrix accepted(spec.dim, 0);
  int rank = 0;
  for (const auto& w : fields::enumerate_words(spec.generator_count(), mu)) {
    if (rank == M) break;
    Matrix trial(spec.dim, accepted.cols() + 1);
    trial << accepted, table.get(w)(x);
    const int r = numeric_rank(trial, rank_tol);
    if (r > rank) {
      rank = r;
      accepted = std::move(trial);
      frame.words.push_back(w);
    }
  }
  if (rank < M)
    throw FrameDeficient("only " + std::to_string(rank) + " independent bracket values of length <= " +
                         std::to_string(mu) + " at the frame point, expected " + std::to_string(M));
  const auto minor = best_minor(accepted);
  frame.chart_rows = minor.rows;
  frame.det = minor.det;
  return frame;
}

std::vector<Vector> default_samples(const fields::Box& box) {
  const int n = box.dim();
  int per_axis = 5;
  if (n > 4) per_axis = std::max(2, static_cast<int>(std::floor(std::pow(625.0, 1.0 / n) + 1e-9)));
  return box.grid(per_axis);
}

FiltrationReport analyze(const fields::SpecPtr& spec, const std::vector<Vector>& samples,
                         int max_length, double rank_tol, Execution exec) {
  if (!spec) throw InvalidArgument("analyze: null distribution");
  if (samples.empty()) throw InvalidArgument("analyze: no samples");
  FiltrationReport rep;
  rep.samples = samples;
  rep.max_length = max_length;
  rep.rank_tol = rank_tol;
  fields::BracketTable table(spec);
  rep.profiles.resize(samples.size());
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    rep.profiles[i] = filtration_ranks(table, samples[i], max_length, rank_tol);
  });
  rep.depth = minimal_depth(rep.profiles, spec->dim);
  rep.bracket_generating = rep.depth.uniform && rep.depth.M == spec->dim;
  rep.frame_point = 0.5 * (spec->box.lower + spec->box.upper);
  if (rep.depth.uniform)
    rep.frame = select_frame(table, rep.frame_point, *rep.depth.mu, rep.depth.M, rank_tol);
  return rep;
}

}  // namespace bracket_reach::filtration
