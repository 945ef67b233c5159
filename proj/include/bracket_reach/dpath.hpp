#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "bracket_reach/field.hpp"
#include "bracket_reach/flow_program.hpp"
#include "bracket_reach/integrator.hpp"

namespace bracket_reach::reach {

/// One integral-curve arc of a generator.
struct Arc {
  int generator = 0;  // 1-based
  double duration = 0.0;
  Vector start;
  Vector end;
  std::vector<flows::FlowSample> samples;  // uniform in arc-local time, ends included
};

/// Concatenation of generator arcs; arc k+1 starts at the stored end of arc k.
struct DPath {
  Vector start;
  Vector target;
  Vector endpoint;
  double tol = 0.0;
  std::vector<Arc> arcs;

  int dim() const { return static_cast<int>(start.size()); }
  double endpoint_error() const { return (endpoint - target).norm(); }
  /// Appends `next`, which must start where this path ends.
  void append(const DPath& next);
};

/// Largest spacing between polyline samples along an arc.
inline constexpr double kMaxSampleSpacing = 1e-3;
inline constexpr int kMinArcIntervals = 8;
/// ODE residual bound relative to the path scale.
inline constexpr double kResidualTolerance = 1e-8;

/// Integrates a realized (constant-schedule) program from `start`, one arc
/// per atom.
DPath build_dpath(const flows::FlowProgram& realized, const Vector& start, const Vector& target,
                  double tol, double integrator_tol = flows::kDefaultTolerance);

struct PathCheck {
  bool chained = true;          // every arc starts exactly where the previous ended
  double max_residual = 0.0;    // max-abs of dx/ds - X_k(x) at interior samples
  double scale = 1.0;           // 1 + max-abs coordinate over all samples
  double endpoint_error = 0.0;
  bool residual_ok = true;
  bool endpoint_ok = true;
  bool ok() const { return chained && residual_ok && endpoint_ok; }
};

/// Re-checks chaining, per-arc ODE residuals (fourth-order differences of
/// the polyline) and the endpoint error against the path's tolerance.
PathCheck validate_dpath(const DPath& path, const fields::DistributionSpec& spec);

/// CSV rows: arc_index,k,sigma_value,s,x1..xN, 17 significant digits.
void write_csv(const DPath& path, std::ostream& out);
/// Reads arcs back from write_csv output.
std::vector<Arc> read_csv(std::istream& in, int dim);

/// Path summary (start, target, endpoint, tolerance, per-arc generator and
/// duration) with numbers rounded to 12 significant digits.
nlohmann::json manifest(const DPath& path);
/// Rebuilds a path from its manifest and CSV arcs.
DPath load_dpath(const nlohmann::json& manifest, std::istream& csv);

/// Rounds to 12 significant digits (the precision of all reports).
double round12(double v);
nlohmann::json to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

}  // namespace bracket_reach::reach
