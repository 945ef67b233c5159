#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bracket_reach/dpath.hpp"
#include "bracket_reach/field.hpp"
#include "bracket_reach/filtration.hpp"
#include "bracket_reach/flow_program.hpp"
#include "bracket_reach/parallel.hpp"

namespace bracket_reach::reach {

/// F(s) = f^(1)_s1 o ... o f^(M)_sM (y), one shifted commutator family per
/// frame word; f^(M) acts first.
class EndpointMap {
 public:
  /// `chart_rows` selects the M leaf coordinates; empty means the best
  /// M x M minor of the frame values at y.
  EndpointMap(fields::SpecPtr spec, std::vector<fields::BracketWord> words, double delta,
              Vector center, std::vector<int> chart_rows = {},
              double tol = flows::kDefaultTolerance);

  int M() const { return static_cast<int>(words_.size()); }
  int N() const { return spec_->dim; }
  double delta() const { return delta_; }
  double tol() const { return tol_; }
  const Vector& center() const { return center_; }
  const fields::SpecPtr& spec() const { return spec_; }
  const std::vector<fields::BracketWord>& words() const { return words_; }
  const std::vector<flows::FlowProgram>& factors() const { return factors_; }
  const std::vector<int>& chart_rows() const { return chart_rows_; }

  /// Throws DomainEscape carrying the 1-based factor index on escape.
  Vector operator()(const Vector& s) const;
  /// The whole composition at s as one program of constant schedules, in
  /// execution order.
  flows::FlowProgram flattened(const Vector& s) const;
  /// Leaf coordinates of x (the chart rows).
  Vector chart(const Vector& x) const;
  /// Largest admissible |s_l| used by steering: just inside delta/2.
  double half_width() const;

 private:
  fields::SpecPtr spec_;
  std::vector<fields::BracketWord> words_;
  double delta_;
  Vector center_;
  std::vector<int> chart_rows_;
  double tol_;
  std::vector<flows::FlowProgram> factors_;
};

struct EndpointJacobian {
  Matrix raw;   // N x M
  Matrix leaf;  // M x M, rows restricted to the chart coordinates
};

/// Fourth-order central differences in each s_l with step h (default
/// delta/100); the 4M evaluations are independent.
EndpointJacobian jacobian_endpoint(const EndpointMap& map, const Vector& s,
                                   std::optional<double> h = std::nullopt,
                                   Execution exec = Execution::kParallel);

struct BoundsEstimate {
  double C0 = 0.0;
  double C1 = 1.0;
  double min_det = 0.0;    // before the 0.9 safety factor
  double max_norm = 0.0;   // before the 1.1 inflation
  int derivative_order = 0;  // mu + 3
  std::size_t samples = 0;
  bool max_with_one = true;
};

inline constexpr double kC0Safety = 0.9;
inline constexpr double kC1Inflation = 1.1;

/// C0 from the smallest |best M x M minor| of the frame values over the
/// samples; C1 from exact partials (Taylor jets) of every generator
/// component up to order mu + 3.
BoundsEstimate estimate_bounds(const fields::BracketTable& table,
                               const std::vector<fields::BracketWord>& frame,
                               const std::vector<Vector>& samples, int mu,
                               double rank_tol = filtration::kDefaultRankTol,
                               Execution exec = Execution::kParallel);

/// 6 (2^mu + 2^(mu-1) - 2)(mu + 3) M (2M + 1).
long long formula_exponent(int mu, int M);

struct PaperRadius {
  long long N = 0;
  double delta_o = 0.0;
  double r_o = 0.0;
  /// Base-10 logarithms; finite even when the radius underflows a double.
  double log10_delta_o = 0.0;
  double log10_r_o = 0.0;
  double K = 1.0;
  double K_prime = 1.0;
  std::string warning;
};

/// delta_o = min{K C0^mu / C1^(mu N), delta_max},
/// r_o = K' delta_o min{C0, C0^2} / C1^N.
PaperRadius paper_radius(double C0, double C1, int mu, int M, double delta_max, double K = 1.0,
                         double K_prime = 1.0);

/// Starting delta for the escape search: 0.5 * margin(y) / (1 + C1), capped
/// below 1.
double default_delta_start(const fields::Box& box, const Vector& y, double C1);

struct DeltaSearch {
  double delta = 0.0;
  int halvings = 0;
};

/// Halves `start` until the endpoint map evaluates without escaping the box
/// at every hypercube corner and face centre.
DeltaSearch find_delta_max(const fields::SpecPtr& spec,
                           const std::vector<fields::BracketWord>& words, const Vector& y,
                           double start, const std::vector<int>& chart_rows = {},
                           Execution exec = Execution::kParallel);

struct CertificateOptions {
  std::uint64_t seed = 1;
  int initial_pairs = 16;
  int max_rounds = 8;
  double stabilization = 0.1;  // relative change that ends the doubling
  double inflation = 1.25;
  double lipschitz_floor = 1e-9;
  Execution exec = Execution::kParallel;
};

struct RadiusCertificate {
  Vector center;
  double delta = 0.0;
  std::string method = "direct-ift";
  double r_o = 0.0;
  double inverse_norm = 0.0;  // A = ||J^-1|| at s = 0 (spectral norm)
  double lipschitz = 0.0;     // L after inflation and floor
  double lipschitz_sampled = 0.0;
  std::size_t pairs = 0;
  int rounds = 0;
  double det_J0 = 0.0;
  // Condition (1): 2 r_o A <= delta / 2.   Condition (2): L <= 1 / (2 r_o A^2).
  double cond1_lhs = 0.0, cond1_rhs = 0.0;
  double cond2_lhs = 0.0, cond2_rhs = 0.0;
  bool holds() const { return r_o > 0.0 && cond1_lhs <= cond1_rhs && cond2_lhs <= cond2_rhs; }
};

/// Inverse-function-theorem certificate with measured ||J^-1|| and a
/// sampled Lipschitz bound of the Jacobian on the ball of radius delta/2.
RadiusCertificate certified_radius(const EndpointMap& map, const CertificateOptions& opts = {});

struct SteerOptions {
  double tol = 1e-8;
  int max_iter = 50;
  double armijo = 1e-4;
  double min_step = 1e-12;
  Execution exec = Execution::kParallel;
};

struct SteerResult {
  Vector s;
  int iterations = 0;
  double residual = 0.0;  // chart residual at s
};

/// Damped Newton on chart(F(s)) = z in the open hypercube.
SteerResult solve_chart(const EndpointMap& map, const Vector& z, const SteerOptions& opts = {});

/// Newton inversion of the endpoint map followed by end-to-end
/// re-integration of the flattened composition.
DPath steer(const EndpointMap& map, const Vector& target, const SteerOptions& opts = {});

/// As steer, with the target given in leaf coordinates; the reported
/// target is the reached point when the chart residual is within tol.
DPath steer_chart(const EndpointMap& map, const Vector& z, const SteerOptions& opts = {});

struct ProbeReport {
  int attempted = 0;
  int succeeded = 0;
  double max_endpoint_error = 0.0;
  std::vector<std::string> failures;
  bool passed() const { return attempted > 0 && succeeded == attempted; }
};

/// Steers to `count` random targets at distance `fraction` * r_o from the
/// centre (in leaf coordinates); targets are independent.
ProbeReport probe_certificate(const EndpointMap& map, const RadiusCertificate& cert, int count,
                              std::uint64_t seed, double fraction = 0.9,
                              const SteerOptions& opts = {});

struct ConnectParams {
  double delta = 0.2;
  double tol = 1e-8;
  double min_radius = 1e-4;
  int max_legs = 1000;
  int max_length = 4;
  double rank_tol = filtration::kDefaultRankTol;
  std::uint64_t seed = 1;
  Execution exec = Execution::kParallel;
};

struct Leg {
  Vector from;
  Vector waypoint;
  double delta = 0.0;
  std::vector<fields::BracketWord> frame;
  RadiusCertificate certificate;
};

struct ConnectResult {
  DPath path;
  std::vector<Leg> legs;
};

/// Greedy chaining of certified steps along the segment from x to x_target.
ConnectResult connect(const fields::SpecPtr& spec, const Vector& x, const Vector& x_target,
                      const ConnectParams& params = {});

}  // namespace bracket_reach::reach
