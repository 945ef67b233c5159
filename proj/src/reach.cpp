#include "bracket_reach/reach.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bracket_reach/commutator.hpp"
#include "bracket_reach/errors.hpp"

namespace bracket_reach::reach {

using fields::BracketWord;

namespace {

/// Uniform point in the Euclidean ball of the given radius.
Vector ball_point(std::mt19937_64& rng, int dim, double radius) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> u01;
  Vector d(dim);
  for (int i = 0; i < dim; ++i) d[i] = n01(rng);
  const double len = d.norm();
  if (len == 0.0) return Vector::Zero(dim);
  return d / len * radius * std::pow(u01(rng), 1.0 / dim);
}

Vector sphere_point(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> n01;
  Vector d(dim);
  do {
    for (int i = 0; i < dim; ++i) d[i] = n01(rng);
  } while (d.norm() == 0.0);
  return d / d.norm();
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Endpoint map

EndpointMap::EndpointMap(fields::SpecPtr spec, std::vector<BracketWord> words, double delta,
                         Vector center, std::vector<int> chart_rows, double tol)
    : spec_(std::move(spec)),
      words_(std::move(words)),
      delta_(delta),
      center_(std::move(center)),
      chart_rows_(std::move(chart_rows)),
      tol_(tol) {
  if (!spec_) throw InvalidArgument("endpoint map needs a distribution");
  if (words_.empty()) throw InvalidArgument("endpoint map needs at least one frame word");
  if (M() > N()) throw InvalidArgument("more frame words than dimensions");
  if (!(delta_ > 0.0) || !std::isfinite(delta_))
    throw InvalidArgument("endpoint map: delta must be positive");
  if (center_.size() != N()) throw DimensionMismatch("endpoint map: centre dimension");
  if (!spec_->box.contains(center_)) throw InvalidArgument("endpoint map: centre outside the box");
  for (const auto& w : words_) factors_.push_back(commutator::build_f(spec_, w, delta_));
  if (chart_rows_.empty()) {
    fields::BracketTable table(spec_);
    chart_rows_ = filtration::best_minor(filtration::frame_values(table, words_, center_)).rows;
  }
  if (static_cast<int>(chart_rows_.size()) != M())
    throw InvalidArgument("endpoint map: need one chart row per frame word");
  std::set<int> seen;
  for (int r : chart_rows_)
    if (r < 0 || r >= N() || !seen.insert(r).second)
      throw InvalidArgument("endpoint map: invalid chart rows");
}

Vector EndpointMap::operator()(const Vector& s) const {
  if (s.size() != M()) throw DimensionMismatch("endpoint map: parameter dimension");
  Vector x = center_;
  for (int l = M() - 1; l >= 0; --l) {
    try {
      x = flows::apply_program(factors_[static_cast<std::size_t>(l)], x, s[l], tol_);
    } catch (DomainEscape& e) {
      e.factor = static_cast<std::size_t>(l + 1);
      throw;
    }
  }
  return x;
}

flows::FlowProgram EndpointMap::flattened(const Vector& s) const {
  if (s.size() != M()) throw DimensionMismatch("endpoint map: parameter dimension");
  flows::FlowProgram out(spec_, {});
  for (int l = M() - 1; l >= 0; --l)
    out = out.then(factors_[static_cast<std::size_t>(l)].realized(s[l]));
  return out;
}

Vector EndpointMap::chart(const Vector& x) const {
  Vector z(M());
  for (int i = 0; i < M(); ++i) z[i] = x[chart_rows_[static_cast<std::size_t>(i)]];
  return z;
}

double EndpointMap::half_width() const { return 0.5 * delta_ * (1.0 - 1e-9); }

EndpointJacobian jacobian_endpoint(const EndpointMap& map, const Vector& s,
                                   std::optional<double> h, Execution exec) {
  const double step = h.value_or(map.delta() / 100.0);
  if (!(step > 0.0)) throw InvalidArgument("jacobian_endpoint: step must be positive");
  const int M = map.M();
  static constexpr double kOffsets[4] = {-2.0, -1.0, 1.0, 2.0};
  static constexpr double kWeights[4] = {1.0, -8.0, 8.0, -1.0};
  std::vector<Vector> values(static_cast<std::size_t>(4 * M));
  for_each_index(values.size(), exec, [&](std::size_t i) {
    Vector p = s;
    p[static_cast<Eigen::Index>(i / 4)] += kOffsets[i % 4] * step;
    values[i] = map(p);
  });
  EndpointJacobian J;
  J.raw.resize(map.N(), M);
  for (int l = 0; l < M; ++l) {
    Vector col = Vector::Zero(map.N());
    for (int k = 0; k < 4; ++k) col += kWeights[k] * values[static_cast<std::size_t>(4 * l + k)];
    J.raw.col(l) = col / (12.0 * step);
  }
  J.leaf.resize(M, M);
  for (int i = 0; i < M; ++i) J.leaf.row(i) = J.raw.row(map.chart_rows()[static_cast<std::size_t>(i)]);
  return J;
}

// ---------------------------------------------------------------------------
// Bounds and the closed-form radius

BoundsEstimate estimate_bounds(const fields::BracketTable& table,
                               const std::vector<BracketWord>& frame,
                               const std::vector<Vector>& samples, int mu, double rank_tol,
                               Execution exec) {
  if (samples.empty()) throw InvalidArgument("estimate_bounds: no samples");
  if (mu < 1) throw InvalidArgument("estimate_bounds: mu must be >= 1");
  const auto& spec = table.spec();
  BoundsEstimate b;
  b.derivative_order = mu + 3;
  b.samples = samples.size();
  auto space = std::make_shared<const fields::JetSpace>(spec.dim, b.derivative_order);
  std::vector<double> dets(samples.size()), norms(samples.size());
  for_each_index(samples.size(), exec, [&](std::size_t i) {
    const Vector& x = samples[i];
    dets[i] = std::abs(filtration::best_minor(filtration::frame_values(table, frame, x)).det);
    std::vector<fields::Jet> vars;
    for (int k = 0; k < spec.dim; ++k) vars.push_back(fields::Jet::variable(space, k, x[k]));
    double total = 0.0;
    for (const auto& g : spec.generators)
      for (const auto& c : g.components()) {
        const auto jet = fields::evaluate(c, std::span<const fields::Jet>(vars));
        double sum = 0.0;
        for (std::size_t k = 0; k < space->size(); ++k) sum += std::abs(jet.partial(k));
        total += std::max(1.0, sum);
      }
    norms[i] = total;
  });
  b.min_det = *std::min_element(dets.begin(), dets.end());
  b.max_norm = *std::max_element(norms.begin(), norms.end());
  if (!(b.min_det >= rank_tol))
    throw FrameDeficient("frame determinant " + std::to_string(b.min_det) +
                         " falls below rank_tol on the samples");
  b.C0 = kC0Safety * b.min_det;
  b.C1 = kC1Inflation * b.max_norm;
  return b;
}

long long formula_exponent(int mu, int M) {
  if (mu < 1 || M < 1) throw InvalidArgument("formula_exponent: mu and M must be >= 1");
  return 6 * commutator::flow_count(mu) * (mu + 3) * M * (2LL * M + 1);
}

PaperRadius paper_radius(double C0, double C1, int mu, int M, double delta_max, double K,
                         double K_prime) {
  if (!(C0 > 0.0)) throw InvalidArgument("paper_radius: C0 must be positive");
  if (!(C1 >= 1.0)) throw InvalidArgument("paper_radius: C1 must be >= 1");
  if (!(delta_max > 0.0 && delta_max < 1.0))
    throw InvalidArgument("paper_radius: delta_max must lie in (0, 1)");
  if (!(K > 0.0) || !(K_prime > 0.0)) throw InvalidArgument("paper_radius: K, K' must be positive");
  PaperRadius p;
  p.N = formula_exponent(mu, M);
  p.K = K;
  p.K_prime = K_prime;
  const double n = static_cast<double>(p.N);
  const double lg_c0 = std::log10(C0), lg_c1 = std::log10(C1);
  p.log10_delta_o = std::min(std::log10(K) + mu * lg_c0 - mu * n * lg_c1, std::log10(delta_max));
  const double lg_min = std::min(lg_c0, 2.0 * lg_c0);
  p.log10_r_o = std::log10(K_prime) + p.log10_delta_o + lg_min - n * lg_c1;

  double d = K * std::pow(C0, mu) * std::pow(C1, -mu * n);
  if (!std::isfinite(d)) d = std::pow(10.0, p.log10_delta_o);
  p.delta_o = std::min(d, delta_max);
  double r = K_prime * p.delta_o * std::min(C0, C0 * C0) * std::pow(C1, -n);
  if (!std::isfinite(r)) r = std::pow(10.0, p.log10_r_o);
  p.r_o = r;
  p.warning = "non-certified, formula-shape only: K and K' are unspecified constants";
  return p;
}

double default_delta_start(const fields::Box& box, const Vector& y, double C1) {
  return std::min(0.99, 0.5 * box.margin(y) / (1.0 + C1));
}

DeltaSearch find_delta_max(const fields::SpecPtr& spec, const std::vector<BracketWord>& words,
                           const Vector& y, double start, const std::vector<int>& chart_rows,
                           Execution exec) {
  if (!(start > 0.0)) throw InvalidArgument("find_delta_max: start must be positive");
  const int M = static_cast<int>(words.size());
  DeltaSearch out;
  out.delta = start;
  for (; out.halvings <= 60; ++out.halvings, out.delta *= 0.5) {
    const EndpointMap map(spec, words, out.delta, y, chart_rows);
    const double hw = map.half_width();
    std::vector<Vector> probes;
    for (std::size_t mask = 0; mask < (std::size_t{1} << M); ++mask) {
      Vector s(M);
      for (int l = 0; l < M; ++l) s[l] = (mask >> l) & 1 ? hw : -hw;
      probes.push_back(s);
    }
    for (int l = 0; l < M; ++l)
      for (double sign : {-1.0, 1.0}) probes.push_back(sign * hw * Vector::Unit(M, l));
    std::vector<char> ok(probes.size(), 1);
    for_each_index(probes.size(), exec, [&](std::size_t i) {
      try {
        map(probes[i]);
      } catch (const DomainEscape&) {
        ok[i] = 0;
      } catch (const StepUnderflow&) {
        ok[i] = 0;
      }
    });
    if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) return out;
  }
  throw DomainEscape("no admissible delta: the endpoint map escapes the box at every scale", 0.0);
}

// ---------------------------------------------------------------------------
// Certificate

RadiusCertificate certified_radius(const EndpointMap& map, const CertificateOptions& opts) {
  RadiusCertificate c;
  c.center = map.center();
  c.delta = map.delta();
  const int M = map.M();

  const Matrix J0 = jacobian_endpoint(map, Vector::Zero(M), std::nullopt, opts.exec).leaf;
  Eigen::JacobiSVD<Matrix> svd(J0);
  const auto& sv = svd.singularValues();
  const double smax = sv[0], smin = sv[sv.size() - 1];
  if (!std::isfinite(smax) || !(smin > 1e-12 * std::max(1.0, smax)))
    throw SingularJacobian("endpoint Jacobian at s = 0 is singular (smallest singular value " +
                           std::to_string(smin) + ")");
  c.inverse_norm = 1.0 / smin;
  c.det_J0 = J0.determinant();

  std::mt19937_64 rng(opts.seed);
  const double radius = map.half_width();
  double sampled = 0.0;
  double previous = -1.0;
  for (int round = 0;; ++round) {
    const std::size_t count = static_cast<std::size_t>(opts.initial_pairs)
                              << static_cast<unsigned>(std::max(0, round - 1));
    std::vector<Vector> points;
    points.reserve(2 * count);
    for (std::size_t i = 0; i < count; ++i) {
      const Vector s = ball_point(rng, M, radius);
      Vector t = s + ball_point(rng, M, 0.25 * radius);
      if (t.norm() > radius) t *= radius / t.norm();
      points.push_back(s);
      points.push_back(t);
    }
    std::vector<Matrix> jac(points.size());
    for_each_index(points.size(), opts.exec, [&](std::size_t i) {
      jac[i] = jacobian_endpoint(map, points[i], std::nullopt, Execution::kSerial).leaf;
    });
    for (std::size_t i = 0; i < count; ++i) {
      const double ds = (points[2 * i] - points[2 * i + 1]).norm();
      if (ds == 0.0) continue;
      sampled = std::max(sampled, spectral_norm(jac[2 * i] - jac[2 * i + 1]) / ds);
    }
    c.pairs += count;
    c.rounds = round + 1;
    const double L = std::max(opts.lipschitz_floor, opts.inflation * sampled);
    if (round > 0 && (L - previous) <= opts.stabilization * previous) break;
    if (round >= opts.max_rounds)
      throw BudgetExceeded("Lipschitz estimate did not stabilise after " +
                           std::to_string(opts.max_rounds) + " doublings");
    previous = L;
  }
  c.lipschitz_sampled = sampled;
  c.lipschitz = std::max(opts.lipschitz_floor, opts.inflation * sampled);
  const double A = c.inverse_norm;
  // The relative shrink keeps both conditions true after rounding.
  c.r_o = std::min(c.delta / (4.0 * A), 1.0 / (2.0 * c.lipschitz * A * A)) * (1.0 - 1e-12);
  c.cond1_lhs = 2.0 * c.r_o * A;
  c.cond1_rhs = c.delta / 2.0;
  c.cond2_lhs = c.lipschitz;
  c.cond2_rhs = 1.0 / (2.0 * c.r_o * A * A);
  return c;
}

// ---------------------------------------------------------------------------
// Steering

SteerResult solve_chart(const EndpointMap& map, const Vector& z, const SteerOptions& opts) {
  const int M = map.M();
  if (z.size() != M) throw DimensionMismatch("solve_chart: target dimension");
  const double hw = map.half_width();
  SteerResult r;
  r.s = Vector::Zero(M);
  Vector R = map.chart(map(r.s)) - z;
  r.residual = R.norm();
  double best = r.residual;
  auto pinned = [&](const Vector& s) { return (s.cwiseAbs().array() >= hw).any(); };
  while (r.residual > 0.1 * opts.tol) {
    if (r.iterations >= opts.max_iter) {
      if (pinned(r.s)) throw HypercubeExhausted("Newton iterate pinned to the hypercube boundary");
      throw NoConvergence("Newton iteration limit reached", best);
    }
    const Matrix J = jacobian_endpoint(map, r.s, std::nullopt, opts.exec).leaf;
    Eigen::FullPivLU<Matrix> lu(J);
    if (!lu.isInvertible()) throw SingularJacobian("endpoint Jacobian singular during steering");
    const Vector step = lu.solve(-R);
    double lambda = 1.0;
    bool accepted = false;
    Vector s_try, R_try;
    for (; lambda >= opts.min_step; lambda *= 0.5) {
      s_try = (r.s + lambda * step).cwiseMax(-hw).cwiseMin(hw);
      try {
        R_try = map.chart(map(s_try)) - z;
      } catch (const DomainEscape&) {
        continue;
      } catch (const StepUnderflow&) {
        continue;
      }
      if (R_try.squaredNorm() <= (1.0 - 2.0 * opts.armijo * lambda) * R.squaredNorm()) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (pinned(r.s) || pinned(s_try))
        throw HypercubeExhausted("Newton step pinned to the hypercube boundary");
      throw NoConvergence("line search failed", best);
    }
    r.s = s_try;
    R = R_try;
    r.residual = R.norm();
    best = std::min(best, r.residual);
    ++r.iterations;
  }
  return r;
}

namespace {

DPath empty_path(const Vector& at, const Vector& target, double tol) {
  DPath p;
  p.start = at;
  p.endpoint = at;
  p.target = target;
  p.tol = tol;
  return p;
}

}  // namespace

DPath steer(const EndpointMap& map, const Vector& target, const SteerOptions& opts) {
  if (target.size() != map.N()) throw DimensionMismatch("steer: target dimension");
  if ((target - map.center()).norm() <= 0.1 * opts.tol) return empty_path(map.center(), target, opts.tol);
  const auto sol = solve_chart(map, map.chart(target), opts);
  DPath path = build_dpath(map.flattened(sol.s), map.center(), target, opts.tol, map.tol());
  const double err = path.endpoint_error();
  if (!(err < opts.tol)) {
    if (map.M() < map.N() && (map.chart(path.endpoint) - map.chart(target)).norm() < opts.tol)
      throw LeafMismatch("target is off the leaf through the centre: transverse residual " +
                         std::to_string(err));
    throw NoConvergence("re-integrated path misses the target", err);
  }
  return path;
}

DPath steer_chart(const EndpointMap& map, const Vector& z, const SteerOptions& opts) {
  if (z.size() != map.M()) throw DimensionMismatch("steer_chart: target dimension");
  if ((z - map.chart(map.center())).norm() <= 0.1 * opts.tol)
    return empty_path(map.center(), map.center(), opts.tol);
  const auto sol = solve_chart(map, z, opts);
  const Vector reached = map(sol.s);
  DPath path = build_dpath(map.flattened(sol.s), map.center(), reached, opts.tol, map.tol());
  const double err = (map.chart(path.endpoint) - z).norm();
  if (!(err < opts.tol) || !(path.endpoint_error() < opts.tol))
    throw NoConvergence("re-integrated path misses the leaf target", err);
  return path;
}

ProbeReport probe_certificate(const EndpointMap& map, const RadiusCertificate& cert, int count,
                              std::uint64_t seed, double fraction, const SteerOptions& opts) {
  ProbeReport rep;
  rep.attempted = count;
  std::mt19937_64 rng(seed);
  std::vector<Vector> dirs;
  for (int i = 0; i < count; ++i) dirs.push_back(sphere_point(rng, map.M()));
  const Vector z0 = map.chart(map.center());
  std::vector<double> errors(static_cast<std::size_t>(count), 0.0);
  std::vector<std::string> messages(static_cast<std::size_t>(count));
  SteerOptions inner = opts;
  inner.exec = Execution::kSerial;
  for_each_index(static_cast<std::size_t>(count), opts.exec, [&](std::size_t i) {
    const Vector z = z0 + fraction * cert.r_o * dirs[i];
    try {
      if (map.M() == map.N()) {
        Vector target(map.N());
        for (int k = 0; k < map.M(); ++k) target[map.chart_rows()[static_cast<std::size_t>(k)]] = z[k];
        errors[i] = steer(map, target, inner).endpoint_error();
      } else {
        const auto path = steer_chart(map, z, inner);
        errors[i] = (map.chart(path.endpoint) - z).norm();
      }
    } catch (const Error& e) {
      messages[i] = "probe " + std::to_string(i) + ": " + e.what();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (messages[i].empty()) {
      ++rep.succeeded;
      rep.max_endpoint_error = std::max(rep.max_endpoint_error, errors[i]);
    } else {
      rep.failures.push_back(messages[i]);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Connect

ConnectResult connect(const fields::SpecPtr& spec, const Vector& x, const Vector& x_target,
                      const ConnectParams& params) {
  if (!spec) throw InvalidArgument("connect: null distribution");
  if (x.size() != spec->dim || x_target.size() != spec->dim)
    throw DimensionMismatch("connect: point dimension");
  if (!spec->box.contains(x) || !spec->box.contains(x_target))
    throw InvalidArgument("connect: endpoints must lie in the domain box");
  const auto analysis = filtration::analyze(spec, filtration::default_samples(spec->box),
                                            params.max_length, params.rank_tol, params.exec);
  if (!analysis.bracket_generating)
    throw InvalidArgument("connect: distribution is not bracket generating on the samples");
  const int mu = *analysis.depth.mu;
  fields::BracketTable table(spec);

  ConnectResult out;
  out.path = empty_path(x, x_target, params.tol);
  Vector y = x;
  SteerOptions sopts;
  sopts.tol = params.tol;
  sopts.exec = params.exec;
  while ((x_target - y).norm() >= params.tol) {
    if (static_cast<int>(out.legs.size()) >= params.max_legs)
      throw Stalled("connect: leg budget exhausted");
    Leg leg;
    leg.from = y;
    const auto frame = filtration::select_frame(table, y, mu, spec->dim, params.rank_tol);
    leg.frame = frame.words;
    leg.delta = find_delta_max(spec, frame.words, y, params.delta, frame.chart_rows, params.exec).delta;
    const EndpointMap map(spec, frame.words, leg.delta, y, frame.chart_rows);
    CertificateOptions copts;
    copts.seed = params.seed + out.legs.size();
    copts.exec = params.exec;
    leg.certificate = certified_radius(map, copts);
    if (leg.certificate.r_o < params.min_radius)
      throw Stalled("connect: certified radius " + std::to_string(leg.certificate.r_o) +
                    " fell below the minimum " + std::to_string(params.min_radius));
    const double dist = (x_target - y).norm();
    const double advance = 0.9 * leg.certificate.r_o;
    leg.waypoint = dist <= advance ? Vector(x_target) : Vector(y + advance / dist * (x_target - y));
    const DPath piece = steer(map, leg.waypoint, sopts);
    out.path.append(piece);
    y = out.path.endpoint;
    out.legs.push_back(std::move(leg));
  }
  out.path.target = x_target;
  out.path.tol = params.tol;
  return out;
}

}  // namespace bracket_reach::reach
