#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bracket_reach/errors.hpp"
#include "bracket_reach/reach.hpp"
#include "oracles.hpp"

using namespace bracket_reach;
using namespace bracket_reach::reach;
using fields::BracketWord;

namespace {

double max_abs(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

const std::vector<BracketWord> kHeisFrame = {{1}, {2}, {1, 2}};

}  // namespace

TEST_CASE("Heisenberg endpoint map is the identity chart") {
  auto h = oracle::heisenberg();
  for (double delta : {0.1, 0.2, 0.5}) {
    EndpointMap F(h.spec, kHeisFrame, delta, Vector::Zero(3));
    CHECK(F.M() == 3);
    CHECK(F.chart_rows() == std::vector<int>{0, 1, 2});
    const Vector s = vec({0.3 * delta, -0.2 * delta, 0.45 * delta});
    CHECK(max_abs(F(s) - s) <= 1e-12);
    CHECK(max_abs(F(Vector::Zero(3))) <= 1e-14);
    CHECK(F.flattened(s).size() == 2 + 2 + 8);
  }
  EndpointMap F(h.spec, kHeisFrame, 0.5, vec({0.1, 0, 0}));
  CHECK(max_abs(F(vec({0, 0.2, 0})) - vec({0.1, 0.2, 0.02})) <= 1e-12);
}

TEST_CASE("flattened composition reproduces the endpoint") {
  auto m = oracle::martinet();
  EndpointMap F(m.spec, {{1}, {2}, {1, 2}}, 0.1, vec({0.3, 0, 0}));
  const Vector s = vec({0.01, -0.02, 0.015});
  const auto prog = F.flattened(s);
  CHECK(prog.size() == 2 + 2 + 8);
  CHECK(max_abs(flows::apply_program(prog, F.center(), 0.0) - F(s)) == 0.0);
}

TEST_CASE("endpoint map errors") {
  auto h = oracle::heisenberg();
  CHECK_THROWS_AS(EndpointMap(h.spec, {}, 0.1, Vector::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(EndpointMap(h.spec, kHeisFrame, 0.0, Vector::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(EndpointMap(h.spec, kHeisFrame, 0.1, Vector::Zero(2)), DimensionMismatch);
  CHECK_THROWS_AS(EndpointMap(h.spec, kHeisFrame, 0.1, Vector::Zero(3), {0, 0, 1}), InvalidArgument);
  EndpointMap edge(h.spec, kHeisFrame, 0.9, vec({1.9, 0, 0}));
  try {
    edge(vec({0.4, 0, 0}));
    FAIL("expected DomainEscape");
  } catch (const DomainEscape& e) {
    REQUIRE(e.factor.has_value());
    CHECK(*e.factor == 3);  // the innermost family swings x1 by about 0.95
  }
}

TEST_CASE("endpoint Jacobian") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, kHeisFrame, 0.2, Vector::Zero(3));
  const auto J = jacobian_endpoint(F, Vector::Zero(3));
  CHECK(max_abs((J.leaf - Matrix::Identity(3, 3)).reshaped()) <= 1e-10);
  CHECK(J.leaf.determinant() == doctest::Approx(1.0));
  const auto Js = jacobian_endpoint(F, Vector::Zero(3), 1e-3, Execution::kSerial);
  const auto Jp = jacobian_endpoint(F, Vector::Zero(3), 1e-3, Execution::kParallel);
  CHECK((Js.raw.array() == Jp.raw.array()).all());

  auto inv = oracle::involutive();
  EndpointMap G(inv.spec, {{1}, {2}}, 0.2, vec({0.1, 0.2, 0.3}));
  const auto Jg = jacobian_endpoint(G, Vector::Zero(2));
  CHECK(Jg.raw.rows() == 3);
  CHECK(Jg.raw.cols() == 2);
  CHECK(max_abs((Jg.leaf - Matrix::Identity(2, 2)).reshaped()) <= 1e-10);
}

TEST_CASE("Jacobian columns approach the frame fields like delta^(1/r)") {
  auto m = oracle::martinet();
  const Vector y = vec({0.5, 0, 0});
  fields::BracketTable t(m.spec);
  std::vector<double> ld, le;
  for (double delta : {0.2, 0.1, 0.05, 0.025}) {
    EndpointMap F(m.spec, {{1}, {2}, {1, 2}}, delta, y);
    const auto J = jacobian_endpoint(F, Vector::Zero(3));
    const double err = (J.raw.col(2) - t.get({1, 2})(y)).norm();
    ld.push_back(std::log(delta));
    le.push_back(std::log(err));
  }
  // Least-squares slope.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < ld.size(); ++i) mx += ld[i], my += le[i];
  mx /= ld.size();
  my /= le.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ld.size(); ++i) sxy += (ld[i] - mx) * (le[i] - my), sxx += (ld[i] - mx) * (ld[i] - mx);
  CHECK(std::abs(sxy / sxx - 0.5) <= 0.3);
}

TEST_CASE("bounds estimates") {
  auto h = oracle::heisenberg();
  fields::BracketTable th(h.spec);
  fields::Box unit{Vector::Constant(3, -1.0), Vector::Constant(3, 1.0)};
  const auto b = estimate_bounds(th, kHeisFrame, unit.grid(5), 2);
  CHECK(b.C0 == doctest::Approx(0.9));
  // Sum over components of max{1, sum |d^a X|}: 6 + |x1|, largest at |x1| = 1.
  CHECK(b.C1 == doctest::Approx(1.1 * 7.0));
  CHECK(b.derivative_order == 5);
  CHECK(b.samples == 125);

  auto inv = oracle::involutive();
  fields::BracketTable ti(inv.spec);
  const auto bi = estimate_bounds(ti, {{1}, {2}}, unit.grid(3), 1);
  CHECK(bi.max_norm == doctest::Approx(6.0));  // every component at the floor of 1

  auto m = oracle::martinet();
  fields::BracketTable tm(m.spec);
  CHECK_THROWS_AS(estimate_bounds(tm, {{1}, {2}, {1, 2}}, unit.grid(5), 3), FrameDeficient);
  const auto bm = estimate_bounds(tm, {{1}, {2}, {1, 1, 2}}, unit.grid(5), 3);
  CHECK(bm.C0 == doctest::Approx(0.9 * 2.0));
}

TEST_CASE("closed-form radius") {
  CHECK(formula_exponent(2, 3) == 2520);
  CHECK(formula_exponent(1, 2) == 240);
  const auto p = paper_radius(1.0, 1.0, 2, 3, 0.5);
  CHECK(p.delta_o == 0.5);
  CHECK(p.r_o == 0.5);
  CHECK(!p.warning.empty());
  const auto q = paper_radius(0.9, 7.7, 2, 3, 0.5);
  CHECK(q.r_o >= 0.0);
  CHECK(std::isfinite(q.log10_r_o));
  CHECK(q.log10_r_o < -1000);
  CHECK_THROWS_AS(paper_radius(0.0, 1.0, 2, 3, 0.5), InvalidArgument);
  CHECK_THROWS_AS(paper_radius(1.0, 0.5, 2, 3, 0.5), InvalidArgument);
  CHECK_THROWS_AS(paper_radius(1.0, 1.0, 2, 3, 1.0), InvalidArgument);
  CHECK_THROWS_AS(paper_radius(1.0, 1.0, 2, 3, 0.5, 0.0), InvalidArgument);
}

TEST_CASE("delta search halves until the hypercube stays in the box") {
  auto h = oracle::heisenberg();
  const auto d = find_delta_max(h.spec, kHeisFrame, vec({1.9, 0, 0}), 0.9);
  CHECK(d.halvings > 0);
  EndpointMap F(h.spec, kHeisFrame, d.delta, vec({1.9, 0, 0}));
  CHECK_NOTHROW(F(Vector::Constant(3, F.half_width())));
  CHECK(default_delta_start(h.spec->box, Vector::Zero(3), 7.7) == doctest::Approx(0.5 * 2 / 8.7));
}

TEST_CASE("direct certificate on Heisenberg") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, kHeisFrame, 0.2, Vector::Zero(3));
  const auto c = certified_radius(F);
  CHECK(c.inverse_norm == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(c.lipschitz == doctest::Approx(1e-9));
  CHECK(c.r_o == doctest::Approx(0.05).epsilon(1e-8));
  CHECK(c.holds());
  CHECK(c.cond1_lhs <= c.cond1_rhs);
}

TEST_CASE("certificates are deterministic and serial equals parallel") {
  auto m = oracle::martinet();
  EndpointMap F(m.spec, {{1}, {2}, {1, 2}}, 0.1, vec({0.3, 0, 0}));
  CertificateOptions a, b;
  a.exec = Execution::kSerial;
  b.exec = Execution::kParallel;
  const auto ca = certified_radius(F, a), cb = certified_radius(F, b);
  CHECK(ca.r_o == cb.r_o);
  CHECK(ca.lipschitz == cb.lipschitz);
  CHECK(ca.r_o > 0.0);
  CHECK(ca.holds());
  const auto probes = probe_certificate(F, ca, 20, 3);
  CHECK(probes.passed());
  CHECK(probes.max_endpoint_error < 1e-6);
}

TEST_CASE("degenerate frames are singular") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, {{1}, {1}, {1, 2}}, 0.2, Vector::Zero(3), {0, 1, 2});
  CHECK_THROWS_AS(certified_radius(F), SingularJacobian);
}

TEST_CASE("steering on Heisenberg") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, kHeisFrame, 0.2, Vector::Zero(3));
  const Vector target = vec({0.01, -0.02, 0.005});
  SteerOptions opts;
  const auto sol = solve_chart(F, target, opts);
  CHECK(sol.iterations == 1);
  const auto path = steer(F, target);
  CHECK(path.endpoint_error() < 1e-9);
  CHECK(path.arcs.size() == 12);
  const auto check = validate_dpath(path, *h.spec);
  CHECK(check.ok());
  const auto still = steer(F, Vector::Zero(3));
  CHECK(still.arcs.empty());
  CHECK(still.endpoint_error() == 0.0);
}

TEST_CASE("steering on Martinet inside the certified ball") {
  auto m = oracle::martinet();
  const Vector y = vec({0.3, 0, 0});
  EndpointMap F(m.spec, {{1}, {2}, {1, 2}}, 0.1, y);
  const auto c = certified_radius(F);
  const auto path = steer(F, y + 0.5 * c.r_o * Vector::Unit(3, 2));
  CHECK(path.endpoint_error() < 1e-6);
  CHECK(validate_dpath(path, *m.spec).ok());
}

TEST_CASE("steering errors") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, kHeisFrame, 0.2, Vector::Zero(3));
  SteerOptions opts;
  opts.max_iter = 30;
  CHECK_THROWS_AS(steer(F, vec({0, 0, 0.5}), opts), HypercubeExhausted);
  auto inv = oracle::involutive();
  EndpointMap G(inv.spec, {{1}, {2}}, 0.2, Vector::Zero(3));
  CHECK_THROWS_AS(steer(G, vec({0.01, 0.01, 0.01})), LeafMismatch);
  const auto ok = steer(G, vec({0.01, 0.01, 0.0}));
  CHECK(ok.endpoint_error() < 1e-8);
  const auto leaf = steer_chart(G, vec({0.02, -0.01}));
  CHECK(std::abs(leaf.endpoint[2]) == 0.0);
}

TEST_CASE("D-path validation catches broken paths") {
  auto h = oracle::heisenberg();
  EndpointMap F(h.spec, kHeisFrame, 0.2, Vector::Zero(3));
  auto path = steer(F, vec({0.01, 0.02, 0.01}));
  REQUIRE(validate_dpath(path, *h.spec).ok());
  auto broken = path;
  broken.arcs[3].start[0] += 1e-15;
  CHECK(!validate_dpath(broken, *h.spec).chained);
  auto wrong = path;
  wrong.arcs[2].generator = wrong.arcs[2].generator == 1 ? 2 : 1;
  CHECK(!validate_dpath(wrong, *h.spec).residual_ok);
  auto missed = path;
  missed.target[2] += 1.0;
  CHECK(!validate_dpath(missed, *h.spec).endpoint_ok);
}

TEST_CASE("CSV and manifest round trip revalidates") {
  auto m = oracle::martinet();
  EndpointMap F(m.spec, {{1}, {2}, {1, 2}}, 0.1, vec({0.3, 0, 0}));
  const auto path = steer(F, vec({0.3, 0.005, 0.004}));
  std::stringstream csv;
  write_csv(path, csv);
  const auto man = manifest(path);
  const std::string header = csv.str().substr(0, csv.str().find('\n'));
  CHECK(header == "arc_index,k,sigma_value,s,x1,x2,x3");
  const auto back = load_dpath(nlohmann::json::parse(man.dump()), csv);
  CHECK(back.arcs.size() == path.arcs.size());
  const auto check = validate_dpath(back, *m.spec);
  CHECK(check.ok());
  CHECK((back.endpoint.array() == path.endpoint.array()).all());
}

TEST_CASE("connect on Heisenberg") {
  auto h = oracle::heisenberg();
  ConnectParams params;
  const auto r = connect(h.spec, Vector::Zero(3), vec({0, 0, 0.3}), params);
  CHECK(r.path.endpoint_error() < 1e-6);
  CHECK(validate_dpath(r.path, *h.spec).ok());
  CHECK(!r.legs.empty());
  const auto same = connect(h.spec, vec({0.1, 0.1, 0.1}), vec({0.1, 0.1, 0.1}), params);
  CHECK(same.path.arcs.empty());
  CHECK(same.legs.empty());
  auto inv = oracle::involutive();
  CHECK_THROWS_AS(connect(inv.spec, Vector::Zero(3), vec({0, 0, 0.1}), params), InvalidArgument);
  ConnectParams tight = params;
  tight.min_radius = 1.0;
  CHECK_THROWS_AS(connect(h.spec, Vector::Zero(3), vec({0, 0, 0.3}), tight), Stalled);
}
