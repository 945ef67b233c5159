// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "bracket_reach/commutator.hpp"
#include "bracket_reach/errors.hpp"
#include "bracket_reach/filtration.hpp"
#include "bracket_reach/reach.hpp"
#include "bracket_reach/scenario.hpp"
#include "oracles.hpp"

using namespace bracket_reach;
using fields::BracketWord;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a failed sub-check; the first few are kept in the detail text.
  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass || failures < 3) detail << " [" << what << "]";
    pass = false;
    ++failures;
  }
  int failures = 0;
};

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

std::string word_text(const BracketWord& w) { return w.to_string(); }

// --- 1 ----------------------------------------------------------------------

void flow_counts(Outcome& o) {
  const long long expected[] = {1, 4, 10, 22};
  for (int r = 1; r <= 4; ++r)
    o.require(commutator::flow_count(r) == expected[r - 1], "flow_count(" + std::to_string(r) + ")");
  int words = 0;
  for (int p = 1; p <= 3; ++p) {
    std::vector<oracle::PolyField> gens;
    for (int k = 0; k < p; ++k) {
      oracle::PolyField f(3);
      f[static_cast<std::size_t>(k)] = oracle::Poly::constant(1.0);
      gens.push_back(f);
    }
    const auto ps = oracle::make_spec("gens", gens, 2.0);
    for (const auto& w : fields::enumerate_words(p, 4)) {
      const auto G = commutator::build_G(ps.spec, w);
      // Independent count: G_w has 2 G_(w') and 2 single flows, G_(i) one.
      long long n = 1;
      for (int r = 2; r <= w.length(); ++r) n = 2 * n + 2;
      o.require(static_cast<long long>(G.size()) == n, "atoms of " + word_text(w));
      ++words;
    }
  }
  o.detail << " flow_count(1..4) = 1 4 10 22; " << words << " words checked";
}

// --- 2 ----------------------------------------------------------------------

void taylor_suite(Outcome& o) {
  std::vector<std::pair<std::string, oracle::PolySpec>> specs{
      {"heisenberg", oracle::heisenberg()}, {"martinet", oracle::martinet()}, {"engel", oracle::engel()}};
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    specs.emplace_back("cubic" + std::to_string(seed), oracle::random_cubic(seed));
  std::mt19937_64 rng(2024);
  int checks = 0;
  double worst_vanishing = 0.0, worst_leading = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& [name, ps] : specs) {
    const int p = static_cast<int>(ps.gens.size());
    const int dim = ps.spec->dim;
    for (int point = 0; point < 2; ++point) {
      const Vector x0 = oracle::random_point_in_ball(rng, dim, 0.5);
      for (const auto& w : fields::enumerate_words(p, 3)) {
        const int r = w.length();
        const auto rep = commutator::verify_taylor(ps.spec, w, x0);
        // Target from exact polynomial brackets, independent of the library.
        const Vector bracket = oracle::evaluate(oracle::nested(ps.gens, w.indices()), x0);
        const Vector target = std::tgamma(r + 1.0) * bracket;
        const double scale = 1.0 + max_abs(target);
        for (const auto& ord : rep.orders) {
          if (ord.order < r) {
            const double e = max_abs(ord.derivative) / scale;
            worst_vanishing = std::max(worst_vanishing, e);
            o.require(e < 1e-3, name + " " + word_text(w) + " order " + std::to_string(ord.order));
          } else {
            const double e = max_abs(ord.derivative - target) / scale;
            worst_leading = std::max(worst_leading, e);
            o.require(e < 1e-2, name + " " + word_text(w) + " leading order");
          }
        }
        o.require(static_cast<int>(rep.orders.size()) == r, name + " order count");
        ++checks;
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs <= 30.0, "runtime over 30 s");
  o.detail << " " << checks << " (spec, word, point) checks; worst vanishing " << worst_vanishing
           << ", worst leading " << worst_leading << ", " << secs << " s";
}

// --- 3 ----------------------------------------------------------------------

void heisenberg_closed_form(Outcome& o) {
  const auto h = oracle::heisenberg();
  std::mt19937_64 rng(3);
  double worst = 0.0;
  const std::vector<double> grid{-0.25, -0.125, 0.0, 0.125, 0.25};
  for (int i = 0; i < 10; ++i) {
    const Vector x = oracle::random_point_in_ball(rng, 3, 1.0);
    for (double t : grid) {
      const Vector G = flows::apply_program(commutator::build_G(h.spec, {1, 2}), x, t);
      worst = std::max(worst, max_abs(G - (x + t * t * Vector::Unit(3, 2))));
    }
  }
  const std::vector<BracketWord> frame{{1}, {2}, {1, 2}};
  int evaluations = 0;
  for (double delta : {0.1, 0.2, 0.5}) {
    const reach::EndpointMap F(h.spec, frame, delta, Vector::Zero(3));
    for (double a : grid)
      for (double b : grid)
        for (double c : grid) {
          // The shifted bracket family needs s + delta > 0.
          if (c <= -delta) continue;
          const Vector s = vec({a, b, c});
          worst = std::max(worst, max_abs(F(s) - s));
          ++evaluations;
        }
  }
  o.require(worst <= 1e-8, "closed form deviation");
  o.detail << " max deviation " << worst << " over 50 G evaluations and " << evaluations
           << " endpoint evaluations";
}

// --- 4 ----------------------------------------------------------------------

void filtration_tables(Outcome& o) {
  struct Case {
    std::string name;
    int mu, M;
  };
  for (const Case& c : {Case{"heisenberg", 2, 3}, Case{"martinet", 3, 3}, Case{"engel", 3, 4},
                        Case{"involutive2", 1, 2}}) {
    const auto sc = cli::load_scenario(c.name);
    const auto samples = filtration::default_samples(sc.box);
    const int L = sc.dim == 4 ? 4 : 3;
    const auto rep = filtration::analyze(sc.spec, samples, L, 1e-8);
    o.require(rep.depth.mu && *rep.depth.mu == c.mu, c.name + " mu");
    o.require(rep.depth.uniform && rep.depth.M == c.M, c.name + " M");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& ranks = rep.profiles[i].ranks;
      std::vector<int> want;
      if (c.name == "heisenberg") want = {2, 3, 3};
      if (c.name == "involutive2") want = {2, 2, 2};
      if (c.name == "martinet") want = samples[i][0] == 0.0 ? std::vector<int>{2, 2, 3} : std::vector<int>{2, 3, 3};
      if (c.name == "engel") want = {2, 3, 4, 4};
      o.require(ranks == want, c.name + " ranks at sample " + std::to_string(i));
    }
    o.detail << " " << c.name << ": mu " << (rep.depth.mu ? *rep.depth.mu : -1) << " M " << rep.depth.M
             << " (" << samples.size() << " points);";
  }
}

// --- 5 ----------------------------------------------------------------------

void delta_slope(Outcome& o) {
  const auto m = oracle::martinet();
  const Vector x0 = vec({0.5, 0.0, 0.0});
  const Vector bracket = oracle::evaluate(oracle::nested(m.gens, {1, 2}), x0);
  std::vector<double> lx, ly;
  for (double delta : {0.2, 0.1, 0.05, 0.025}) {
    const Vector v = commutator::approx_velocity(commutator::build_f(m.spec, {1, 2}, delta), x0);
    lx.push_back(std::log(delta));
    ly.push_back(std::log((v - bracket).norm()));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  o.require(std::abs(slope - 0.5) <= 0.3, "slope out of range");
  o.detail << " fitted slope " << slope;
}

// --- 6 ----------------------------------------------------------------------

void radius_soundness(Outcome& o) {
  int probes_total = 0;
  double worst_error = 0.0, smallest_r = 1e300;
  for (const auto& name : cli::builtin_names()) {
    const auto sc = cli::load_scenario(name);
    const auto rep = filtration::analyze(sc.spec, filtration::default_samples(sc.box), 4, 1e-8);
    if (!rep.depth.uniform) {
      o.require(false, name + " not uniform");
      continue;
    }
    fields::BracketTable table(sc.spec);
    std::mt19937_64 rng(600 + probes_total);
    double scenario_min = 1e300;
    for (int k = 0; k < 3; ++k) {
      const Vector y = oracle::random_point_in_ball(rng, sc.dim, 0.5);
      const std::string tag = name + " centre " + std::to_string(k);
      try {
        const auto frame = filtration::select_frame(table, y, *rep.depth.mu, rep.depth.M, 1e-8);
        const auto search = reach::find_delta_max(sc.spec, frame.words, y, 0.2, frame.chart_rows);
        const reach::EndpointMap map(sc.spec, frame.words, search.delta, y, frame.chart_rows);
        reach::CertificateOptions copts;
        copts.seed = 17 + static_cast<std::uint64_t>(k);
        const auto cert = reach::certified_radius(map, copts);
        std::ostringstream why;
        why << tag << " certificate at " << y.transpose() << ": r_o " << cert.r_o << ", delta "
            << cert.delta << ", A " << cert.inverse_norm << ", L " << cert.lipschitz;
        o.require(cert.r_o > 0.0 && cert.holds(), why.str());
        smallest_r = std::min(smallest_r, cert.r_o);
        scenario_min = std::min(scenario_min, cert.r_o);
        const Vector z0 = map.chart(y);
        for (int i = 0; i < 20; ++i) {
          Vector dir(map.M());
          std::normal_distribution<double> g;
          for (int j = 0; j < map.M(); ++j) dir[j] = g(rng);
          const Vector z = z0 + 0.9 * cert.r_o * dir.normalized();
          try {
            double err;
            if (map.M() == map.N()) {
              Vector target(map.N());
              for (int j = 0; j < map.M(); ++j) target[frame.chart_rows[static_cast<std::size_t>(j)]] = z[j];
              const auto path = reach::steer(map, target, {});
              err = (path.endpoint - target).norm();
            } else {
              const auto path = reach::steer_chart(map, z, {});
              err = (map.chart(path.endpoint) - z).norm();
            }
            worst_error = std::max(worst_error, err);
            o.require(err < 1e-6, tag + " probe error");
          } catch (const Error& e) {
            o.require(false, tag + " probe " + std::to_string(i) + ": " + e.what());
          }
          ++probes_total;
        }
      } catch (const Error& e) {
        o.require(false, tag + ": " + e.what());
      }
    }
    o.detail << " " << name << " min r_o " << scenario_min << ";";
  }
  o.detail << " " << probes_total << " probes; smallest r_o " << smallest_r << ", worst endpoint error "
           << worst_error;
}

// --- 7 ----------------------------------------------------------------------

void formula(Outcome& o) {
  o.require(reach::formula_exponent(2, 3) == 2520, "N(2,3)");
  o.require(reach::formula_exponent(1, 2) == 240, "N(1,2)");
  const std::vector<double> c0{0.1, 0.25, 0.5, 0.75, 1.0};
  const std::vector<double> c1{1.0, 2.0, 4.0, 8.0, 16.0};
  auto log_r = [](double a, double b) { return reach::paper_radius(a, b, 1, 2, 0.5).log10_r_o; };
  int comparisons = 0;
  for (std::size_t i = 0; i < c0.size(); ++i)
    for (std::size_t j = 0; j < c1.size(); ++j) {
      if (i + 1 < c0.size()) {
        o.require(log_r(c0[i + 1], c1[j]) >= log_r(c0[i], c1[j]), "not increasing in C0");
        ++comparisons;
      }
      if (j + 1 < c1.size()) {
        o.require(log_r(c0[i], c1[j + 1]) <= log_r(c0[i], c1[j]), "not decreasing in C1");
        ++comparisons;
      }
    }
  o.detail << " N(2,3) = " << reach::formula_exponent(2, 3) << ", N(1,2) = "
           << reach::formula_exponent(1, 2) << "; " << comparisons << " monotonicity comparisons";
}

// --- 8 ----------------------------------------------------------------------

bool revalidates(const reach::DPath& path, const fields::DistributionSpec& spec) {
  std::stringstream csv;
  reach::write_csv(path, csv);
  const auto back = reach::load_dpath(reach::manifest(path), csv);
  return reach::validate_dpath(back, spec).ok();
}

double shoelace(const reach::DPath& path) {
  double area = 0.0;
  for (const auto& arc : path.arcs)
    for (std::size_t i = 0; i + 1 < arc.samples.size(); ++i) {
      const Vector& a = arc.samples[i].x;
      const Vector& b = arc.samples[i + 1].x;
      area += 0.5 * (a[0] * b[1] - b[0] * a[1]);
    }
  return area;
}

void connectivity(Outcome& o) {
  const auto h = cli::load_scenario("heisenberg");
  std::mt19937_64 rng(8);
  std::size_t legs = 0, arcs = 0;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const Vector a = oracle::random_point_in_ball(rng, 3, 1.0);
    const Vector b = oracle::random_point_in_ball(rng, 3, 1.0);
    const std::string tag = "pair " + std::to_string(i);
    try {
      reach::ConnectParams params;
      params.seed = static_cast<std::uint64_t>(i + 1);
      const auto r = reach::connect(h.spec, a, b, params);
      const double err = (r.path.endpoint - b).norm();
      worst = std::max(worst, err);
      o.require(err < 1e-6, tag + " endpoint error");
      o.require(reach::validate_dpath(r.path, *h.spec).ok(), tag + " validation");
      o.require(revalidates(r.path, *h.spec), tag + " CSV revalidation");
      legs += r.legs.size();
      arcs += r.path.arcs.size();
    } catch (const Error& e) {
      o.require(false, tag + ": " + e.what());
    }
  }
  o.detail << " 10 pairs, " << legs << " legs, " << arcs << " arcs, worst endpoint error " << worst << ";";
  const std::vector<BracketWord> frame{{1}, {2}, {1, 2}};
  const reach::EndpointMap map(h.spec, frame, 0.5, Vector::Zero(3));
  for (double c : {0.01, 0.05}) {
    try {
      const auto path = reach::steer(map, vec({0.0, 0.0, c}), {});
      const double area = shoelace(path);
      o.require(std::abs(area - c) <= 0.02 * c, "area for c = " + std::to_string(c));
      o.require(reach::validate_dpath(path, *h.spec).ok(), "area path validation");
      o.detail << " area(c=" << c << ") = " << area;
    } catch (const Error& e) {
      o.require(false, std::string("area steer: ") + e.what());
    }
  }
}

// --- 9 ----------------------------------------------------------------------

void perturbed_contact(Outcome& o) {
  std::vector<double> base_r;
  double worst_ratio = 0.0;
  for (double lambda : {0.0, 0.02, 0.05}) {
    const auto sc = cli::load_scenario("contact-perturbed", {{"lambda", lambda}});
    std::mt19937_64 rng(9);
    for (int i = 0; i < 5; ++i) {
      const Vector a = oracle::random_point_in_ball(rng, 3, 1.0);
      const Vector b = oracle::random_point_in_ball(rng, 3, 1.0);
      const std::string tag = "lambda " + std::to_string(lambda) + " pair " + std::to_string(i);
      try {
        reach::ConnectParams params;
        params.seed = static_cast<std::uint64_t>(i + 1);
        const auto r = reach::connect(sc.spec, a, b, params);
        o.require((r.path.endpoint - b).norm() < 1e-6, tag + " endpoint error");
        o.require(reach::validate_dpath(r.path, *sc.spec).ok(), tag + " validation");
        const double r0 = r.legs.empty() ? 0.0 : r.legs.front().certificate.r_o;
        if (lambda == 0.0) {
          base_r.push_back(r0);
        } else {
          const double ratio = std::abs(r0 - base_r[static_cast<std::size_t>(i)]) / base_r[static_cast<std::size_t>(i)];
          worst_ratio = std::max(worst_ratio, ratio);
          o.require(ratio <= 0.5, tag + " r_o drift");
        }
      } catch (const Error& e) {
        o.require(false, tag + ": " + e.what());
        if (lambda == 0.0) base_r.push_back(NAN);
      }
    }
  }
  o.detail << " 15 connections; largest relative change of the first-leg r_o " << worst_ratio;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"flow-count exactness", flow_counts},
      {"commutator Taylor suite", taylor_suite},
      {"Heisenberg closed forms", heisenberg_closed_form},
      {"filtration tables", filtration_tables},
      {"delta convergence slope", delta_slope},
      {"radius certificate soundness", radius_soundness},
      {"closed-form radius exponent and monotonicity", formula},
      {"Heisenberg connectivity and signed area", connectivity},
      {"perturbed contact robustness", perturbed_contact},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("uncaught: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s): %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
