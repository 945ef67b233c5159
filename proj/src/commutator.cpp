#include "bracket_reach/commutator.hpp"

#include <algorithm>
#include <cmath>

#include "bracket_reach/errors.hpp"
#include "bracket_reach/finite_diff.hpp"

namespace bracket_reach::commutator {

using flows::FlowAtom;
using flows::FlowProgram;
using flows::Schedule;

namespace {

void append_G(const fields::BracketWord& w, int from, std::vector<FlowAtom>& out) {
  const int k = w[from];
  if (from == w.length() - 1) {
    out.push_back({k, Schedule::plain(+1.0)});
    return;
  }
  std::vector<FlowAtom> inner;
  append_G(w, from + 1, inner);
  for (auto it = inner.rbegin(); it != inner.rend(); ++it)
    out.push_back({it->generator, it->schedule.negated()});
  out.push_back({k, Schedule::plain(+1.0)});
  out.insert(out.end(), inner.begin(), inner.end());
  out.push_back({k, Schedule::plain(-1.0)});
}

void check_word(const fields::SpecPtr& spec, const fields::BracketWord& w) {
  if (!spec) throw InvalidArgument("null distribution");
  if (w.length() == 0) throw InvalidArgument("empty bracket word");
  w.validate(spec->generator_count());
}

double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

long long flow_count(int r) {
  if (r < 1) throw InvalidArgument("flow_count: word length must be >= 1");
  if (r > 60) throw InvalidArgument("flow_count: word length too large");
  return (1LL << r) + (1LL << (r - 1)) - 2;
}

FlowProgram build_G(const fields::SpecPtr& spec, const fields::BracketWord& w) {
  check_word(spec, w);
  std::vector<FlowAtom> atoms;
  atoms.reserve(static_cast<std::size_t>(flow_count(w.length())));
  append_G(w, 0, atoms);
  return FlowProgram(spec, std::move(atoms));
}

FlowProgram build_g(const fields::SpecPtr& spec, const fields::BracketWord& w) {
  auto G = build_G(spec, w);
  std::vector<FlowAtom> atoms;
  atoms.reserve(G.size());
  for (const auto& a : G.atoms())
    atoms.push_back({a.generator, Schedule::signed_root(a.schedule.sign(), w.length(), 0.0)});
  return FlowProgram(spec, std::move(atoms));
}

FlowProgram build_f(const fields::SpecPtr& spec, const fields::BracketWord& w, double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta))
    throw InvalidArgument("build_f: delta must be positive");
  auto G = build_G(spec, w);
  const int r = w.length();
  const double root = r == 1 ? delta : std::pow(delta, 1.0 / r);
  std::vector<FlowAtom> atoms;
  atoms.reserve(2 * G.size());
  for (const auto& a : G.atoms())
    atoms.push_back({a.generator, Schedule::signed_root(a.schedule.sign(), r, delta)});
  for (auto it = G.atoms().rbegin(); it != G.atoms().rend(); ++it)
    atoms.push_back({it->generator, Schedule::constant(-it->schedule.sign() * root, delta)});
  return FlowProgram(spec, std::move(atoms));
}

double program_delta(const FlowProgram& f) {
  double d = 0.0;
  for (const auto& a : f.atoms()) d = std::max(d, a.schedule.delta());
  return d;
}

double default_taylor_step(int r) { return 0.1 / std::max(1, r); }

bool TaylorReport::passed() const {
  return !orders.empty() &&
         std::all_of(orders.begin(), orders.end(), [](const TaylorOrder& o) { return o.pass; });
}

TaylorReport verify_taylor(const fields::SpecPtr& spec, const fields::BracketWord& w,
                           const Vector& x0, std::optional<double> h, double tol,
                           Execution exec) {
  check_word(spec, w);
  if (x0.size() != spec->dim) throw DimensionMismatch("verify_taylor: point dimension");
  if (!spec->box.contains(x0)) throw InvalidArgument("verify_taylor: x0 outside the domain box");
  const int r = w.length();
  TaylorReport rep;
  rep.word = w;
  rep.x0 = x0;
  rep.h = h.value_or(default_taylor_step(r));
  if (!(rep.h > 0.0)) throw InvalidArgument("verify_taylor: step must be positive");

  fields::BracketTable table(spec);
  rep.bracket = table.get(w)(x0);
  double factorial = 1.0;
  for (int i = 2; i <= r; ++i) factorial *= i;
  const Vector leading = factorial * rep.bracket;
  rep.scale = 1.0 + max_abs(leading);

  const auto G = build_G(spec, w);
  const auto d = numeric::curve_derivatives(
      [&](double t) { return flows::apply_program(G, x0, t, tol); }, r, rep.h, exec);

  for (int m = 1; m <= r; ++m) {
    TaylorOrder o;
    o.order = m;
    o.derivative = d.col(m - 1);
    o.magnitude = max_abs(o.derivative);
    o.target = m == r ? leading : Vector::Zero(x0.size());
    o.error = max_abs(o.derivative - o.target) / rep.scale;
    o.tolerance = m == r ? kLeadingTolerance : kVanishingTolerance;
    o.pass = o.error < o.tolerance;
    rep.orders.push_back(std::move(o));
  }
  return rep;
}

Vector approx_velocity(const FlowProgram& f, const Vector& x0, double tol, Execution exec) {
  const double delta = program_delta(f);
  if (!(delta > 0.0)) throw InvalidArgument("approx_velocity: program was not built by build_f");
  if (x0.size() != f.dim()) throw DimensionMismatch("approx_velocity: point dimension");
  return numeric::curve_velocity([&](double t) { return flows::apply_program(f, x0, t, tol); },
                                 delta / 8.0, exec);
}

}  // namespace bracket_reach::commutator
