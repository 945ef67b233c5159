#include "bracket_reach/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <ostream>
#include <sstream>

#include "bracket_reach/commutator.hpp"
#include "bracket_reach/errors.hpp"
#include "bracket_reach/filtration.hpp"
#include "bracket_reach/reach.hpp"
#include "bracket_reach/scenario.hpp"

namespace bracket_reach::cli {

namespace {

using nlohmann::json;
using reach::round12;
using reach::to_json;

class UsageError : public Error {
 public:
  using Error::Error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string point(const Vector& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

json finite_or_null(double v) { return std::isfinite(v) ? json(round12(v)) : json(nullptr); }

Vector parse_point(const std::string& text, int dim, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || *end != '\0' || !std::isfinite(v))
      throw UsageError(flag + ": malformed coordinate '" + cell + "'");
    values.push_back(v);
  }
  if (static_cast<int>(values.size()) != dim)
    throw UsageError(flag + ": expected " + std::to_string(dim) + " comma-separated coordinates");
  return Eigen::Map<Vector>(values.data(), dim);
}

std::map<std::string, double> parse_params(const std::vector<std::string>& items) {
  std::map<std::string, double> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--param expects name=value, got '" + item + "'");
    char* end = nullptr;
    const std::string value = item.substr(eq + 1);
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') throw UsageError("--param: malformed value in '" + item + "'");
    out[item.substr(0, eq)] = v;
  }
  return out;
}

struct Common {
  std::string scenario;
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> params;
  std::optional<double> rank_tol;
  std::optional<double> tol;
};

struct Context {
  Scenario sc;
  std::uint64_t seed = 1;
  double rank_tol = 1e-8;
  double tol = 1e-8;
  bool json = false;
};

Context make_context(const Common& c) {
  Context ctx;
  try {
    ctx.sc = load_scenario(c.scenario, parse_params(c.params));
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  ctx.seed = c.seed.value_or(ctx.sc.defaults.seed);
  if (const char* env = std::getenv("BRACKET_REACH_SEED")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (*env == '\0' || *end != '\0') throw UsageError("BRACKET_REACH_SEED must be an unsigned integer");
    ctx.seed = v;
  }
  ctx.rank_tol = c.rank_tol.value_or(ctx.sc.defaults.rank_tol);
  ctx.tol = c.tol.value_or(ctx.sc.defaults.tol);
  if (!(ctx.rank_tol > 0.0) || !(ctx.tol > 0.0)) throw UsageError("tolerances must be positive");
  ctx.json = c.json;
  return ctx;
}

json header(const std::string& command, const Context& ctx) {
  json j;
  j["command"] = command;
  j["scenario"] = ctx.sc.name;
  json params = json::object();
  for (const auto& [k, v] : ctx.sc.params) params[k] = round12(v);
  j["params"] = params;
  return j;
}

std::vector<Vector> samples_for(const Context& ctx) {
  const int grid = ctx.sc.defaults.grid;
  return grid == 5 ? filtration::default_samples(ctx.sc.box) : ctx.sc.box.grid(grid);
}

json words_json(const std::vector<fields::BracketWord>& words) {
  auto j = json::array();
  for (const auto& w : words) j.push_back(w.to_string());
  return j;
}

std::string words_text(const std::vector<fields::BracketWord>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w.to_string();
  return s;
}

json certificate_json(const reach::RadiusCertificate& c) {
  return {{"method", c.method},
          {"center", to_json(c.center)},
          {"delta", round12(c.delta)},
          {"r_o", round12(c.r_o)},
          {"inverse_norm", round12(c.inverse_norm)},
          {"lipschitz", round12(c.lipschitz)},
          {"lipschitz_sampled", round12(c.lipschitz_sampled)},
          {"pairs", c.pairs},
          {"rounds", c.rounds},
          {"det_J0", round12(c.det_J0)},
          {"condition_1", {{"lhs", round12(c.cond1_lhs)}, {"rhs", round12(c.cond1_rhs)},
                           {"slack", round12(c.cond1_rhs - c.cond1_lhs)}}},
          {"condition_2", {{"lhs", round12(c.cond2_lhs)}, {"rhs", round12(c.cond2_rhs)},
                           {"slack", round12(c.cond2_rhs - c.cond2_lhs)}}},
          {"holds", c.holds()}};
}

void print_certificate(std::ostream& out, const reach::RadiusCertificate& c) {
  out << "certified radius (direct IFT): r_o = " << num(c.r_o) << "\n"
      << "  delta " << num(c.delta) << ", ||J^-1|| = " << num(c.inverse_norm) << ", det J(0) = "
      << num(c.det_J0) << "\n"
      << "  Lipschitz bound L = " << num(c.lipschitz) << " (sampled " << num(c.lipschitz_sampled)
      << " over " << c.pairs << " pairs, " << c.rounds << " rounds)\n"
      << "  condition 1: 2 r ||J^-1|| = " << num(c.cond1_lhs) << " <= delta/2 = " << num(c.cond1_rhs)
      << "\n"
      << "  condition 2: L = " << num(c.cond2_lhs) << " <= 1/(2 r ||J^-1||^2) = " << num(c.cond2_rhs)
      << "\n";
}

json check_json(const reach::PathCheck& c) {
  return {{"chained", c.chained},
          {"max_residual", round12(c.max_residual)},
          {"residual_bound", round12(reach::kResidualTolerance * c.scale)},
          {"endpoint_error", round12(c.endpoint_error)},
          {"ok", c.ok()}};
}

/// Frame at y for a uniform distribution, or UsageError-free failure.
filtration::FiltrationReport require_uniform(const Context& ctx, int max_length) {
  auto rep = filtration::analyze(ctx.sc.spec, samples_for(ctx), max_length, ctx.rank_tol);
  if (!rep.depth.uniform)
    throw Error("distribution is not of uniform type on the sample grid (mu " +
                (rep.depth.mu ? std::to_string(*rep.depth.mu) : std::string("not stabilized")) + ")");
  return rep;
}

void write_path_files(const std::string& prefix, const reach::DPath& path, const json& manifest) {
  std::ofstream csv(prefix + ".csv");
  if (!csv) throw Error("cannot write " + prefix + ".csv");
  reach::write_csv(path, csv);
  std::ofstream man(prefix + ".json");
  if (!man) throw Error("cannot write " + prefix + ".json");
  man << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_analyze(const Context& ctx, int max_length, std::ostream& out) {
  const auto samples = samples_for(ctx);
  const auto rep = filtration::analyze(ctx.sc.spec, samples, max_length, ctx.rank_tol);
  if (ctx.json) {
    json j = header("analyze", ctx);
    j["max_length"] = max_length;
    j["rank_tol"] = round12(ctx.rank_tol);
    auto rows = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto gaps = json::array();
      for (double g : rep.profiles[i].gaps) gaps.push_back(finite_or_null(g));
      rows.push_back({{"x", to_json(samples[i])}, {"ranks", rep.profiles[i].ranks}, {"gaps", gaps}});
    }
    j["samples"] = rows;
    j["mu"] = rep.depth.mu ? json(*rep.depth.mu) : json(nullptr);
    j["uniform"] = rep.depth.uniform;
    j["M"] = rep.depth.M;
    j["bracket_generating"] = rep.bracket_generating;
    if (rep.frame)
      j["frame"] = {{"point", to_json(rep.frame_point)},
                    {"words", words_json(rep.frame->words)},
                    {"chart_rows", rep.frame->chart_rows},
                    {"det", round12(rep.frame->det)}};
    else
      j["frame"] = nullptr;
    out << j.dump(2) << "\n";
    return kExitOk;
  }
  out << "scenario " << ctx.sc.name << ": N = " << ctx.sc.dim << ", "
      << ctx.sc.spec->generator_count() << " generators\n";
  out << samples.size() << " samples, word length <= " << max_length << ", rank_tol "
      << num(ctx.rank_tol) << "\n";
  out << "sample  point  ranks (l = 1.." << max_length << ")  smallest gap\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out << i << "  " << point(samples[i]) << "  ";
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < rep.profiles[i].ranks.size(); ++l) {
      out << (l ? " " : "") << rep.profiles[i].ranks[l];
      gap = std::min(gap, rep.profiles[i].gaps[l]);
    }
    out << "  " << (std::isfinite(gap) ? num(gap) : "inf") << "\n";
  }
  out << "mu = " << (rep.depth.mu ? std::to_string(*rep.depth.mu) : "not stabilized") << "\n";
  out << "uniform: " << (rep.depth.uniform ? "yes" : "no");
  if (rep.depth.uniform) out << ", M = " << rep.depth.M;
  out << "\nbracket generating: " << (rep.bracket_generating ? "yes" : "no") << "\n";
  if (rep.frame)
    out << "frame at " << point(rep.frame_point) << ": " << words_text(rep.frame->words) << "  (det "
        << num(rep.frame->det) << ")\n";
  return kExitOk;
}

int cmd_verify(const Context& ctx, const std::string& word_text, const std::string& at_text,
               std::optional<double> h, std::ostream& out) {
  fields::BracketWord word;
  try {
    word = fields::BracketWord::parse(word_text);
    word.validate(ctx.sc.spec->generator_count());
  } catch (const Error& e) {
    throw UsageError(std::string("--word: ") + e.what());
  }
  const Vector x0 = parse_point(at_text, ctx.sc.dim, "--at");
  if (h && !(*h > 0.0)) throw UsageError("--h must be positive");
  const auto rep = commutator::verify_taylor(ctx.sc.spec, word, x0, h);
  if (ctx.json) {
    json j = header("verify", ctx);
    j["word"] = word.to_string();
    j["x0"] = to_json(x0);
    j["h"] = round12(rep.h);
    j["bracket"] = to_json(rep.bracket);
    auto rows = json::array();
    for (const auto& o : rep.orders)
      rows.push_back({{"order", o.order},
                      {"derivative", to_json(o.derivative)},
                      {"magnitude", round12(o.magnitude)},
                      {"target", to_json(o.target)},
                      {"error", round12(o.error)},
                      {"tolerance", round12(o.tolerance)},
                      {"pass", o.pass}});
    j["orders"] = rows;
    j["passed"] = rep.passed();
    out << j.dump(2) << "\n";
  } else {
    out << "word " << word.to_string() << " at " << point(x0) << ", h = " << num(rep.h) << "\n";
    out << "bracket X_w(x0) = " << point(rep.bracket) << "\n";
    out << "order  |FD value|  target  rel. error  verdict\n";
    for (const auto& o : rep.orders)
      out << o.order << "  " << num(o.magnitude) << "  " << point(o.target) << "  " << num(o.error)
          << "  " << (o.pass ? "PASS" : "FAIL") << "\n";
  }
  return rep.passed() ? kExitOk : kExitFailure;
}

struct RadiusFlags {
  std::string at;
  std::optional<double> delta;
  std::optional<double> region;
  int probes = 20;
  double K = 1.0;
  double K_prime = 1.0;
};

int cmd_radius(const Context& ctx, const RadiusFlags& f, int max_length, std::ostream& out) {
  const auto rep = require_uniform(ctx, max_length);
  const int mu = *rep.depth.mu, M = rep.depth.M;
  const Vector y = f.at.empty() ? rep.frame_point : parse_point(f.at, ctx.sc.dim, "--at");
  if (!ctx.sc.box.contains(y)) throw UsageError("--at lies outside the scenario box");
  if (f.probes < 0) throw UsageError("--probes must be >= 0");
  fields::BracketTable table(ctx.sc.spec);
  const auto frame = filtration::select_frame(table, y, mu, M, ctx.rank_tol);

  // Bounds over a small cube around y (clipped to the box).
  const double rho = f.region.value_or(0.25);
  if (!(rho > 0.0)) throw UsageError("--region must be positive");
  fields::Box region{(y.array() - rho).max(ctx.sc.box.lower.array()).matrix(),
                     (y.array() + rho).min(ctx.sc.box.upper.array()).matrix()};
  std::optional<reach::BoundsEstimate> bounds;
  std::string bounds_note;
  try {
    bounds = reach::estimate_bounds(table, frame.words, region.grid(5), mu, ctx.rank_tol);
  } catch (const FrameDeficient& e) {
    bounds_note = e.what();
  }
  const double start =
      f.delta.value_or(reach::default_delta_start(ctx.sc.box, y, bounds ? bounds->C1 : 1.0));
  if (!(start > 0.0)) throw UsageError("--delta must be positive");
  const auto search = reach::find_delta_max(ctx.sc.spec, frame.words, y, start, frame.chart_rows);
  std::optional<reach::PaperRadius> paper;
  if (bounds && search.delta < 1.0)
    paper = reach::paper_radius(bounds->C0, bounds->C1, mu, M, search.delta, f.K, f.K_prime);

  const reach::EndpointMap map(ctx.sc.spec, frame.words, search.delta, y, frame.chart_rows);
  reach::CertificateOptions copts;
  copts.seed = ctx.seed;
  const auto cert = reach::certified_radius(map, copts);
  reach::SteerOptions sopts;
  sopts.tol = ctx.tol;
  const auto probes = f.probes > 0 ? reach::probe_certificate(map, cert, f.probes, ctx.seed + 1, 0.9, sopts)
                                   : reach::ProbeReport{};
  const bool ok = cert.holds() && (f.probes == 0 || probes.passed());

  if (ctx.json) {
    json j = header("radius", ctx);
    j["center"] = to_json(y);
    j["mu"] = mu;
    j["M"] = M;
    j["frame"] = words_json(frame.words);
    j["chart_rows"] = frame.chart_rows;
    j["delta"] = {{"start", round12(start)}, {"used", round12(search.delta)}, {"halvings", search.halvings}};
    if (bounds)
      j["bounds"] = {{"C0", round12(bounds->C0)},
                     {"C1", round12(bounds->C1)},
                     {"derivative_order", bounds->derivative_order},
                     {"samples", bounds->samples},
                     {"region", {{"lower", to_json(region.lower)}, {"upper", to_json(region.upper)}}},
                     {"max_with_one", bounds->max_with_one}};
    else
      j["bounds"] = {{"unavailable", bounds_note}};
    if (paper)
      j["paper_formula"] = {{"method", "paper-formula"},
                            {"N", paper->N},
                            {"delta_o", round12(paper->delta_o)},
                            {"r_o", round12(paper->r_o)},
                            {"log10_delta_o", round12(paper->log10_delta_o)},
                            {"log10_r_o", round12(paper->log10_r_o)},
                            {"K", round12(paper->K)},
                            {"K_prime", round12(paper->K_prime)},
                            {"warning", paper->warning}};
    else
      j["paper_formula"] = nullptr;
    j["certificate"] = certificate_json(cert);
    j["probes"] = {{"fraction", 0.9},
                   {"attempted", probes.attempted},
                   {"succeeded", probes.succeeded},
                   {"max_endpoint_error", round12(probes.max_endpoint_error)},
                   {"failures", probes.failures}};
    j["ok"] = ok;
    out << j.dump(2) << "\n";
  } else {
    out << "centre " << point(y) << ", mu = " << mu << ", M = " << M << ", frame "
        << words_text(frame.words) << "\n";
    out << "delta: start " << num(start) << ", used " << num(search.delta) << " after "
        << search.halvings << " halvings\n";
    if (bounds)
      out << "bounds on " << point(region.lower) << " .. " << point(region.upper) << ": C0 = "
          << num(bounds->C0) << ", C1 = " << num(bounds->C1) << "\n";
    else
      out << "bounds unavailable: " << bounds_note << "\n";
    if (paper)
      out << "closed-form radius: N(mu, M) = " << paper->N << ", delta_o = " << num(paper->delta_o)
          << " (log10 " << num(paper->log10_delta_o) << "), r_o = " << num(paper->r_o) << " (log10 "
          << num(paper->log10_r_o) << ")\n  warning: " << paper->warning << "\n";
    print_certificate(out, cert);
    if (f.probes > 0) {
      out << "probes at 0.9 r_o: " << probes.succeeded << "/" << probes.attempted
          << " reached, max endpoint error " << num(probes.max_endpoint_error) << "\n";
      for (const auto& m : probes.failures) out << "  " << m << "\n";
    }
  }
  return ok ? kExitOk : kExitFailure;
}

struct PathFlags {
  std::string from;
  std::string to;
  std::optional<double> delta;
  std::optional<double> min_radius;
  int max_iter = 50;
  std::string out = "dpath";
  bool no_files = false;
};

int finish_path(const Context& ctx, const std::string& command, const reach::DPath& path,
                json extra, const PathFlags& f, std::ostream& out) {
  const auto check = reach::validate_dpath(path, *ctx.sc.spec);
  json man = header(command, ctx);
  man.update(reach::manifest(path));
  man.update(extra);
  man["validation"] = check_json(check);
  if (!f.no_files) write_path_files(f.out, path, man);
  if (ctx.json) {
    out << man.dump(2) << "\n";
  } else {
    out << command << " " << point(path.start) << " -> " << point(path.target) << "\n";
    out << path.arcs.size() << " arcs, endpoint " << point(path.endpoint) << ", endpoint error "
        << num(path.endpoint_error()) << " (tol " << num(path.tol) << ")\n";
    out << "validation: chaining " << (check.chained ? "exact" : "BROKEN") << ", max ODE residual "
        << num(check.max_residual) << " (bound " << num(reach::kResidualTolerance * check.scale)
        << "), " << (check.ok() ? "ok" : "FAILED") << "\n";
    if (!f.no_files) out << "wrote " << f.out << ".csv and " << f.out << ".json\n";
  }
  return check.ok() ? kExitOk : kExitFailure;
}

int cmd_steer(const Context& ctx, const PathFlags& f, int max_length, std::ostream& out) {
  const Vector from = parse_point(f.from, ctx.sc.dim, "--from");
  const Vector to = parse_point(f.to, ctx.sc.dim, "--to");
  if (!ctx.sc.box.contains(from)) throw UsageError("--from lies outside the scenario box");
  if (f.max_iter < 1) throw UsageError("--max-iter must be >= 1");
  const auto rep = require_uniform(ctx, max_length);
  fields::BracketTable table(ctx.sc.spec);
  const auto frame = filtration::select_frame(table, from, *rep.depth.mu, rep.depth.M, ctx.rank_tol);
  const double start = f.delta.value_or(ctx.sc.defaults.delta);
  if (!(start > 0.0)) throw UsageError("--delta must be positive");
  const auto search = reach::find_delta_max(ctx.sc.spec, frame.words, from, start, frame.chart_rows);
  const reach::EndpointMap map(ctx.sc.spec, frame.words, search.delta, from, frame.chart_rows);
  reach::CertificateOptions copts;
  copts.seed = ctx.seed;
  const auto cert = reach::certified_radius(map, copts);
  reach::SteerOptions sopts;
  sopts.tol = ctx.tol;
  sopts.max_iter = f.max_iter;
  const auto path = reach::steer(map, to, sopts);
  json extra = {{"frame", words_json(frame.words)},
                {"delta", round12(search.delta)},
                {"certificate", certificate_json(cert)},
                {"target_within_certified_ball", (to - from).norm() <= cert.r_o}};
  return finish_path(ctx, "steer", path, extra, f, out);
}

int cmd_connect(const Context& ctx, const PathFlags& f, int max_length, std::ostream& out) {
  const Vector from = parse_point(f.from, ctx.sc.dim, "--from");
  const Vector to = parse_point(f.to, ctx.sc.dim, "--to");
  if (!ctx.sc.box.contains(from) || !ctx.sc.box.contains(to))
    throw UsageError("--from and --to must lie in the scenario box");
  reach::ConnectParams p;
  p.delta = f.delta.value_or(ctx.sc.defaults.delta);
  p.tol = ctx.tol;
  p.min_radius = f.min_radius.value_or(p.min_radius);
  p.max_length = max_length;
  p.rank_tol = ctx.rank_tol;
  p.seed = ctx.seed;
  if (!(p.delta > 0.0) || !(p.min_radius > 0.0)) throw UsageError("--delta and --min-radius must be positive");
  const auto res = reach::connect(ctx.sc.spec, from, to, p);
  auto legs = json::array();
  for (const auto& leg : res.legs)
    legs.push_back({{"from", to_json(leg.from)},
                    {"waypoint", to_json(leg.waypoint)},
                    {"frame", words_json(leg.frame)},
                    {"delta", round12(leg.delta)},
                    {"certificate", certificate_json(leg.certificate)}});
  return finish_path(ctx, "connect", res.path, {{"legs", legs}}, f, out);
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("scenario", c.scenario, "Built-in scenario name or scenario file")->required();
  sub->add_flag("--json", c.json, "Emit a machine-readable JSON report");
  sub->add_option("--seed", c.seed, "RNG seed (BRACKET_REACH_SEED overrides)");
  sub->add_option("--param", c.params, "Override a scenario parameter, name=value")->take_all();
  sub->add_option("--rank-tol", c.rank_tol, "Relative singular-value threshold for ranks");
  sub->add_option("--tol", c.tol, "Steering tolerance");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bracket filtrations, commutator flows and certified reachable sets",
               "bracket-reach"};
  app.require_subcommand(1);
  Common common;
  std::optional<int> lmax;
  std::string word, at;
  std::optional<double> h;
  RadiusFlags rf;
  PathFlags pf;

  auto* analyze = app.add_subcommand("analyze", "Bracket filtration ranks, minimal depth and frame");
  add_common(analyze, common);
  analyze->add_option("--lmax", lmax, "Longest bracket word")->check(CLI::Range(1, 12));

  auto* verify = app.add_subcommand("verify", "Taylor check of a commutator flow");
  verify->set_help_flag("--help", "Print this help message and exit");
  add_common(verify, common);
  verify->add_option("--word", word, "Bracket word, e.g. 1,1,2")->required();
  verify->add_option("--at", at, "Base point, comma separated")->required();
  verify->add_option("--h", h, "Finite-difference step");

  auto* radius = app.add_subcommand("radius", "Reachable-ball radius at a point");
  add_common(radius, common);
  radius->add_option("--at", rf.at, "Centre (default: box centre)");
  radius->add_option("--delta", rf.delta, "Starting delta for the escape search");
  radius->add_option("--region", rf.region, "Half-width of the cube used for C0, C1");
  radius->add_option("--probes", rf.probes, "Random probe targets at 0.9 r_o");
  radius->add_option("--K", rf.K, "Constant K of the closed-form radius");
  radius->add_option("--Kprime", rf.K_prime, "Constant K' of the closed-form radius");
  radius->add_option("--lmax", lmax, "Longest bracket word")->check(CLI::Range(1, 12));

  auto* steer = app.add_subcommand("steer", "Steer to a nearby point with one endpoint map");
  auto* connect = app.add_subcommand("connect", "Chain certified steps between two points");
  for (auto* sub : {steer, connect}) {
    add_common(sub, common);
    sub->add_option("--from", pf.from, "Start point")->required();
    sub->add_option("--to", pf.to, "Target point")->required();
    sub->add_option("--delta", pf.delta, "Shift delta of the commutator families");
    sub->add_option("--out", pf.out, "Output prefix for <prefix>.csv and <prefix>.json");
    sub->add_flag("--no-files", pf.no_files, "Do not write the path files");
    sub->add_option("--lmax", lmax, "Longest bracket word")->check(CLI::Range(1, 12));
  }
  steer->add_option("--max-iter", pf.max_iter, "Newton iteration limit");
  connect->add_option("--min-radius", pf.min_radius, "Stop when the certified radius drops below");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    const Context ctx = make_context(common);
    const int max_length = lmax.value_or(ctx.sc.defaults.max_length);
    if (analyze->parsed()) return cmd_analyze(ctx, max_length, out);
    if (verify->parsed()) return cmd_verify(ctx, word, at, h, out);
    if (radius->parsed()) return cmd_radius(ctx, rf, max_length, out);
    if (steer->parsed()) return cmd_steer(ctx, pf, max_length, out);
    if (connect->parsed()) return cmd_connect(ctx, pf, max_length, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnknownScenario& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: scenario: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace bracket_reach::cli
