#include "bracket_reach/dpath.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "bracket_reach/errors.hpp"

namespace bracket_reach::reach {

void DPath::append(const DPath& next) {
  if (start.size() == 0) {
    *this = next;
    return;
  }
  if (next.arcs.empty()) return;
  if (!(next.arcs.front().start.array() == endpoint.array()).all())
    throw InvalidArgument("DPath::append: paths do not chain");
  arcs.insert(arcs.end(), next.arcs.begin(), next.arcs.end());
  endpoint = next.endpoint;
}

DPath build_dpath(const flows::FlowProgram& realized, const Vector& start, const Vector& target,
                  double tol, double integrator_tol) {
  DPath path;
  path.start = start;
  path.target = target;
  path.tol = tol;
  Vector x = start;
  if (!realized.empty()) {
    const auto durations = realized.durations(0.0);
    const auto& spec = *realized.spec();
    for (std::size_t j = 0; j < realized.size(); ++j) {
      Arc arc;
      arc.generator = realized.atoms()[j].generator;
      arc.duration = durations[j];
      arc.start = x;
      const int intervals = static_cast<int>(std::clamp(
          std::ceil(std::abs(arc.duration) / kMaxSampleSpacing), double{kMinArcIntervals}, 1e7));
      try {
        arc.samples = flows::integrate_flow_sampled(spec.generator(arc.generator), spec.box, x,
                                                    arc.duration, intervals, integrator_tol);
      } catch (DomainEscape& e) {
        e.atom = j;
        throw;
      }
      arc.end = arc.samples.back().x;
      x = arc.end;
      path.arcs.push_back(std::move(arc));
    }
  }
  path.endpoint = x;
  return path;
}

PathCheck validate_dpath(const DPath& path, const fields::DistributionSpec& spec) {
  PathCheck check;
  double biggest = path.start.size() ? path.start.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& arc : path.arcs)
    for (const auto& s : arc.samples) biggest = std::max(biggest, s.x.cwiseAbs().maxCoeff());
  check.scale = 1.0 + biggest;

  Vector prev_end = path.start;
  for (const auto& arc : path.arcs) {
    if (arc.samples.empty() || !(arc.start.array() == prev_end.array()).all() ||
        !(arc.samples.front().x.array() == arc.start.array()).all() ||
        !(arc.samples.back().x.array() == arc.end.array()).all())
      check.chained = false;
    prev_end = arc.end;
    const auto n = arc.samples.size();
    // Arcs this short carry no usable derivative information.
    if (n < 5 || std::abs(arc.duration) < 1e-9) continue;
    const double ds = (arc.samples.back().s - arc.samples.front().s) / static_cast<double>(n - 1);
    const auto& X = spec.generator(arc.generator);
    for (std::size_t i = 2; i + 2 < n; ++i) {
      const Vector xdot = (arc.samples[i - 2].x - 8.0 * arc.samples[i - 1].x +
                           8.0 * arc.samples[i + 1].x - arc.samples[i + 2].x) /
                          (12.0 * ds);
      check.max_residual =
          std::max(check.max_residual, (xdot - X(arc.samples[i].x)).cwiseAbs().maxCoeff());
    }
  }
  if (!(prev_end.array() == path.endpoint.array()).all()) check.chained = false;
  check.residual_ok = check.max_residual < kResidualTolerance * check.scale;
  check.endpoint_error = path.endpoint_error();
  check.endpoint_ok = check.endpoint_error < path.tol;
  return check;
}

namespace {

void put17(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out << buf;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw InvalidArgument("malformed number '" + s + "' in path CSV");
  return v;
}

}  // namespace

void write_csv(const DPath& path, std::ostream& out) {
  out << "arc_index,k,sigma_value,s";
  for (int i = 1; i <= path.dim(); ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t a = 0; a < path.arcs.size(); ++a) {
    const auto& arc = path.arcs[a];
    for (const auto& s : arc.samples) {
      out << a << ',' << arc.generator << ',';
      put17(out, arc.duration);
      out << ',';
      put17(out, s.s);
      for (Eigen::Index i = 0; i < s.x.size(); ++i) {
        out << ',';
        put17(out, s.x[i]);
      }
      out << '\n';
    }
  }
}

std::vector<Arc> read_csv(std::istream& in, int dim) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty path CSV", 1, 1);
  std::vector<Arc> arcs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 4 + dim)
      throw ParseError("path CSV row has " + std::to_string(cells.size()) + " columns", lineno, 1);
    const auto index = static_cast<std::size_t>(std::stoul(cells[0]));
    if (index == arcs.size()) {
      Arc arc;
      arc.generator = std::stoi(cells[1]);
      arc.duration = parse_double(cells[2]);
      arcs.push_back(std::move(arc));
    } else if (index + 1 != arcs.size()) {
      throw ParseError("path CSV arcs out of order", lineno, 1);
    }
    flows::FlowSample sample;
    sample.s = parse_double(cells[3]);
    sample.x.resize(dim);
    for (int i = 0; i < dim; ++i) sample.x[i] = parse_double(cells[static_cast<std::size_t>(4 + i)]);
    arcs.back().samples.push_back(std::move(sample));
  }
  for (auto& arc : arcs) {
    arc.start = arc.samples.front().x;
    arc.end = arc.samples.back().x;
  }
  return arcs;
}

double round12(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

nlohmann::json to_json(const Vector& v) {
  auto j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(round12(v[i]));
  return j;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

nlohmann::json manifest(const DPath& path) {
  nlohmann::json m;
  m["dim"] = path.dim();
  m["start"] = to_json(path.start);
  m["target"] = to_json(path.target);
  m["endpoint"] = to_json(path.endpoint);
  m["endpoint_error"] = round12(path.endpoint_error());
  m["tol"] = round12(path.tol);
  auto arcs = nlohmann::json::array();
  for (const auto& a : path.arcs)
    arcs.push_back({{"k", a.generator},
                    {"duration", round12(a.duration)},
                    {"samples", a.samples.size()}});
  m["arcs"] = std::move(arcs);
  return m;
}

DPath load_dpath(const nlohmann::json& m, std::istream& csv) {
  DPath path;
  const int dim = m.at("dim").get<int>();
  path.arcs = read_csv(csv, dim);
  path.target = vector_from_json(m.at("target"));
  path.tol = m.at("tol").get<double>();
  if (path.arcs.size() != m.at("arcs").size())
    throw InvalidArgument("manifest and CSV disagree on the number of arcs");
  for (std::size_t i = 0; i < path.arcs.size(); ++i)
    if (path.arcs[i].generator != m["arcs"][i].at("k").get<int>())
      throw InvalidArgument("manifest and CSV disagree on arc generators");
  path.start = path.arcs.empty() ? vector_from_json(m.at("start")) : path.arcs.front().start;
  path.endpoint = path.arcs.empty() ? path.start : path.arcs.back().end;
  return path;
}

}  // namespace bracket_reach::reach
