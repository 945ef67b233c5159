#include "bracket_reach/scenario.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bracket_reach/errors.hpp"
#include "bracket_reach/expr_parser.hpp"

namespace bracket_reach::cli {

namespace {

const std::map<std::string, std::string>& builtins() {
  static const std::map<std::string, std::string> table = {
      {"heisenberg", R"([scenario]
name = heisenberg
dim = 3
box = [-2, 2]

[generators]
X1 = 1, 0, 0
X2 = 0, 1, x1
)"},
      {"martinet", R"([scenario]
name = martinet
dim = 3
box = [-2, 2]

[generators]
X1 = 1, 0, 0
X2 = 0, 1, x1^2
)"},
      {"engel", R"([scenario]
name = engel
dim = 4
box = [-2, 2]

[generators]
X1 = 1, 0, 0, 0
X2 = 0, 1, x1, x3
)"},
      {"involutive2", R"([scenario]
name = involutive2
dim = 3
box = [-2, 2]

[generators]
X1 = 1, 0, 0
X2 = 0, 1, 0
)"},
      {"contact-perturbed", R"([scenario]
name = contact-perturbed
dim = 3
box = [-2, 2]

[params]
lambda = 0.05
eps = 1e-3

[generators]
X1 = 1, 0, 0
# (x1)^5 sqrt|x1| smoothed as (x1)^5 (x1^2 + eps^2)^(1/4), cut off outside radius 2
X2 = 0, 1, x1 + lambda * x1^5 * (x1^2 + eps^2)^0.25 * bump(1, 2, sqrt(x1^2 + x2^2 + x3^2))
)"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Text positioned in the source for error messages.
struct Located {
  std::string text;
  int line = 0;
  int column = 0;
};

/// Splits at commas outside parentheses/brackets, keeping column offsets.
std::vector<Located> split_top(const Located& value) {
  std::vector<Located> out;
  int depth = 0;
  std::size_t start = 0;
  const auto push = [&](std::size_t end) {
    const std::string raw = value.text.substr(start, end - start);
    const auto lead = raw.find_first_not_of(" \t");
    out.push_back({trim(raw), value.line,
                   value.column + static_cast<int>(start) +
                       static_cast<int>(lead == std::string::npos ? 0 : lead)});
  };
  for (std::size_t i = 0; i < value.text.size(); ++i) {
    const char c = value.text[i];
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      push(i);
      start = i + 1;
    }
  }
  push(value.text.size());
  return out;
}

double parse_number(const Located& v) {
  const auto e = fields::parse_expression(v.text, 0, {}, v.line, v.column);
  if (!e.is_constant()) throw ParseError("expected a number", v.line, v.column);
  return e.constant_value();
}

int parse_int(const Located& v, int lo) {
  const double d = parse_number(v);
  if (d != std::floor(d) || d < lo || d > 1e9)
    throw ParseError("expected an integer >= " + std::to_string(lo), v.line, v.column);
  return static_cast<int>(d);
}

/// "[a, b]" for every axis, or "[a, b] x [c, d] x ..." one per axis.
fields::Box parse_box(const Located& v, int dim) {
  std::vector<std::pair<double, double>> intervals;
  std::size_t pos = 0;
  const std::string& s = v.text;
  while (pos < s.size()) {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos >= s.size()) break;
    if (!intervals.empty()) {
      if (s[pos] != 'x') throw ParseError("expected 'x' between intervals", v.line, v.column + static_cast<int>(pos));
      ++pos;
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    if (pos >= s.size() || s[pos] != '[')
      throw ParseError("expected '[' to start an interval", v.line, v.column + static_cast<int>(pos));
    const auto close = s.find(']', pos);
    if (close == std::string::npos) throw ParseError("unterminated interval", v.line, v.column + static_cast<int>(pos));
    const Located inner{s.substr(pos + 1, close - pos - 1), v.line, v.column + static_cast<int>(pos) + 1};
    const auto parts = split_top(inner);
    if (parts.size() != 2) throw ParseError("an interval needs two bounds", inner.line, inner.column);
    const double a = parse_number(parts[0]), b = parse_number(parts[1]);
    if (!(a < b)) throw ParseError("interval bounds must satisfy lower < upper", inner.line, inner.column);
    intervals.emplace_back(a, b);
    pos = close + 1;
  }
  if (intervals.size() == 1) intervals.assign(static_cast<std::size_t>(dim), intervals.front());
  if (static_cast<int>(intervals.size()) != dim)
    throw ParseError("box has " + std::to_string(intervals.size()) + " intervals for dimension " +
                         std::to_string(dim),
                     v.line, v.column);
  fields::Box box{Vector(dim), Vector(dim)};
  for (int i = 0; i < dim; ++i) {
    box.lower[i] = intervals[static_cast<std::size_t>(i)].first;
    box.upper[i] = intervals[static_cast<std::size_t>(i)].second;
  }
  return box;
}

/// Section -> ordered (key, value) entries.
struct RawScenario {
  std::map<std::string, std::vector<std::pair<Located, Located>>> sections;
};

RawScenario read_sections(const std::string& text) {
  static const std::set<std::string> known = {"scenario", "generators", "params", "defaults"};
  RawScenario raw;
  std::string section;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = hash == std::string::npos ? line : line.substr(0, hash);
    const std::string t = trim(body);
    if (t.empty()) continue;
    const int col = static_cast<int>(body.find_first_not_of(" \t")) + 1;
    if (t.front() == '[') {
      if (t.back() != ']') throw ParseError("malformed section header", lineno, col);
      section = trim(t.substr(1, t.size() - 2));
      if (!known.count(section)) throw ParseError("unknown section [" + section + "]", lineno, col);
      if (raw.sections.count(section)) throw ParseError("duplicate section [" + section + "]", lineno, col);
      raw.sections[section];
      continue;
    }
    if (section.empty()) throw ParseError("entry outside of any section", lineno, col);
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", lineno, col);
    const std::string key = trim(body.substr(0, eq));
    const std::string rest = body.substr(eq + 1);
    const auto lead = rest.find_first_not_of(" \t");
    const int vcol = static_cast<int>(eq) + 2 + static_cast<int>(lead == std::string::npos ? 0 : lead);
    if (key.empty()) throw ParseError("missing key", lineno, col);
    for (const auto& [k, v] : raw.sections[section])
      if (k.text == key) throw ParseError("duplicate key '" + key + "'", lineno, col);
    raw.sections[section].push_back({{key, lineno, col}, {trim(rest), lineno, vcol}});
  }
  return raw;
}

/// Maps a byte offset to (line, column).
std::pair<int, int> locate(const std::string& text, std::size_t offset) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

std::string number_text(const nlohmann::json& v) {
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  if (v.is_string()) return v.get<std::string>();
  throw ParseError("expected a number or expression string", 1, 1);
}

RawScenario read_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = locate(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ParseError(std::string("invalid JSON: ") + e.what(), line, col);
  }
  if (!doc.is_object()) throw ParseError("scenario JSON must be an object", 1, 1);
  RawScenario raw;
  for (const auto& [section, body] : doc.items()) {
    if (section != "scenario" && section != "generators" && section != "params" &&
        section != "defaults")
      throw ParseError("unknown section '" + section + "'", 1, 1);
    if (!body.is_object()) throw ParseError("section '" + section + "' must be an object", 1, 1);
    auto& entries = raw.sections[section];
    for (const auto& [key, value] : body.items()) {
      std::string v;
      if (section == "generators") {
        if (!value.is_array()) throw ParseError("generator '" + key + "' must be an array", 1, 1);
        for (std::size_t i = 0; i < value.size(); ++i) v += (i ? ", " : "") + number_text(value[i]);
      } else if (key == "box" && value.is_array()) {
        if (!value.empty() && value[0].is_array()) {
          for (std::size_t i = 0; i < value.size(); ++i)
            v += (i ? " x [" : "[") + number_text(value[i].at(0)) + ", " +
                 number_text(value[i].at(1)) + "]";
        } else {
          v = "[" + number_text(value.at(0)) + ", " + number_text(value.at(1)) + "]";
        }
      } else if (key == "name" && value.is_string()) {
        v = value.get<std::string>();
      } else {
        v = number_text(value);
      }
      entries.push_back({{key, 1, 1}, {v, 1, 1}});
    }
  }
  return raw;
}

Scenario build(const RawScenario& raw, const std::map<std::string, double>& overrides) {
  Scenario sc;
  const auto section = [&](const std::string& name) -> const std::vector<std::pair<Located, Located>>& {
    static const std::vector<std::pair<Located, Located>> none;
    auto it = raw.sections.find(name);
    return it == raw.sections.end() ? none : it->second;
  };
  if (!raw.sections.count("scenario")) throw ParseError("missing [scenario] section", 1, 1);

  std::optional<Located> box_text;
  for (const auto& [k, v] : section("scenario")) {
    if (k.text == "name")
      sc.name = v.text;
    else if (k.text == "dim")
      sc.dim = parse_int(v, 1);
    else if (k.text == "box")
      box_text = v;
    else
      throw ParseError("unknown key '" + k.text + "' in [scenario]", k.line, k.column);
  }
  if (sc.name.empty()) throw ParseError("scenario needs a name", 1, 1);
  if (sc.dim < 1) throw ParseError("scenario needs dim >= 1", 1, 1);
  if (!box_text) throw ParseError("scenario needs a box", 1, 1);
  sc.box = parse_box(*box_text, sc.dim);
  if (!raw.sections.count("generators")) throw ParseError("missing [generators] section", 1, 1);

  for (const auto& [k, v] : section("params")) {
    if (k.text.empty() || !(std::isalpha(static_cast<unsigned char>(k.text[0])) || k.text[0] == '_') ||
        k.text.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") !=
            std::string::npos)
      throw ParseError("invalid parameter name '" + k.text + "'", k.line, k.column);
    if (k.text[0] == 'x' && k.text.size() > 1 &&
        k.text.find_first_not_of("0123456789", 1) == std::string::npos)
      throw ParseError("parameter name '" + k.text + "' clashes with a coordinate", k.line, k.column);
    sc.params[k.text] = parse_number(v);
  }
  for (const auto& [name, value] : overrides) {
    if (!sc.params.count(name))
      throw InvalidArgument("scenario '" + sc.name + "' has no parameter '" + name + "'");
    sc.params[name] = value;
  }

  for (const auto& [k, v] : section("defaults")) {
    auto& d = sc.defaults;
    if (k.text == "rank_tol")
      d.rank_tol = parse_number(v);
    else if (k.text == "grid")
      d.grid = parse_int(v, 2);
    else if (k.text == "seed")
      d.seed = static_cast<std::uint64_t>(parse_int(v, 0));
    else if (k.text == "tol")
      d.tol = parse_number(v);
    else if (k.text == "max_length")
      d.max_length = parse_int(v, 1);
    else if (k.text == "delta")
      d.delta = parse_number(v);
    else
      throw ParseError("unknown key '" + k.text + "' in [defaults]", k.line, k.column);
    if (!(d.rank_tol > 0.0) || !(d.tol > 0.0) || !(d.delta > 0.0))
      throw ParseError("tolerances and delta must be positive", v.line, v.column);
  }

  std::vector<fields::SmoothField> fields_;
  int expected = 1;
  for (const auto& [k, v] : section("generators")) {
    if (k.text != "X" + std::to_string(expected))
      throw ParseError("expected generator X" + std::to_string(expected) + ", found '" + k.text + "'",
                       k.line, k.column);
    ++expected;
    const auto parts = split_top(v);
    if (static_cast<int>(parts.size()) != sc.dim)
      throw ParseError(k.text + " has " + std::to_string(parts.size()) + " components, expected " +
                           std::to_string(sc.dim),
                       v.line, v.column);
    std::vector<fields::Expr> comps;
    std::vector<std::string> sources;
    for (const auto& p : parts) {
      if (p.text.empty()) throw ParseError("empty component", p.line, p.column);
      comps.push_back(fields::parse_expression(p.text, sc.dim, sc.params, p.line, p.column));
      sources.push_back(p.text);
    }
    fields_.emplace_back(std::move(comps));
    sc.generators.push_back(std::move(sources));
  }
  if (fields_.empty()) throw ParseError("no generators", 1, 1);
  sc.spec = std::make_shared<const fields::DistributionSpec>(sc.name, std::move(fields_), sc.box);
  return sc;
}

}  // namespace

std::vector<std::string> builtin_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtins()) names.push_back(k);
  return names;
}

const std::string& builtin_source(const std::string& name) {
  auto it = builtins().find(name);
  if (it == builtins().end()) throw UnknownScenario("unknown scenario '" + name + "'");
  return it->second;
}

Scenario parse_scenario(const std::string& text, const std::map<std::string, double>& overrides) {
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool json = first != std::string::npos && text[first] == '{';
  return build(json ? read_json(text) : read_sections(text), overrides);
}

Scenario load_scenario(const std::string& source, const std::map<std::string, double>& overrides) {
  if (builtins().count(source)) return parse_scenario(builtins().at(source), overrides);
  if (!std::filesystem::is_regular_file(source))
    throw UnknownScenario("'" + source + "' is neither a built-in scenario nor a readable file");
  std::ifstream in(source);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), overrides);
}

}  // namespace bracket_reach::cli
