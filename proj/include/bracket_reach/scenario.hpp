#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bracket_reach/field.hpp"

namespace bracket_reach::cli {

struct ScenarioDefaults {
  double rank_tol = 1e-8;
  int grid = 5;  // points per axis of the sampling lattice
  std::uint64_t seed = 1;
  double tol = 1e-8;
  int max_length = 4;
  double delta = 0.2;
};

struct Scenario {
  std::string name;
  int dim = 0;
  std::vector<std::vector<std::string>> generators;  // component expression sources
  std::map<std::string, double> params;             // after overrides
  fields::Box box;
  ScenarioDefaults defaults;
  fields::SpecPtr spec;
};

/// Built-in scenario names.
std::vector<std::string> builtin_names();

/// Source text of a built-in scenario; throws UnknownScenario.
const std::string& builtin_source(const std::string& name);

/// Parses scenario text (the sectioned key/value format, or JSON when the
/// first non-blank character is '{').  `overrides` replace declared
/// parameters; overriding an undeclared one is an error.
Scenario parse_scenario(const std::string& text, const std::map<std::string, double>& overrides = {});

/// Built-in name or path to a scenario file.
Scenario load_scenario(const std::string& source,
                       const std::map<std::string, double>& overrides = {});

}  // namespace bracket_reach::cli
