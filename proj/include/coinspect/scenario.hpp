#pragma once

#include "coinspect/engine.hpp"
#include "coinspect/scene.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace coinspect {

struct Scenario {
  std::string name;
  MissionConfig config;
  Scene scene;
};

/// Command-line values that take precedence over the file. The seed also drives scattered
/// interest points that do not pin their own seed.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::optional<double> voxel_size;
  std::optional<double> quality_floor;
  std::optional<int> horizon;
};

/// YAML scenario. Unknown keys, malformed values and semantic violations throw ConfigError
/// whose message starts with "line N:" when the offending node is known.
Scenario parse_scenario_string(const std::string& text, const ScenarioOverrides& overrides = {});
Scenario parse_scenario(const std::string& path, const ScenarioOverrides& overrides = {});

/// Fully expanded form: shells become triangles and scattered points become explicit points.
/// Parsing the output reproduces the same scenario.
std::string serialize_scenario(const Scenario& s);

}  // namespace coinspect
