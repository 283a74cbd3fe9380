#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2dlab/modeselect.hpp"
#include "d2dlab/simkit.hpp"

namespace d2dlab {

// Any malformed configuration input. The message starts with the offending
// key ("section.key: ..."), so callers can surface it verbatim.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Settings of the tiebreak experiment. The tree rules read their leaf order
// from `leaf_order` when given, otherwise from the `mapping` recipe.
struct TieBreakSetup {
  std::vector<std::string> rules = {"uniform", "fish", "pike"};
  std::string mapping = "identity";  // identity | lexicographic | alternating
  std::vector<int> leaf_order;
  std::string tree = "left_spine";  // left_spine | balanced
};

struct ModeSelectSetup {
  bool present = false;
  std::vector<std::array<double, 2>> positions;
  std::array<double, 2> base_station = {0.0, 0.0};
  std::vector<int> cellular;
  std::vector<D2dPair> pairs;
  std::vector<std::string> methods;
  UtilityParams params;
  PathLossModel pathloss;
};

struct SweepSetup {
  bool present = false;
  std::string pointer;              // JSON pointer into the source config
  std::string target = "simulate";  // experiment run per sweep value
  std::vector<std::string> values;  // JSON literals, one per sweep point
};

// A fully validated experiment: scenario plus orchestration settings.
// `canonical` is the normalized JSON text (defaults filled, generators and
// unit conversions resolved) and is a parse fixed point; `source` is the
// input text as given, which sweeps and CLI flags re-patch.
struct ExperimentConfig {
  std::string id = "simulate";
  std::size_t replications = 1;
  std::string out_dir = "results";
  ScenarioConfig scenario;
  std::string tie_rule = "uniform";  // uniform | fish | pike | explicit
  TieBreakSetup tiebreak;
  ModeSelectSetup modeselect;
  SweepSetup sweep;
  std::string source;
  std::string canonical;
  std::uint64_t hash = 0;
};

ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);

std::string load_text_file(const std::string& path);

// Applies {JSON pointer, raw JSON literal} overrides to the source text and
// reparses. CLI flags and the sweep axis go through here, so the config hash
// always reflects the effective values.
ExperimentConfig patch_config(const std::string& source_text,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

// FNV-1a, the hash embedded in every result file (over the canonical text).
std::uint64_t fnv1a(std::string_view bytes);
std::string hash_hex(std::uint64_t h);

}  // namespace d2dlab
