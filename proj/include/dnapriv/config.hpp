#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dnapriv/game.hpp"

namespace dnapriv {

/// Bad experiment or protocol file.  The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One sweep axis: a JSON pointer into the spec naming a numeric field.
struct SweepAxis {
  std::string path;
  std::vector<double> values;

  /// Last pointer token, used in report names.
  std::string label() const;
};

struct ExperimentSpec {
  std::string name;
  std::string panel = "default";
  nlohmann::json body;  // whole spec as given
  std::vector<SweepAxis> sweep;
};

/// A resolved sweep point: the spec with axis values substituted.
struct SweepPoint {
  std::string suffix;           // "" or "__k-5" style, filesystem safe
  nlohmann::json coordinates;   // {"k": 5} (empty object without a sweep)
  nlohmann::json spec;
};

bool filesystem_safe(std::string_view name);

ExperimentSpec parse_experiment(const nlohmann::json& j);
ExperimentSpec load_experiment(const std::filesystem::path& path);

/// Cartesian product of the sweep axes, first axis outermost.
std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec);

/// "default" is the shipped panel; anything else is a CSV path, relative
/// paths resolved against `base_dir`.
std::shared_ptr<const FrequencyPanel> resolve_panel(const std::string& source, const std::filesystem::path& base_dir = {});
std::filesystem::path default_panel_path();

/// Builds the test procedure.  Dilution and randomizing profiles are drawn
/// from the panel with a stream derived from `seed`, so nested sizes share
/// their first profiles.
TestProcedure build_procedure(const nlohmann::json& j, std::shared_ptr<const FrequencyPanel> panel, std::uint64_t seed);
nlohmann::json procedure_defaults();

AttackerOptions build_attacker_options(const nlohmann::json& j);

struct GameSettings {
  GameConfig config;
  double threshold = 1e-3;
};

/// From a resolved spec (procedure, attacker, game, optional protocol).
GameSettings build_game(const nlohmann::json& spec, std::shared_ptr<const FrequencyPanel> panel, std::uint64_t seed,
                        unsigned threads);

ProtocolConfig build_protocol(const nlohmann::json& j);

struct ProtocolSpec {
  std::string name;
  std::string panel = "default";
  TestProcedure procedure;
  ProtocolConfig protocol;
  std::size_t trials = 1000;
  double positive_fraction = 0.5;
  std::uint64_t viral_copies = 1000;
  double victim_mass = 1.0;
  nlohmann::json body;
};

/// The protocol spec needs a dnase step; it defaults to efficiency 1.
ProtocolSpec parse_protocol_spec(const nlohmann::json& j, const std::filesystem::path& base_dir, std::uint64_t seed);

/// 16 hex digits of FNV-1a over the canonical dump.
std::string config_hash(const nlohmann::json& j);

}  // namespace dnapriv
