#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "dnapriv/config.hpp"
#include "dnapriv/game.hpp"

namespace dnapriv {

/// Row labels in the scenario / knowledge / goal layout.
struct AttackerInfo {
  std::string scenario;
  std::string knowledge;
  std::string goal;
};
AttackerInfo describe_attacker(std::string_view name);

/// Game report.  Everything except wall_clock_seconds is a function of the
/// resolved spec and the seed; pass nullopt to leave the clock out.
nlohmann::json game_report(const std::string& name, const SweepPoint& point, const GameSettings& settings,
                           const GameResult& result, std::optional<double> wall_clock_seconds);

/// Adds the trend note for a one-axis sweep of game reports.
nlohmann::json game_summary(const std::string& name, const nlohmann::json& reports);

struct ProtocolTally {
  std::uint64_t trials = 0;
  std::uint64_t aborted = 0;
  std::uint64_t aborted_verification = 0;
  std::uint64_t aborted_control = 0;
  std::uint64_t infected = 0;
  std::uint64_t detected = 0;          // infected, not aborted, positive
  std::uint64_t infected_completed = 0;
  std::uint64_t control_negatives = 0; // process-control runs with a negative result
  std::uint64_t invalid_negatives = 0;
};

/// Cut-and-choose on simulated patients; with a control mass, every
/// patient also gets a process-control run.
ProtocolTally run_protocol(const ProtocolSpec& spec, std::uint64_t seed, unsigned threads);

nlohmann::json protocol_report(const ProtocolSpec& spec, const ProtocolTally& tally, std::uint64_t seed,
                               std::optional<double> wall_clock_seconds);

/// Human table from a report (game, summary, protocol or acceptance).  Only
/// reads JSON fields, so a report re-read from disk renders identically.
std::string render_table(const nlohmann::json& report);

/// Header plus one row per game report (or the single protocol report).
std::string render_csv(const nlohmann::json& report);

/// One row per trial.
std::string trials_csv(const GameResult& result);

}  // namespace dnapriv
