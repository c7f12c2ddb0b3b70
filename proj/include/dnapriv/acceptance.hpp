#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dnapriv {

struct AcceptanceOptions {
  std::uint64_t seed = 42;
  unsigned threads = 1;
  std::filesystem::path panel_path;  // empty = shipped default
  /// Multiplies every stated trial count.  1 runs the suite as specified;
  /// smaller values are for smoke runs and are labelled in the report.
  double scale = 1.0;
  std::vector<int> only;  // criterion ids to run; empty = all
  /// Called after each criterion (for live output).
  std::function<void(const nlohmann::json& criterion, double seconds)> on_result;
};

struct AcceptanceReport {
  nlohmann::json json;  // kind "acceptance"; no timing fields
  bool passed = false;
};

/// Criteria 0 (panel) through 10.  Each criterion runs on the loaded panel,
/// or on a generated stand-in when the panel fails, so a bad panel file
/// fails criterion 0 only.
AcceptanceReport run_acceptance(const AcceptanceOptions& options);

}  // namespace dnapriv
