// Runs every acceptance criterion at its stated trial counts and prints one
// PASS/FAIL line each.  Tolerances live with the criteria in acceptance.cpp.

#include <cstdio>

#include "dnapriv/acceptance.hpp"

int main() {
  dnapriv::AcceptanceOptions opt;
  opt.seed = 42;
  opt.scale = 1.0;
  opt.on_result = [](const nlohmann::json& c, double seconds) {
    std::printf("%s  criterion %2d  %s: %s (%.1f s)\n", c["passed"].get<bool>() ? "PASS" : "FAIL", c["id"].get<int>(),
                c["name"].get<std::string>().c_str(), c["detail"].get<std::string>().c_str(), seconds);
    std::fflush(stdout);
  };
  const auto report = dnapriv::run_acceptance(opt);
  std::printf("%s  all estimates within [0, 1] (%zu checked)\n",
              report.json["all_estimates_bounded"].get<bool>() ? "PASS" : "FAIL",
              report.json["estimates_checked"].get<std::size_t>());
  std::printf("%s\n", report.passed ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED");
  return report.passed ? 0 : 1;
}
