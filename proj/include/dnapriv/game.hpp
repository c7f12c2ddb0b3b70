#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dnapriv/attackers.hpp"
#include "dnapriv/countermeasures.hpp"
#include "dnapriv/stats.hpp"

namespace dnapriv {

enum class ProfileChoice { AdversarialMaxDistance, RandomPair };
std::string_view to_string(ProfileChoice c);

/// Optional cut-and-choose wrapper around every test the challenger runs.
struct ProtocolConfig {
  KitModel kit;
  std::size_t n_samples = 2;
  bool verify_all_but_one = false;
  double control_target_mass = 0.0;
};

struct GameConfig {
  TestProcedure procedure;
  std::string attacker = "confirm";
  AttackerOptions attacker_options;
  std::size_t trials = 1000;
  ProfileChoice profile_choice = ProfileChoice::AdversarialMaxDistance;
  std::size_t profile_search = 1000;  // sampled pairs for the adversarial choice
  /// Overrides profile_choice with a fixed (DNA0, DNA1).
  std::optional<std::pair<GenotypeProfile, GenotypeProfile>> fixed_pair;
  std::uint64_t viral_copies_when_positive = 1000;
  double victim_mass = 1.0;
  std::uint64_t root_seed = 42;
  /// Attacker sees only the positive branch.
  bool single_branch = false;
  std::optional<ProtocolConfig> protocol;
  unsigned threads = 1;
  double confidence = 0.95;  // of the Wilson interval

  void validate() const;
};

/// Trial counts and the Wilson interval for Pr[b = b'], folded into an
/// interval for the advantage 2|p - 1/2|.
struct AdvantageEstimate {
  std::uint64_t trials = 0;
  std::uint64_t correct_guesses = 0;
  double p_hat = 0.5;
  double adv_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double adv_ci_low = 0.0;
  double adv_ci_high = 1.0;
  double confidence = 0.95;

  static AdvantageEstimate from_counts(std::uint64_t correct, std::uint64_t trials, double confidence = 0.95);
};

struct Round {
  int b = 0;
  TestRun positive;
  TestRun negative;
  bool aborted = false;
};

/// Manufactures DNA_b + V and DNA_b and runs the procedure on both.
Round challenger_round(const GameConfig& config, const GenotypeProfile& dna0, const GenotypeProfile& dna1, Stream& rng);

struct TrialRecord {
  std::size_t index = 0;
  int b = 0;
  int guess = 0;
  bool aborted = false;
  std::size_t positive_peaks = 0;
  std::size_t negative_peaks = 0;
};

struct GameResult {
  AdvantageEstimate estimate;
  std::uint64_t aborted = 0;
  std::string attacker;
  std::vector<TrialRecord> records;
};

/// Greedy pick among `search` sampled pairs maximising loci with no shared allele.
std::pair<GenotypeProfile, GenotypeProfile> adversarial_pair(const FrequencyPanel& panel, std::size_t search, Stream& rng);

GameResult run_game(const GameConfig& config);
/// Same as run_game with a caller-supplied adversary.
GameResult run_game(const GameConfig& config, const GameAttacker& attacker);

enum class Verdict { SecureAtThreshold, Insecure, Inconclusive };
std::string_view to_string(Verdict v);

/// Secure iff the advantage upper bound is below the threshold, insecure
/// iff the lower bound is at or above it.
Verdict check_security(const AdvantageEstimate& estimate, double threshold = 1e-3);

struct EquivOptions {
  double alpha = 0.01;
  std::size_t permutations = 499;
};

struct EquivResult {
  bool distinguishable = false;
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Permutation test on residue feature vectors (per-allele presence and
/// log height, per-locus height quantiles).
EquivResult chem_equiv(std::span<const Residue> a, std::span<const Residue> b, Stream& rng,
                       const EquivOptions& options = {});

struct DistributionReport {
  EquivResult equiv;
  std::size_t residues_per_family = 0;
};

/// Residues of dna and dna_prime, each under fresh randomization, compared
/// with chem_equiv.  Requires a Randomizing step.
DistributionReport residue_distribution_check(const TestProcedure& procedure, const GenotypeProfile& dna,
                                              const GenotypeProfile& dna_prime, std::size_t trials, Stream& rng,
                                              double victim_mass = 1.0, std::uint64_t viral_copies = 1000,
                                              const EquivOptions& options = {});

struct ImpossibilityReport {
  EquivResult equiv;
  std::optional<GameResult> attack;  // only when distinguishable
};

/// If the two residue families are distinguishable, an adversary can run
/// the test itself and compare; this measures that adversary.
ImpossibilityReport impossibility_demo(const TestProcedure& procedure, const GenotypeProfile& dna0,
                                       const GenotypeProfile& dna1, std::size_t trials, std::uint64_t seed,
                                       std::size_t family_size = 40, unsigned threads = 1);

}  // namespace dnapriv
