#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnapriv/countermeasures.hpp"
#include "dnapriv/likelihood.hpp"

namespace dnapriv {

enum class Scenario { A, B, C, D };
std::string_view to_string(Scenario s);

/// What the adversary knows.  Victim known in A and B, mixture known in A
/// and C.  Peak-model parameters are assumed known exactly unless the
/// caller substitutes a degraded copy.
struct AttackerContext {
  Scenario scenario = Scenario::A;
  std::optional<GenotypeProfile> known_victim;
  std::optional<std::vector<Contribution>> known_mixture;
  std::shared_ptr<const FrequencyPanel> population;
  EpgParams epg_params;
  double victim_mass = 1.0;       // template mass the attacker assumes for the victim
  double known_ladder_mass = 0.0; // allelic-ladder mass per allele, if a ladder is present

  void validate() const;
};

enum class Decision { Absent, Present };

// --- Scenario A -----------------------------------------------------------

struct ConfirmResult {
  Decision decision = Decision::Absent;
  double log_lr = 0.0;
};

/// log LR of "mixture + victim" against "mixture + random person", the
/// random person integrated by Monte-Carlo over the population.
ConfirmResult attack_confirm_known(const AttackerContext& ctx, const Residue& residue, Stream& rng,
                                   std::size_t samples = 100);

/// ll(residue | a) - ll(residue | b).  Swapping a and b negates it exactly.
double log_likelihood_ratio(const Residue& residue, const Hypothesis& a, const Hypothesis& b,
                            const FrequencyPanel& panel, const PeakModel& model);

// --- Scenario B -----------------------------------------------------------

/// Per-(locus, allele) presence rates on residues that do not contain the
/// victim, plus the statistic threshold for a 5% false-positive rate.
struct HomerCalibration {
  std::vector<std::vector<double>> presence;  // [locus][allele index]
  double threshold = 0.0;
  double null_mean = 0.0;
  std::size_t residues = 0;
};

/// Builds a calibration from `count` residues produced by `null_residue`.
/// The first half estimates presence rates, the second half (each scored
/// against a fresh random profile) sets the threshold.
HomerCalibration calibrate_homer(const FrequencyPanel& panel, const std::function<Residue(Stream&)>& null_residue,
                                 std::size_t count, Stream& rng, double false_positive_rate = 0.05);

/// Sum over the victim's distinct alleles of (present - expected presence).
double homer_statistic(const Residue& residue, const GenotypeProfile& victim, const FrequencyPanel& panel,
                       const HomerCalibration& calibration);

struct MembershipResult {
  Decision decision = Decision::Absent;
  double statistic = 0.0;
};

MembershipResult attack_membership_unknown_mixture(const AttackerContext& ctx, const Residue& residue,
                                                   const HomerCalibration& calibration);

// --- Scenario C -----------------------------------------------------------

struct RankedGenotype {
  Genotype genotype;  // may contain kWildcard
  double posterior = 0.0;
};

struct LocusDeconvolution {
  std::vector<RankedGenotype> ranked;  // best first; ties by smallest pair
  std::vector<Allele> observed;        // on-panel alleles seen at this locus
};

struct IsolationResult {
  std::vector<LocusDeconvolution> loci;
  /// Best genotype per locus.
  std::vector<Genotype> best() const;
};

IsolationResult attack_isolate_known_mixture(const AttackerContext& ctx, const Residue& residue);

/// True when `predicted` equals `truth`, where a wildcard stands for any
/// allele that left no peak.
bool genotype_matches(const Genotype& predicted, const Genotype& truth, std::span<const Allele> observed);

/// Posterior of a specific genotype at a locus (0 if not among candidates);
/// unobserved alleles of `g` are mapped to the wildcard.
double posterior_of(const LocusDeconvolution& locus, const Genotype& g);

// --- Number of contributors and scenario D --------------------------------

struct NocPosterior {
  std::vector<double> probs;  // probs[n - 1] = P(n contributors), n = 1..max

  std::size_t max_contributors() const { return probs.size(); }
  std::size_t argmax() const;  // smallest n on ties
};

struct NocOptions {
  std::size_t max_contributors = 8;
  std::size_t samples = 200;  // importance samples per locus per count
};

/// Template mass implied by total peak height, assuming the attacker's
/// peak model.  Zero for an empty residue.
double estimate_total_mass(const Residue& residue, const EpgParams& epg);

NocPosterior infer_noc(const Residue& residue, const FrequencyPanel& population, const EpgParams& epg, Stream& rng,
                       const NocOptions& options = {});

struct FullUnknownResult {
  NocPosterior noc;
  std::size_t assumed_contributors = 0;
  /// Deconvolved contributors (per-locus genotypes, may contain wildcards);
  /// those with no observed allele anywhere are dropped.
  std::vector<std::vector<Genotype>> candidates;
  std::optional<std::size_t> selection;
  std::vector<std::vector<Allele>> observed;  // on-panel alleles per locus
};

FullUnknownResult attack_full_unknown(const AttackerContext& ctx, const Residue& residue, Stream& rng,
                                      const NocOptions& options = {});

/// Which true contributor a claimed profile corresponds to: the one
/// agreeing at the most loci (at least one), ties broken at random.
std::optional<std::size_t> attribute_candidate(const std::vector<Genotype>& candidate,
                                               std::span<const GenotypeProfile> contributors,
                                               const std::vector<std::vector<Allele>>& observed, Stream& rng);

// --- Game adversaries -----------------------------------------------------

/// What the adversary sees in one game round.  `negative` is null in
/// single-branch mode.
struct GameView {
  const TestRun* positive = nullptr;
  const TestRun* negative = nullptr;
  const GenotypeProfile* dna0 = nullptr;
  const GenotypeProfile* dna1 = nullptr;
};

class GameAttacker {
 public:
  virtual ~GameAttacker() = default;
  virtual std::string name() const = 0;
  /// Returns the guess b' in {0, 1}.
  virtual int guess(const GameView& view, Stream& rng) const = 0;
};

struct AttackerOptions {
  std::size_t mc_samples = 100;
  NocOptions noc;
  /// Degraded-knowledge mode: the attacker believes this stutter ratio.
  std::optional<double> assumed_stutter_ratio;
  std::size_t self_runs = 3;            // compare-residues attacker
  std::size_t homer_calibration = 400;  // residues used to calibrate homer
  double victim_mass = 1.0;
  std::uint64_t seed = 1;               // calibration randomness
  std::uint64_t viral_copies = 1000;    // used by attackers that run the test themselves
};

/// Names accepted by make_attacker.
std::vector<std::string> attacker_names();

/// Builds a game adversary for the given procedure.  Accepts
/// "confirm", "homer", "deconvolve-known", "full-unknown", "presence-only",
/// "compare-residues" and "coin", optionally prefixed with "negated-".
/// Throws std::invalid_argument for an unknown name.
std::unique_ptr<GameAttacker> make_attacker(std::string_view name, const TestProcedure& procedure,
                                            const AttackerOptions& options = {});

/// Adversary that answers 1 - inner.guess(...) with the same randomness.
std::unique_ptr<GameAttacker> negate(std::unique_ptr<GameAttacker> inner);

/// The knowledge a game adversary gets from the (public) procedure.
AttackerContext context_for(const TestProcedure& procedure, const AttackerOptions& options);

}  // namespace dnapriv
