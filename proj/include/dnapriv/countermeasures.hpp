#pragma once

#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "dnapriv/assay.hpp"
#include "dnapriv/genotype.hpp"
#include "dnapriv/rng.hpp"

namespace dnapriv {

/// Discrete distribution over contributor counts.
struct CountDistribution {
  std::vector<int> values;
  std::vector<double> weights;

  static CountDistribution degenerate(int n) { return {{n}, {1.0}}; }
  static CountDistribution uniform(int lo, int hi);

  int sample(Stream& rng) const;
  int max() const;
  void validate() const;
};

/// Per-contributor mass, uniform on [low, high]; low == high is fixed.
struct MassDistribution {
  double low = 1.0;
  double high = 1.0;

  double sample(Stream& rng) const;
  void validate() const;
};

namespace t0 {

struct Identity {};

struct Dilution {
  std::vector<GenotypeProfile> panel_profiles;
  double per_profile_mass = 1.0;
};

struct Randomizing {
  std::vector<GenotypeProfile> pool;
  CountDistribution counts = CountDistribution::uniform(2, 6);
  MassDistribution masses;
};

struct AllelicLadder {
  double mass_per_allele = 1.0;
};

struct Destruction {
  double efficiency = 1.0;
  double color_threshold = 0.0;  // Red iff surviving DNA mass <= threshold
};

}  // namespace t0

using PrivacyStep = std::variant<t0::Identity, t0::Dilution, t0::Randomizing, t0::AllelicLadder, t0::Destruction>;

std::string_view kind_name(const PrivacyStep& step);

/// Configuration of the full test: the privacy step, then rt-PCR and
/// residue formation.
struct TestProcedure {
  std::shared_ptr<const FrequencyPanel> panel;
  PrivacyStep t0 = t0::Identity{};
  AssayParams assay;
  EpgParams epg;

  void validate() const;
};

Specimen apply_dilution(const Specimen& specimen, std::span<const GenotypeProfile> panel_profiles, double per_profile_mass);

Specimen apply_randomizing(const Specimen& specimen, std::span<const GenotypeProfile> pool,
                           const CountDistribution& counts, const MassDistribution& masses, Stream& rng);

/// One ladder rung per (locus, allele) of the panel.
Specimen apply_allelic_ladder(const Specimen& specimen, const FrequencyPanel& panel, double mass_per_allele);

struct DnaseResult {
  Specimen specimen;
  Color color = Color::Blue;
};

/// Deterministic attenuation: every DNA template keeps mass * (1 - efficiency).
/// Viral RNA and the process-control target are untouched.
DnaseResult apply_dnase(const Specimen& specimen, double efficiency, double color_threshold = 0.0);

/// Applies t0 then runs the assay; the residue reflects the post-t0
/// specimen.
TestRun run_test(const TestProcedure& procedure, const Specimen& specimen, Stream& rng);

enum class KitBehavior { Honest, KillsVirusToo, FakeColorNoDnase };
std::string_view to_string(KitBehavior b);
std::optional<KitBehavior> kit_behavior_from_string(std::string_view s);

struct KitModel {
  KitBehavior behavior = KitBehavior::Honest;
  bool destroys_control = false;  // only meaningful for KillsVirusToo

  bool honest() const { return behavior == KitBehavior::Honest; }
};

enum class AbortReason { VerificationFailed, ControlFailed };
std::string_view to_string(AbortReason r);

struct ProtocolOutcome {
  bool aborted = false;
  std::optional<AbortReason> abort_reason;
  std::optional<TestResult> result;
  std::optional<Residue> residue;
  std::size_t bad_vial = 0;       // meaningful for FakeColorNoDnase
  std::vector<std::size_t> verified;
  std::size_t used = 0;
};

struct CutAndChooseOptions {
  /// Verify n - 1 vials and test the last one instead of verifying one.
  bool verify_all_but_one = false;
  /// Spike a process-control target of this mass; 0 disables the control.
  double control_target_mass = 0.0;
};

/// Runs the kit's step on a single vial.  `bad_vial` selects the faked
/// vial of a FakeColorNoDnase kit.
TestRun run_with_kit(const TestProcedure& procedure, const Specimen& specimen, const KitModel& kit, bool bad_vial,
                     Stream& rng);

/// The patient splits the specimen into n vials, checks some with their own
/// reagent and the lab tests one unchecked vial.
ProtocolOutcome cut_and_choose(std::size_t n_samples, const KitModel& kit, Stream& rng, const TestProcedure& procedure,
                               const Specimen& specimen, const CutAndChooseOptions& options = {});

struct ControlledRun {
  TestRun run;
  bool invalid = false;  // negative result without the control target
};

/// Spikes a known control target before t0 and reports whether it reached
/// the residue.
ControlledRun process_control(const TestProcedure& procedure, const Specimen& specimen, double control_target_mass,
                              Stream& rng, const KitModel& kit = {});

}  // namespace dnapriv
