#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dnapriv/genotype.hpp"
#include "dnapriv/rng.hpp"

namespace dnapriv {

struct Contribution {
  GenotypeProfile profile;
  double mass = 1.0;  // relative template quantity
};

/// Synthetic single-allele template (allelic ladder rung).
struct LadderComponent {
  std::size_t locus = 0;
  Allele allele = 0;
  double mass = 0.0;
};

struct Specimen {
  std::vector<Contribution> contributions;
  std::vector<LadderComponent> ladder;
  std::uint64_t viral_rna_copies = 0;
  double control_target_mass = 0.0;  // spiked process-control target, not DNA-sensitive

  double human_mass() const;
  /// Human plus ladder template mass.
  double dna_mass() const;
  /// Throws std::invalid_argument on negative/non-finite masses or an
  /// all-zero contribution list.
  void validate() const;
};

struct AssayParams {
  int max_cycles = 40;
  double detection_copies = 1e10;
  double amplification_efficiency = 2.0;  // per-cycle multiplication factor
  std::uint64_t limit_of_detection = 10;

  void validate() const;
};

struct EpgParams {
  double mean_peak_height = 1000.0;  // RFU per unit template mass per allele copy
  double peak_height_cv = 0.25;
  double stutter_ratio = 0.1;
  double dropin_rate = 0.05;         // expected spurious peaks per locus
  double analytical_threshold = 50.0;
  double dropin_mean_factor = 1.5;   // drop-in mean height as a multiple of the threshold

  double dropin_mean() const { return dropin_mean_factor * std::max(analytical_threshold, 1.0); }
  void validate() const;
};

enum class Color { None, Blue, Red };
std::string_view to_string(Color c);

struct Peak {
  Allele allele = 0;
  double height = 0.0;
  bool operator==(const Peak&) const = default;
};

struct LocusPeaks {
  std::string locus;
  std::vector<Peak> peaks;  // sorted by allele, unique
  bool operator==(const LocusPeaks&) const = default;
};

struct Residue {
  std::vector<LocusPeaks> loci;
  bool viral_material_present = false;
  bool control_target_detected = false;
  Color verification_color = Color::None;

  const LocusPeaks* find(std::string_view locus) const;
  std::size_t peak_count() const;
  bool operator==(const Residue&) const = default;
};

enum class Outcome { Negative, Positive };
std::string_view to_string(Outcome o);

struct TestResult {
  Outcome outcome = Outcome::Negative;
  std::optional<int> ct_cycle;
  bool operator==(const TestResult&) const = default;
};

struct TestRun {
  TestResult result;
  Residue residue;
};

/// The mixing operator: concatenates contributions with masses scaled by
/// each part's proportion; viral copies are scaled and rounded half-up.
Specimen mix(std::span<const std::pair<Specimen, double>> parts);

/// Deterministic amplification: copies * efficiency^n against the
/// detection threshold, gated by the limit of detection.
TestResult pcr_detect(const Specimen& specimen, const AssayParams& params);

/// Simulated electropherogram of the specimen's DNA.  Per allele copy the
/// height is Gamma(mean = mass * mean_peak_height, cv); each copy also
/// emits back-stutter at allele - 1.  Drop-in is Poisson per locus at
/// frequency-weighted panel alleles.  Heights at one allele are summed and
/// peaks below the analytical threshold are removed.
Residue simulate_residue(const Specimen& specimen, const FrequencyPanel& panel, const EpgParams& epg, Stream& rng);

/// Residue JSON: loci sorted by name, peaks by allele, heights with
/// exactly three fractional digits.
std::string residue_to_json(const Residue& residue);
Residue residue_from_json(std::string_view text);

}  // namespace dnapriv
