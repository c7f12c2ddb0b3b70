#pragma once

#include <limits>
#include <span>
#include <vector>

#include "dnapriv/assay.hpp"
#include "dnapriv/genotype.hpp"
#include "dnapriv/stats.hpp"

namespace dnapriv {

/// Placeholder allele for "dropped out, identity unknown" in deconvolution.
/// It never matches an observed peak.
inline constexpr Allele kWildcard = std::numeric_limits<Allele>::min() / 2;

struct HypothesisContributor {
  Genotype genotype;
  double mass = 0.0;
};

/// The assay's peak-generation model turned into a likelihood.  A label's
/// summed height is approximated by the moment-matched gamma of its
/// components; unobserved labels contribute their drop-out probability and
/// unexplained peaks are scored as frequency-weighted drop-in.
class PeakModel {
 public:
  explicit PeakModel(const EpgParams& epg);

  const EpgParams& epg() const { return epg_; }

  /// Log-likelihood of one locus.  `ladder_mass` adds a rung at every
  /// allele of `locus`.  Zero-mass contributors are ignored.
  double locus_log_likelihood(std::span<const Peak> observed, std::span<const HypothesisContributor> contributors,
                              const Locus& locus, std::span<const double> freqs, double ladder_mass = 0.0) const;

 private:
  EpgParams epg_;
  stats::Gamma dropin_;
  double dropin_log_pdf_floor_;
  double dropin_survival_;
};

/// Checked entry point: throws std::invalid_argument when a hypothesised
/// allele is not on the panel locus or a mass is negative.
double locus_peak_likelihood(std::span<const Peak> observed, std::span<const HypothesisContributor> contributors,
                             const Locus& locus, std::span<const double> freqs, const EpgParams& epg);

/// Residue peaks re-indexed by panel locus; loci absent from the residue
/// are empty.
std::vector<std::span<const Peak>> align_to_panel(const Residue& residue, const FrequencyPanel& panel);

struct Hypothesis {
  std::vector<Contribution> contributors;
  double ladder_mass = 0.0;
};

double residue_log_likelihood(std::span<const std::span<const Peak>> aligned, const Hypothesis& h,
                              const FrequencyPanel& panel, const PeakModel& model);

}  // namespace dnapriv
