#pragma once

#include <algorithm>
#include <compare>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dnapriv/rng.hpp"

namespace dnapriv {

/// STR allele label (repeat count).  Only the stutter model treats
/// label - 1 as adjacent; everything else treats labels as opaque.
using Allele = int;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Locus {
  std::string name;
  std::vector<Allele> alleles;  // panel order
};

/// Allele frequencies per locus.  Immutable once constructed; the
/// constructor enforces that every locus has >= 2 unique alleles with
/// frequencies in (0, 1] summing to 1 within 1e-9.
class FrequencyPanel {
 public:
  static constexpr double kSumTolerance = 1e-9;

  FrequencyPanel(std::vector<Locus> loci, std::vector<std::vector<double>> freqs);

  std::size_t size() const { return loci_.size(); }
  const std::vector<Locus>& loci() const { return loci_; }
  const Locus& locus(std::size_t i) const { return loci_.at(i); }
  std::span<const double> freqs(std::size_t i) const { return freqs_.at(i); }

  std::optional<std::size_t> locus_index(std::string_view name) const;
  /// Position of an allele within its locus, if present.
  std::optional<std::size_t> allele_index(std::size_t locus, Allele a) const;
  /// Frequency of an allele; 0 when it is not on the panel.
  double freq(std::size_t locus, Allele a) const;

 private:
  std::vector<Locus> loci_;
  std::vector<std::vector<double>> freqs_;
};

/// Unordered allele pair, stored with first <= second.
struct Genotype {
  Allele first = 0;
  Allele second = 0;

  Genotype() = default;
  Genotype(Allele a, Allele b) : first(std::min(a, b)), second(std::max(a, b)) {}
  bool homozygous() const { return first == second; }
  bool contains(Allele a) const { return first == a || second == a; }
  auto operator<=>(const Genotype&) const = default;
};

/// One person's STR profile; genotypes are indexed like the panel's loci.
struct GenotypeProfile {
  std::vector<Genotype> genotypes;

  std::size_t size() const { return genotypes.size(); }
  const Genotype& operator[](std::size_t i) const { return genotypes[i]; }
  bool operator==(const GenotypeProfile&) const = default;
};

/// Throws ValidationError unless the profile covers exactly the panel's
/// loci with on-panel alleles.
void validate_profile(const FrequencyPanel& panel, const GenotypeProfile& profile);

/// Parse `locus,allele,frequency` CSV.  Rows must be grouped by locus.
FrequencyPanel parse_panel(std::istream& in);
FrequencyPanel load_panel(const std::filesystem::path& path);
void write_panel(std::ostream& out, const FrequencyPanel& panel);

/// Two independent draws per locus (Hardy-Weinberg), loci independent.
GenotypeProfile sample_genotype(const FrequencyPanel& panel, Stream& rng);

/// Synthetic panel: alleles labelled consecutively from `first_allele`,
/// frequencies from a symmetric Dirichlet.
FrequencyPanel random_panel(std::size_t num_loci, std::size_t alleles_per_locus, Stream& rng,
                            double concentration = 1.0, Allele first_allele = 8);

/// Number of loci at which two profiles share no allele.
std::size_t disjoint_loci(const GenotypeProfile& a, const GenotypeProfile& b);

}  // namespace dnapriv
