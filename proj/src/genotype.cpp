#include "dnapriv/genotype.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "dnapriv/stats.hpp"

namespace dnapriv {

FrequencyPanel::FrequencyPanel(std::vector<Locus> loci, std::vector<std::vector<double>> freqs)
    : loci_(std::move(loci)), freqs_(std::move(freqs)) {
  if (loci_.empty()) throw ValidationError("panel has no loci");
  if (loci_.size() != freqs_.size()) throw ValidationError("panel loci/frequency size mismatch");
  std::set<std::string> names;
  for (std::size_t i = 0; i < loci_.size(); ++i) {
    const auto& l = loci_[i];
    if (l.name.empty()) throw ValidationError("locus with empty name");
    if (!names.insert(l.name).second) throw ValidationError("duplicate locus " + l.name);
    if (l.alleles.size() < 2) throw ValidationError("locus " + l.name + " has fewer than 2 alleles");
    if (l.alleles.size() != freqs_[i].size()) throw ValidationError("locus " + l.name + ": frequency count mismatch");
    std::set<Allele> seen;
    for (Allele a : l.alleles)
      if (!seen.insert(a).second)
        throw ValidationError("locus " + l.name + ": duplicate allele " + std::to_string(a));
    double sum = 0.0;
    for (double f : freqs_[i]) {
      if (!(f > 0.0 && f <= 1.0)) throw ValidationError("locus " + l.name + ": frequency outside (0, 1]");
      sum += f;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      std::ostringstream msg;
      msg << "locus " << l.name << ": frequencies sum to " << std::setprecision(12) << sum;
      throw ValidationError(msg.str());
    }
  }
}

std::optional<std::size_t> FrequencyPanel::locus_index(std::string_view name) const {
  for (std::size_t i = 0; i < loci_.size(); ++i)
    if (loci_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> FrequencyPanel::allele_index(std::size_t locus, Allele a) const {
  const auto& al = loci_.at(locus).alleles;
  auto it = std::find(al.begin(), al.end(), a);
  if (it == al.end()) return std::nullopt;
  return static_cast<std::size_t>(it - al.begin());
}

double FrequencyPanel::freq(std::size_t locus, Allele a) const {
  auto idx = allele_index(locus, a);
  return idx ? freqs_[locus][*idx] : 0.0;
}

void validate_profile(const FrequencyPanel& panel, const GenotypeProfile& profile) {
  if (profile.size() != panel.size())
    throw ValidationError("profile covers " + std::to_string(profile.size()) + " loci, panel has " +
                          std::to_string(panel.size()));
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& g = profile[i];
    if (!panel.allele_index(i, g.first) || !panel.allele_index(i, g.second))
      throw ValidationError("profile allele not on panel at locus " + panel.locus(i).name);
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

FrequencyPanel parse_panel(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<Locus> loci;
  std::vector<std::vector<double>> freqs;
  std::set<std::string> closed;

  while (std::getline(in, line)) {
    ++lineno;
    auto view = trim(line);
    if (lineno == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != "locus,allele,frequency") throw ParseError(lineno, "expected header 'locus,allele,frequency'");
      header_seen = true;
      continue;
    }
    auto cols = split_csv(view);
    if (cols.size() != 3) throw ParseError(lineno, "expected 3 columns");
    if (cols[0].empty()) throw ParseError(lineno, "empty locus name");

    Allele allele = 0;
    auto [ap, aec] = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), allele);
    if (aec != std::errc() || ap != cols[1].data() + cols[1].size())
      throw ParseError(lineno, "malformed allele '" + std::string(cols[1]) + "'");

    double f = 0.0;
    auto [fp, fec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), f);
    if (fec != std::errc() || fp != cols[2].data() + cols[2].size() || !std::isfinite(f))
      throw ParseError(lineno, "malformed frequency '" + std::string(cols[2]) + "'");
    if (f < 0.0 || f > 1.0) throw ParseError(lineno, "frequency outside [0, 1]");

    std::string name(cols[0]);
    if (loci.empty() || loci.back().name != name) {
      if (closed.count(name)) throw ParseError(lineno, "rows for locus " + name + " are not grouped");
      if (!loci.empty()) closed.insert(loci.back().name);
      loci.push_back({name, {}});
      freqs.emplace_back();
    }
    if (std::find(loci.back().alleles.begin(), loci.back().alleles.end(), allele) != loci.back().alleles.end())
      throw ValidationError("locus " + name + ": duplicate allele " + std::to_string(allele) + " (line " +
                            std::to_string(lineno) + ")");
    loci.back().alleles.push_back(allele);
    freqs.back().push_back(f);
  }
  if (!header_seen) throw ParseError(lineno, "missing header");
  return FrequencyPanel(std::move(loci), std::move(freqs));
}

FrequencyPanel load_panel(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open panel file " + path.string());
  return parse_panel(in);
}

void write_panel(std::ostream& out, const FrequencyPanel& panel) {
  out << "locus,allele,frequency\n";
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& l = panel.locus(i);
    for (std::size_t j = 0; j < l.alleles.size(); ++j) {
      char buf[64];
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, panel.freqs(i)[j]);  // shortest round-trip
      out << l.name << ',' << l.alleles[j] << ',' << std::string_view(buf, static_cast<std::size_t>(p - buf)) << '\n';
    }
  }
}

namespace {
Allele draw_allele(const Locus& locus, std::span<const double> freqs, Stream& rng) {
  double u = rng.uniform();
  for (std::size_t j = 0; j + 1 < freqs.size(); ++j) {
    if (u < freqs[j]) return locus.alleles[j];
    u -= freqs[j];
  }
  return locus.alleles.back();
}
}  // namespace

GenotypeProfile sample_genotype(const FrequencyPanel& panel, Stream& rng) {
  GenotypeProfile p;
  p.genotypes.reserve(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) {
    Allele a = draw_allele(panel.locus(i), panel.freqs(i), rng);
    Allele b = draw_allele(panel.locus(i), panel.freqs(i), rng);
    p.genotypes.emplace_back(a, b);
  }
  return p;
}

FrequencyPanel random_panel(std::size_t num_loci, std::size_t alleles_per_locus, Stream& rng, double concentration,
                            Allele first_allele) {
  if (num_loci < 1) throw std::invalid_argument("random_panel: need at least one locus");
  if (alleles_per_locus < 2) throw std::invalid_argument("random_panel: need at least two alleles per locus");
  std::vector<Locus> loci;
  std::vector<std::vector<double>> freqs;
  for (std::size_t i = 0; i < num_loci; ++i) {
    Locus l;
    l.name = "L" + std::to_string(i + 1);
    for (std::size_t j = 0; j < alleles_per_locus; ++j) l.alleles.push_back(first_allele + static_cast<Allele>(j));
    loci.push_back(std::move(l));
    freqs.push_back(stats::dirichlet(alleles_per_locus, concentration, rng));
  }
  return FrequencyPanel(std::move(loci), std::move(freqs));
}

std::size_t disjoint_loci(const GenotypeProfile& a, const GenotypeProfile& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (!y.contains(x.first) && !y.contains(x.second)) ++n;
  }
  return n;
}

}  // namespace dnapriv
