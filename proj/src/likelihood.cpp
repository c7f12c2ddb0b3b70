#include "dnapriv/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dnapriv {

namespace {

// Log-density for a peak that neither the hypothesis nor drop-in explains.
constexpr double kUnexplainedPeak = -30.0;

struct Expected {
  Allele label;
  double mu;
  double sq;
};

void add(std::vector<Expected>& acc, Allele label, double mu) {
  for (auto& e : acc)
    if (e.label == label) {
      e.mu += mu;
      e.sq += mu * mu;
      return;
    }
  acc.push_back({label, mu, mu * mu});
}

}  // namespace

PeakModel::PeakModel(const EpgParams& epg)
    : epg_(epg),
      dropin_(stats::Gamma::from_mean_cv(epg.dropin_mean(), epg.peak_height_cv)),
      dropin_log_pdf_floor_(kUnexplainedPeak),
      dropin_survival_(dropin_.sf(epg.analytical_threshold)) {
  epg_.validate();
}

double PeakModel::locus_log_likelihood(std::span<const Peak> observed, std::span<const HypothesisContributor> contributors,
                                       const Locus& locus, std::span<const double> freqs, double ladder_mass) const {
  thread_local std::vector<Expected> acc;
  acc.clear();
  const double h = epg_.mean_peak_height;
  const double s = epg_.stutter_ratio;
  auto emit = [&](Allele a, double mass) {
    const double mu = mass * h;
    add(acc, a, mu);
    if (s > 0.0 && a != kWildcard) add(acc, a - 1, s * mu);
  };
  for (const auto& c : contributors) {
    if (!(c.mass > 0.0)) continue;
    emit(c.genotype.first, c.mass);
    emit(c.genotype.second, c.mass);
  }
  if (ladder_mass > 0.0)
    for (Allele a : locus.alleles) emit(a, ladder_mass);

  const double cv = epg_.peak_height_cv;
  const double at = epg_.analytical_threshold;
  const double lambda = epg_.dropin_rate;
  double ll = -lambda * dropin_survival_;

  for (const auto& p : observed) {
    auto it = std::find_if(acc.begin(), acc.end(), [&](const Expected& e) { return e.label == p.allele; });
    if (it != acc.end()) {
      ll += stats::Gamma::sum_of(it->mu, it->sq, cv).log_pdf(p.height);
      it->mu = -1.0;  // consumed
      continue;
    }
    double f = 0.0;
    for (std::size_t j = 0; j < locus.alleles.size(); ++j)
      if (locus.alleles[j] == p.allele) f = freqs[j];
    double term = dropin_log_pdf_floor_;
    if (lambda > 0.0 && f > 0.0) term = std::max(term, std::log(lambda * f) + dropin_.log_pdf(p.height));
    ll += term;
  }
  for (const auto& e : acc)
    if (e.mu > 0.0) ll += stats::Gamma::sum_of(e.mu, e.sq, cv).log_cdf(at);
  return ll;
}

double locus_peak_likelihood(std::span<const Peak> observed, std::span<const HypothesisContributor> contributors,
                             const Locus& locus, std::span<const double> freqs, const EpgParams& epg) {
  auto on_locus = [&](Allele a) { return std::find(locus.alleles.begin(), locus.alleles.end(), a) != locus.alleles.end(); };
  for (const auto& c : contributors) {
    if (!(c.mass >= 0.0) || !std::isfinite(c.mass)) throw std::invalid_argument("likelihood: contributor mass must be >= 0");
    if (!on_locus(c.genotype.first) || !on_locus(c.genotype.second))
      throw std::invalid_argument("likelihood: hypothesis allele not on locus " + locus.name);
  }
  return PeakModel(epg).locus_log_likelihood(observed, contributors, locus, freqs);
}

std::vector<std::span<const Peak>> align_to_panel(const Residue& residue, const FrequencyPanel& panel) {
  std::vector<std::span<const Peak>> out(panel.size());
  for (const auto& lp : residue.loci)
    if (auto idx = panel.locus_index(lp.locus)) out[*idx] = lp.peaks;
  return out;
}

double residue_log_likelihood(std::span<const std::span<const Peak>> aligned, const Hypothesis& h,
                              const FrequencyPanel& panel, const PeakModel& model) {
  std::vector<HypothesisContributor> at_locus(h.contributors.size());
  double ll = 0.0;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    for (std::size_t c = 0; c < h.contributors.size(); ++c)
      at_locus[c] = {h.contributors[c].profile[i], h.contributors[c].mass};
    ll += model.locus_log_likelihood(aligned[i], at_locus, panel.locus(i), panel.freqs(i), h.ladder_mass);
  }
  return ll;
}

}  // namespace dnapriv
