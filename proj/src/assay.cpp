#include "dnapriv/assay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <stdexcept>

#include "json.hpp"

#include "dnapriv/stats.hpp"

namespace dnapriv {

double Specimen::human_mass() const {
  double m = 0.0;
  for (const auto& c : contributions) m += c.mass;
  return m;
}

double Specimen::dna_mass() const {
  double m = human_mass();
  for (const auto& l : ladder) m += l.mass;
  return m;
}

void Specimen::validate() const {
  bool any_positive = contributions.empty();
  for (const auto& c : contributions) {
    if (!std::isfinite(c.mass) || c.mass < 0.0) throw std::invalid_argument("specimen: contribution mass must be finite and >= 0");
    any_positive |= c.mass > 0.0;
  }
  if (!any_positive) throw std::invalid_argument("specimen: all contribution masses are zero");
  for (const auto& l : ladder)
    if (!std::isfinite(l.mass) || l.mass < 0.0) throw std::invalid_argument("specimen: ladder mass must be finite and >= 0");
  if (!std::isfinite(control_target_mass) || control_target_mass < 0.0)
    throw std::invalid_argument("specimen: control target mass must be finite and >= 0");
}

void AssayParams::validate() const {
  if (max_cycles < 1) throw std::invalid_argument("assay: max_cycles must be >= 1");
  if (!(detection_copies > 0.0)) throw std::invalid_argument("assay: detection_copies must be > 0");
  if (!(amplification_efficiency > 1.0 && amplification_efficiency <= 2.0))
    throw std::invalid_argument("assay: amplification_efficiency must be in (1, 2]");
  if (limit_of_detection < 1) throw std::invalid_argument("assay: limit_of_detection must be >= 1");
  // Every specimen at the limit of detection must cross the threshold in time.
  if (static_cast<double>(limit_of_detection) * std::pow(amplification_efficiency, max_cycles) < detection_copies)
    throw std::invalid_argument("assay: limit_of_detection cannot reach detection_copies within max_cycles");
}

void EpgParams::validate() const {
  for (double v : {mean_peak_height, peak_height_cv, stutter_ratio, dropin_rate, analytical_threshold, dropin_mean_factor})
    if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("epg: parameters must be finite and >= 0");
  if (!(mean_peak_height > 0.0)) throw std::invalid_argument("epg: mean_peak_height must be > 0");
  if (stutter_ratio >= 1.0) throw std::invalid_argument("epg: stutter_ratio must be < 1");
  if (!(dropin_mean_factor > 0.0)) throw std::invalid_argument("epg: dropin_mean_factor must be > 0");
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Blue: return "blue";
    case Color::Red: return "red";
    case Color::None: break;
  }
  return "none";
}

std::string_view to_string(Outcome o) { return o == Outcome::Positive ? "positive" : "negative"; }

const LocusPeaks* Residue::find(std::string_view locus) const {
  for (const auto& l : loci)
    if (l.locus == locus) return &l;
  return nullptr;
}

std::size_t Residue::peak_count() const {
  std::size_t n = 0;
  for (const auto& l : loci) n += l.peaks.size();
  return n;
}

Specimen mix(std::span<const std::pair<Specimen, double>> parts) {
  if (parts.empty()) throw std::invalid_argument("mix: no parts");
  Specimen out;
  for (const auto& [s, p] : parts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("mix: proportions must be > 0");
    for (const auto& c : s.contributions) out.contributions.push_back({c.profile, c.mass * p});
    for (const auto& l : s.ladder) out.ladder.push_back({l.locus, l.allele, l.mass * p});
    out.viral_rna_copies += static_cast<std::uint64_t>(std::floor(static_cast<double>(s.viral_rna_copies) * p + 0.5));
    out.control_target_mass += s.control_target_mass * p;
  }
  return out;
}

TestResult pcr_detect(const Specimen& specimen, const AssayParams& params) {
  const auto start = specimen.viral_rna_copies;
  if (start == 0 || start < params.limit_of_detection) return {};
  double copies = static_cast<double>(start);
  for (int n = 0; n <= params.max_cycles; ++n) {
    if (copies >= params.detection_copies) return {Outcome::Positive, n};
    copies *= params.amplification_efficiency;
  }
  return {};
}

Residue simulate_residue(const Specimen& specimen, const FrequencyPanel& panel, const EpgParams& epg, Stream& rng) {
  Residue res;
  res.loci.reserve(panel.size());
  const double cv = epg.peak_height_cv;
  const auto dropin_height = stats::Gamma::from_mean_cv(epg.dropin_mean(), cv);

  for (std::size_t i = 0; i < panel.size(); ++i) {
    std::map<Allele, double> heights;
    auto emit = [&](Allele a, double mass) {
      if (!(mass > 0.0)) return;
      const double mu = mass * epg.mean_peak_height;
      heights[a] += stats::Gamma::from_mean_cv(mu, cv).sample(rng);
      if (epg.stutter_ratio > 0.0) heights[a - 1] += stats::Gamma::from_mean_cv(epg.stutter_ratio * mu, cv).sample(rng);
    };
    for (const auto& c : specimen.contributions) {
      const auto& g = c.profile[i];
      emit(g.first, c.mass);
      emit(g.second, c.mass);
    }
    for (const auto& l : specimen.ladder)
      if (l.locus == i) emit(l.allele, l.mass);

    if (epg.dropin_rate > 0.0) {
      const int n = std::poisson_distribution<int>(epg.dropin_rate)(rng);
      const auto freqs = panel.freqs(i);
      std::discrete_distribution<std::size_t> pick(freqs.begin(), freqs.end());
      for (int k = 0; k < n; ++k) {
        const Allele a = panel.locus(i).alleles[pick(rng)];
        heights[a] += dropin_height.sample(rng);
      }
    }

    LocusPeaks lp{panel.locus(i).name, {}};
    for (const auto& [a, h] : heights)
      if (h > 0.0 && h >= epg.analytical_threshold) lp.peaks.push_back({a, h});
    res.loci.push_back(std::move(lp));
  }
  return res;
}

std::string residue_to_json(const Residue& residue) {
  std::vector<const LocusPeaks*> order;
  for (const auto& l : residue.loci) order.push_back(&l);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->locus < b->locus; });

  std::string out = "{\"control_target_detected\":";
  out += residue.control_target_detected ? "true" : "false";
  out += ",\"loci\":[";
  char buf[64];
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out += ',';
    out += "{\"locus\":" + nlohmann::json(order[i]->locus).dump() + ",\"peaks\":[";
    for (std::size_t j = 0; j < order[i]->peaks.size(); ++j) {
      const auto& p = order[i]->peaks[j];
      std::snprintf(buf, sizeof buf, "%s{\"allele\":%d,\"height\":%.3f}", j ? "," : "", p.allele, p.height);
      out += buf;
    }
    out += "]}";
  }
  out += "],\"verification_color\":\"";
  out += to_string(residue.verification_color);
  out += "\",\"viral_material_present\":";
  out += residue.viral_material_present ? "true" : "false";
  out += '}';
  return out;
}

Residue residue_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  Residue r;
  r.control_target_detected = j.at("control_target_detected").get<bool>();
  r.viral_material_present = j.at("viral_material_present").get<bool>();
  const auto color = j.at("verification_color").get<std::string>();
  r.verification_color = color == "blue" ? Color::Blue : color == "red" ? Color::Red : Color::None;
  for (const auto& l : j.at("loci")) {
    LocusPeaks lp{l.at("locus").get<std::string>(), {}};
    for (const auto& p : l.at("peaks")) lp.peaks.push_back({p.at("allele").get<Allele>(), p.at("height").get<double>()});
    r.loci.push_back(std::move(lp));
  }
  return r;
}

}  // namespace dnapriv
