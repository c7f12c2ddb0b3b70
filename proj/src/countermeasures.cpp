#include "dnapriv/countermeasures.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dnapriv {

CountDistribution CountDistribution::uniform(int lo, int hi) {
  if (lo < 0 || hi < lo) throw std::invalid_argument("count distribution: need 0 <= lo <= hi");
  CountDistribution d;
  for (int n = lo; n <= hi; ++n) {
    d.values.push_back(n);
    d.weights.push_back(1.0);
  }
  return d;
}

void CountDistribution::validate() const {
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("count distribution: values and weights must be non-empty and aligned");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 0) throw std::invalid_argument("count distribution: negative count");
    if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw std::invalid_argument("count distribution: bad weight");
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("count distribution: weights sum to zero");
}

int CountDistribution::sample(Stream& rng) const {
  if (values.size() == 1) return values.front();
  std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
  return values[d(rng)];
}

int CountDistribution::max() const {
  int m = 0;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (weights[i] > 0.0) m = std::max(m, values[i]);
  return m;
}

double MassDistribution::sample(Stream& rng) const {
  if (low == high) return low;
  return low + (high - low) * rng.uniform();
}

void MassDistribution::validate() const {
  if (!(low > 0.0) || !(high >= low) || !std::isfinite(high))
    throw std::invalid_argument("mass distribution: need 0 < low <= high");
}

std::string_view kind_name(const PrivacyStep& step) {
  static constexpr std::string_view names[] = {"identity", "dilution", "randomizing", "ladder", "dnase"};
  return names[step.index()];
}

void TestProcedure::validate() const {
  if (!panel) throw std::invalid_argument("procedure: no panel");
  assay.validate();
  epg.validate();
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, t0::Dilution>) {
          if (s.panel_profiles.empty()) throw std::invalid_argument("dilution: empty panel");
          if (!(s.per_profile_mass > 0.0)) throw std::invalid_argument("dilution: per_profile_mass must be > 0");
          for (const auto& p : s.panel_profiles) validate_profile(*panel, p);
        } else if constexpr (std::is_same_v<T, t0::Randomizing>) {
          s.counts.validate();
          s.masses.validate();
          if (s.pool.size() < static_cast<std::size_t>(s.counts.max()))
            throw std::invalid_argument("randomizing: pool smaller than the largest contributor count");
          for (const auto& p : s.pool) validate_profile(*panel, p);
        } else if constexpr (std::is_same_v<T, t0::AllelicLadder>) {
          if (!(s.mass_per_allele >= 0.0)) throw std::invalid_argument("ladder: mass must be >= 0");
        } else if constexpr (std::is_same_v<T, t0::Destruction>) {
          if (!(s.efficiency >= 0.0 && s.efficiency <= 1.0)) throw std::invalid_argument("dnase: efficiency must be in [0, 1]");
          if (!(s.color_threshold >= 0.0)) throw std::invalid_argument("dnase: color threshold must be >= 0");
        }
      },
      t0);
}

Specimen apply_dilution(const Specimen& specimen, std::span<const GenotypeProfile> panel_profiles, double per_profile_mass) {
  if (panel_profiles.empty()) throw std::invalid_argument("dilution: empty panel");
  Specimen out = specimen;
  for (const auto& p : panel_profiles) out.contributions.push_back({p, per_profile_mass});
  return out;
}

Specimen apply_randomizing(const Specimen& specimen, std::span<const GenotypeProfile> pool,
                           const CountDistribution& counts, const MassDistribution& masses, Stream& rng) {
  if (pool.size() < static_cast<std::size_t>(counts.max()))
    throw std::invalid_argument("randomizing: pool smaller than the largest contributor count");
  const auto n = static_cast<std::size_t>(counts.sample(rng));
  Specimen out = specimen;
  if (n == 0) return out;
  // Partial Fisher-Yates: the first n entries are a uniform n-subset.
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  for (std::size_t i = 0; i < n; ++i) out.contributions.push_back({pool[idx[i]], masses.sample(rng)});
  return out;
}

Specimen apply_allelic_ladder(const Specimen& specimen, const FrequencyPanel& panel, double mass_per_allele) {
  Specimen out = specimen;
  if (mass_per_allele <= 0.0) return out;
  for (std::size_t i = 0; i < panel.size(); ++i)
    for (Allele a : panel.locus(i).alleles) out.ladder.push_back({i, a, mass_per_allele});
  return out;
}

DnaseResult apply_dnase(const Specimen& specimen, double efficiency, double color_threshold) {
  if (!(efficiency >= 0.0 && efficiency <= 1.0)) throw std::invalid_argument("dnase: efficiency must be in [0, 1]");
  DnaseResult r{specimen, Color::Blue};
  const double survival = 1.0 - efficiency;
  for (auto& c : r.specimen.contributions) c.mass *= survival;
  for (auto& l : r.specimen.ladder) l.mass *= survival;
  r.color = r.specimen.dna_mass() <= color_threshold ? Color::Red : Color::Blue;
  return r;
}

namespace {

struct Prepared {
  Specimen specimen;
  Color color = Color::None;
};

Prepared apply_step(const TestProcedure& procedure, const Specimen& specimen, Stream& rng) {
  return std::visit(
      [&](const auto& s) -> Prepared {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, t0::Identity>) {
          return {specimen, Color::None};
        } else if constexpr (std::is_same_v<T, t0::Dilution>) {
          return {apply_dilution(specimen, s.panel_profiles, s.per_profile_mass), Color::None};
        } else if constexpr (std::is_same_v<T, t0::Randomizing>) {
          return {apply_randomizing(specimen, s.pool, s.counts, s.masses, rng), Color::None};
        } else if constexpr (std::is_same_v<T, t0::AllelicLadder>) {
          return {apply_allelic_ladder(specimen, *procedure.panel, s.mass_per_allele), Color::None};
        } else {
          auto d = apply_dnase(specimen, s.efficiency, s.color_threshold);
          return {std::move(d.specimen), d.color};
        }
      },
      procedure.t0);
}

TestRun finish(const TestProcedure& procedure, const Prepared& prepared, Stream& rng) {
  TestRun run;
  run.result = pcr_detect(prepared.specimen, procedure.assay);
  run.residue = simulate_residue(prepared.specimen, *procedure.panel, procedure.epg, rng);
  run.residue.viral_material_present = prepared.specimen.viral_rna_copies > 0;
  run.residue.control_target_detected = prepared.specimen.control_target_mass > 0.0;
  run.residue.verification_color = prepared.color;
  return run;
}

}  // namespace

TestRun run_test(const TestProcedure& procedure, const Specimen& specimen, Stream& rng) {
  auto step_rng = rng.child("t0");
  auto residue_rng = rng.child("residue");
  return finish(procedure, apply_step(procedure, specimen, step_rng), residue_rng);
}

std::string_view to_string(KitBehavior b) {
  switch (b) {
    case KitBehavior::KillsVirusToo: return "kills_virus_too";
    case KitBehavior::FakeColorNoDnase: return "fake_color_no_dnase";
    case KitBehavior::Honest: break;
  }
  return "honest";
}

std::optional<KitBehavior> kit_behavior_from_string(std::string_view s) {
  for (auto b : {KitBehavior::Honest, KitBehavior::KillsVirusToo, KitBehavior::FakeColorNoDnase})
    if (to_string(b) == s) return b;
  return std::nullopt;
}

std::string_view to_string(AbortReason r) {
  return r == AbortReason::VerificationFailed ? "verification_failed" : "control_failed";
}

TestRun run_with_kit(const TestProcedure& procedure, const Specimen& specimen, const KitModel& kit, bool bad_vial,
                     Stream& rng) {
  auto step_rng = rng.child("t0");
  auto residue_rng = rng.child("residue");
  Prepared prepared;
  if (kit.behavior == KitBehavior::FakeColorNoDnase && bad_vial) {
    // No DNase at all; the indicator is dyed to look like success.
    prepared = {specimen, Color::Red};
  } else {
    prepared = apply_step(procedure, specimen, step_rng);
    if (kit.behavior == KitBehavior::KillsVirusToo) {
      prepared.specimen.viral_rna_copies = 0;
      if (kit.destroys_control) prepared.specimen.control_target_mass = 0.0;
    }
  }
  return finish(procedure, prepared, residue_rng);
}

ProtocolOutcome cut_and_choose(std::size_t n_samples, const KitModel& kit, Stream& rng, const TestProcedure& procedure,
                               const Specimen& specimen, const CutAndChooseOptions& options) {
  if (n_samples < 2) throw std::invalid_argument("cut-and-choose: need at least 2 samples");
  if (!std::holds_alternative<t0::Destruction>(procedure.t0))
    throw std::invalid_argument("cut-and-choose: procedure step must be dnase");

  ProtocolOutcome out;
  auto kit_rng = rng.child("kit");
  auto patient_rng = rng.child("patient");
  auto lab_rng = rng.child("lab");
  out.bad_vial = kit_rng.below(n_samples);

  if (options.verify_all_but_one) {
    out.used = patient_rng.below(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i)
      if (i != out.used) out.verified.push_back(i);
  } else {
    const std::size_t v = patient_rng.below(n_samples);
    out.verified.push_back(v);
    const std::size_t pick = lab_rng.below(n_samples - 1);
    out.used = pick < v ? pick : pick + 1;
  }

  // The patient's own reagent reveals a vial without DNase.
  if (kit.behavior == KitBehavior::FakeColorNoDnase)
    for (auto v : out.verified)
      if (v == out.bad_vial) {
        out.aborted = true;
        out.abort_reason = AbortReason::VerificationFailed;
        return out;
      }

  Specimen vial = specimen;
  if (options.control_target_mass > 0.0) vial.control_target_mass = options.control_target_mass;
  auto run_rng = rng.child("run");
  auto run = run_with_kit(procedure, vial, kit, kit.behavior == KitBehavior::FakeColorNoDnase && out.used == out.bad_vial,
                          run_rng);
  if (options.control_target_mass > 0.0 && run.result.outcome == Outcome::Negative &&
      !run.residue.control_target_detected) {
    out.aborted = true;
    out.abort_reason = AbortReason::ControlFailed;
    return out;
  }
  out.result = run.result;
  out.residue = std::move(run.residue);
  return out;
}

ControlledRun process_control(const TestProcedure& procedure, const Specimen& specimen, double control_target_mass,
                              Stream& rng, const KitModel& kit) {
  if (!(control_target_mass > 0.0)) throw std::invalid_argument("process control: target mass must be > 0");
  Specimen spiked = specimen;
  spiked.control_target_mass = control_target_mass;
  ControlledRun out{run_with_kit(procedure, spiked, kit, kit.behavior == KitBehavior::FakeColorNoDnase, rng), false};
  out.invalid = out.run.result.outcome == Outcome::Negative && !out.run.residue.control_target_detected;
  return out;
}

}  // namespace dnapriv
