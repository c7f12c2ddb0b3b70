#include "dnapriv/attackers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dnapriv {

std::string_view to_string(Scenario s) {
  static constexpr std::string_view names[] = {"A", "B", "C", "D"};
  return names[static_cast<int>(s)];
}

void AttackerContext::validate() const {
  if (!population) throw std::invalid_argument("attacker context: no population panel");
  const bool victim = scenario == Scenario::A || scenario == Scenario::B;
  const bool mixture = scenario == Scenario::A || scenario == Scenario::C;
  if (victim != known_victim.has_value())
    throw std::invalid_argument("attacker context: known victim must be present exactly in scenarios A and B");
  if (mixture != known_mixture.has_value())
    throw std::invalid_argument("attacker context: known mixture must be present exactly in scenarios A and C");
  if (known_victim) validate_profile(*population, *known_victim);
  if (known_mixture)
    for (const auto& c : *known_mixture) validate_profile(*population, c.profile);
  epg_params.validate();
}

namespace {

std::vector<Contribution> mixture_or_empty(const AttackerContext& ctx) {
  return ctx.known_mixture ? *ctx.known_mixture : std::vector<Contribution>{};
}

std::vector<Allele> observed_on_panel(std::span<const Peak> peaks, const Locus& locus) {
  std::vector<Allele> out;
  for (const auto& p : peaks)
    if (std::find(locus.alleles.begin(), locus.alleles.end(), p.allele) != locus.alleles.end()) out.push_back(p.allele);
  return out;
}

bool present(std::span<const Peak> peaks, Allele a) {
  return std::any_of(peaks.begin(), peaks.end(), [&](const Peak& p) { return p.allele == a; });
}

/// Candidate genotypes at a locus: pairs over observed alleles plus the
/// wildcard, each with its Hardy-Weinberg log prior.
struct Candidates {
  std::vector<Genotype> genotypes;
  std::vector<double> log_prior;
};

Candidates candidate_genotypes(std::span<const Allele> observed, const Locus& locus, std::span<const double> freqs) {
  std::vector<std::pair<Allele, double>> alleles;
  double seen = 0.0;
  for (Allele a : observed) {
    double f = 0.0;
    for (std::size_t j = 0; j < locus.alleles.size(); ++j)
      if (locus.alleles[j] == a) f = freqs[j];
    alleles.emplace_back(a, f);
    seen += f;
  }
  if (observed.size() < locus.alleles.size()) alleles.emplace_back(kWildcard, std::max(1.0 - seen, 1e-12));
  std::sort(alleles.begin(), alleles.end());
  Candidates c;
  for (std::size_t i = 0; i < alleles.size(); ++i)
    for (std::size_t j = i; j < alleles.size(); ++j) {
      c.genotypes.emplace_back(alleles[i].first, alleles[j].first);
      double p = alleles[i].second * alleles[j].second * (i == j ? 1.0 : 2.0);
      c.log_prior.push_back(std::log(p));
    }
  return c;
}

}  // namespace

double log_likelihood_ratio(const Residue& residue, const Hypothesis& a, const Hypothesis& b,
                            const FrequencyPanel& panel, const PeakModel& model) {
  const auto aligned = align_to_panel(residue, panel);
  return residue_log_likelihood(aligned, a, panel, model) - residue_log_likelihood(aligned, b, panel, model);
}

ConfirmResult attack_confirm_known(const AttackerContext& ctx, const Residue& residue, Stream& rng, std::size_t samples) {
  if (!ctx.known_victim || !ctx.known_mixture)
    throw std::invalid_argument("confirm attack: needs a known victim and a known mixture");
  if (samples == 0) throw std::invalid_argument("confirm attack: need at least one Monte-Carlo sample");
  const auto& panel = *ctx.population;
  const PeakModel model(ctx.epg_params);
  const auto aligned = align_to_panel(residue, panel);

  Hypothesis h{*ctx.known_mixture, ctx.known_ladder_mass};
  h.contributors.push_back({*ctx.known_victim, ctx.victim_mass});
  const double ll_victim = residue_log_likelihood(aligned, h, panel, model);

  std::vector<double> ll_random(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    h.contributors.back().profile = sample_genotype(panel, rng);
    ll_random[i] = residue_log_likelihood(aligned, h, panel, model);
  }
  ConfirmResult r;
  r.log_lr = ll_victim - (stats::log_sum_exp(ll_random) - std::log(static_cast<double>(samples)));
  r.decision = r.log_lr > 0.0 ? Decision::Present : Decision::Absent;
  return r;
}

HomerCalibration calibrate_homer(const FrequencyPanel& panel, const std::function<Residue(Stream&)>& null_residue,
                                 std::size_t count, Stream& rng, double false_positive_rate) {
  if (count < 4) throw std::invalid_argument("homer calibration: need at least 4 residues");
  HomerCalibration cal;
  cal.residues = count;
  cal.presence.resize(panel.size());
  for (std::size_t i = 0; i < panel.size(); ++i) cal.presence[i].assign(panel.locus(i).alleles.size(), 0.0);

  const std::size_t first = count / 2;
  auto residue_rng = rng.child("homer-residues");
  for (std::size_t r = 0; r < first; ++r) {
    auto res_rng = residue_rng.child("r", r);
    const auto res = null_residue(res_rng);
    const auto aligned = align_to_panel(res, panel);
    for (std::size_t i = 0; i < panel.size(); ++i)
      for (std::size_t k = 0; k < panel.locus(i).alleles.size(); ++k)
        if (present(aligned[i], panel.locus(i).alleles[k])) cal.presence[i][k] += 1.0;
  }
  for (auto& row : cal.presence)
    for (auto& v : row) v /= static_cast<double>(first);

  std::vector<double> null_stats;
  auto victim_rng = rng.child("homer-victims");
  for (std::size_t r = first; r < count; ++r) {
    auto res_rng = residue_rng.child("r", r);
    const auto res = null_residue(res_rng);
    null_stats.push_back(homer_statistic(res, sample_genotype(panel, victim_rng), panel, cal));
  }
  std::sort(null_stats.begin(), null_stats.end());
  const auto m = null_stats.size();
  auto idx = static_cast<std::size_t>(std::ceil((1.0 - false_positive_rate) * static_cast<double>(m)));
  idx = std::clamp<std::size_t>(idx, 1, m) - 1;
  cal.threshold = null_stats[idx];
  cal.null_mean = stats::mean(null_stats);
  return cal;
}

double homer_statistic(const Residue& residue, const GenotypeProfile& victim, const FrequencyPanel& panel,
                       const HomerCalibration& calibration) {
  const auto aligned = align_to_panel(residue, panel);
  double s = 0.0;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& g = victim[i];
    auto score = [&](Allele a) {
      const auto k = panel.allele_index(i, a);
      if (!k) throw std::invalid_argument("homer: victim allele not on panel");
      s += (present(aligned[i], a) ? 1.0 : 0.0) - calibration.presence[i][*k];
    };
    score(g.first);
    if (!g.homozygous()) score(g.second);
  }
  return s;
}

MembershipResult attack_membership_unknown_mixture(const AttackerContext& ctx, const Residue& residue,
                                                   const HomerCalibration& calibration) {
  if (!ctx.known_victim) throw std::invalid_argument("membership attack: needs a known victim");
  MembershipResult r;
  r.statistic = homer_statistic(residue, *ctx.known_victim, *ctx.population, calibration);
  r.decision = r.statistic > calibration.threshold ? Decision::Present : Decision::Absent;
  return r;
}

std::vector<Genotype> IsolationResult::best() const {
  std::vector<Genotype> out;
  for (const auto& l : loci) out.push_back(l.ranked.front().genotype);
  return out;
}

IsolationResult attack_isolate_known_mixture(const AttackerContext& ctx, const Residue& residue) {
  if (!ctx.known_mixture) throw std::invalid_argument("isolation attack: needs a known mixture");
  const auto& panel = *ctx.population;
  const PeakModel model(ctx.epg_params);
  const auto aligned = align_to_panel(residue, panel);

  IsolationResult out;
  std::vector<HypothesisContributor> hyp;
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto& locus = panel.locus(i);
    LocusDeconvolution ld;
    ld.observed = observed_on_panel(aligned[i], locus);
    const auto cands = candidate_genotypes(ld.observed, locus, panel.freqs(i));

    hyp.clear();
    for (const auto& c : *ctx.known_mixture) hyp.push_back({c.profile[i], c.mass});
    hyp.push_back({});
    std::vector<double> score(cands.genotypes.size());
    for (std::size_t k = 0; k < cands.genotypes.size(); ++k) {
      hyp.back() = {cands.genotypes[k], ctx.victim_mass};
      score[k] = cands.log_prior[k] +
                 model.locus_log_likelihood(aligned[i], hyp, locus, panel.freqs(i), ctx.known_ladder_mass);
    }
    const double norm = stats::log_sum_exp(score);
    for (std::size_t k = 0; k < score.size(); ++k) ld.ranked.push_back({cands.genotypes[k], std::exp(score[k] - norm)});
    std::stable_sort(ld.ranked.begin(), ld.ranked.end(), [](const RankedGenotype& a, const RankedGenotype& b) {
      if (a.posterior != b.posterior) return a.posterior > b.posterior;
      return a.genotype < b.genotype;
    });
    out.loci.push_back(std::move(ld));
  }
  return out;
}

namespace {
Allele resolve(Allele a, std::span<const Allele> observed) {
  return std::find(observed.begin(), observed.end(), a) == observed.end() ? kWildcard : a;
}
}  // namespace

bool genotype_matches(const Genotype& predicted, const Genotype& truth, std::span<const Allele> observed) {
  return predicted == Genotype(resolve(truth.first, observed), resolve(truth.second, observed));
}

double posterior_of(const LocusDeconvolution& locus, const Genotype& g) {
  const Genotype key(resolve(g.first, locus.observed), resolve(g.second, locus.observed));
  for (const auto& r : locus.ranked)
    if (r.genotype == key) return r.posterior;
  return 0.0;
}

std::size_t NocPosterior::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best + 1;
}

double estimate_total_mass(const Residue& residue, const EpgParams& epg) {
  if (residue.loci.empty()) return 0.0;
  double total = 0.0;
  for (const auto& l : residue.loci)
    for (const auto& p : l.peaks) total += p.height;
  const double per_unit = 2.0 * epg.mean_peak_height * (1.0 + epg.stutter_ratio);
  return total / (static_cast<double>(residue.loci.size()) * per_unit);
}

NocPosterior infer_noc(const Residue& residue, const FrequencyPanel& population, const EpgParams& epg, Stream& rng,
                       const NocOptions& options) {
  if (options.max_contributors < 1) throw std::invalid_argument("noc: max_contributors must be >= 1");
  if (options.samples < 1) throw std::invalid_argument("noc: need at least one importance sample");
  const std::size_t max_n = options.max_contributors;
  NocPosterior post;
  post.probs.assign(max_n, 1.0 / static_cast<double>(max_n));
  const double total_mass = estimate_total_mass(residue, epg);
  if (!(total_mass > 0.0)) return post;  // no evidence

  const PeakModel model(epg);
  const auto aligned = align_to_panel(residue, population);
  constexpr double kExplore = 0.2;

  std::vector<double> log_marginal(max_n, 0.0);
  std::vector<HypothesisContributor> hyp;
  std::vector<double> terms(options.samples);
  for (std::size_t i = 0; i < population.size(); ++i) {
    const auto& locus = population.locus(i);
    const auto freqs = population.freqs(i);
    const auto observed = observed_on_panel(aligned[i], locus);
    std::vector<double> proposal(locus.alleles.size());
    for (std::size_t k = 0; k < proposal.size(); ++k) {
      const bool seen = std::find(observed.begin(), observed.end(), locus.alleles[k]) != observed.end();
      proposal[k] = observed.empty() ? freqs[k]
                                     : (1.0 - kExplore) * (seen ? 1.0 / static_cast<double>(observed.size()) : 0.0) +
                                           kExplore * freqs[k];
    }
    std::discrete_distribution<std::size_t> draw(proposal.begin(), proposal.end());
    for (std::size_t n = 1; n <= max_n; ++n) {
      auto is_rng = rng.child("noc", i * 1024 + n);
      const double mass = total_mass / static_cast<double>(n);
      hyp.assign(n, {});
      for (std::size_t s = 0; s < options.samples; ++s) {
        double log_w = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
          const auto a = draw(is_rng), b = draw(is_rng);
          log_w += std::log(freqs[a] / proposal[a]) + std::log(freqs[b] / proposal[b]);
          hyp[c] = {Genotype(locus.alleles[a], locus.alleles[b]), mass};
        }
        terms[s] = log_w + model.locus_log_likelihood(aligned[i], hyp, locus, freqs);
      }
      log_marginal[n - 1] += stats::log_sum_exp(terms) - std::log(static_cast<double>(options.samples));
    }
  }
  const double norm = stats::log_sum_exp(log_marginal);  // uniform prior cancels
  for (std::size_t n = 0; n < max_n; ++n) post.probs[n] = std::exp(log_marginal[n] - norm);
  return post;
}

namespace {

/// Coordinate ascent over n equal-mass contributors at one locus.
std::vector<Genotype> deconvolve_locus(std::span<const Peak> peaks, const Candidates& cands, std::size_t n, double mass,
                                       const Locus& locus, std::span<const double> freqs, const PeakModel& model,
                                       Stream& rng, std::size_t restarts = 3, std::size_t max_sweeps = 10) {
  std::vector<HypothesisContributor> hyp(n);
  std::vector<std::size_t> best_state;
  double best_objective = -std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < restarts; ++r) {
    // First start: everyone at the lowest candidate (all-wildcard when present).
    std::vector<std::size_t> state(n);
    for (auto& s : state) s = r == 0 ? 0 : rng.below(cands.genotypes.size());
    for (std::size_t c = 0; c < n; ++c) hyp[c] = {cands.genotypes[state[c]], mass};
    double objective = -std::numeric_limits<double>::infinity();
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
      bool changed = false;
      for (std::size_t c = 0; c < n; ++c) {
        std::size_t arg = state[c];
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cands.genotypes.size(); ++k) {
          hyp[c].genotype = cands.genotypes[k];
          double prior = 0.0;
          for (std::size_t o = 0; o < n; ++o) prior += cands.log_prior[o == c ? k : state[o]];
          const double v = prior + model.locus_log_likelihood(peaks, hyp, locus, freqs);
          if (v > best) {
            best = v;
            arg = k;
          }
        }
        hyp[c].genotype = cands.genotypes[arg];
        if (arg != state[c]) changed = true;
        state[c] = arg;
        objective = best;
      }
      if (!changed) break;
    }
    if (objective > best_objective) {
      best_objective = objective;
      best_state = state;
    }
  }
  std::vector<Genotype> out;
  for (auto s : best_state) out.push_back(cands.genotypes[s]);
  return out;
}

}  // namespace

FullUnknownResult attack_full_unknown(const AttackerContext& ctx, const Residue& residue, Stream& rng,
                                      const NocOptions& options) {
  if (!ctx.population) throw std::invalid_argument("full-unknown attack: no population panel");
  const auto& panel = *ctx.population;
  FullUnknownResult out;
  auto noc_rng = rng.child("noc");
  out.noc = infer_noc(residue, panel, ctx.epg_params, noc_rng, options);
  const std::size_t n = out.noc.argmax();
  out.assumed_contributors = n;

  const PeakModel model(ctx.epg_params);
  const auto aligned = align_to_panel(residue, panel);
  const double mass = estimate_total_mass(residue, ctx.epg_params) / static_cast<double>(n);
  std::vector<std::vector<Genotype>> by_locus;
  auto dec_rng = rng.child("deconvolve");
  for (std::size_t i = 0; i < panel.size(); ++i) {
    const auto observed = observed_on_panel(aligned[i], panel.locus(i));
    out.observed.push_back(observed);
    if (!(mass > 0.0)) {
      by_locus.emplace_back(n, Genotype(kWildcard, kWildcard));
      continue;
    }
    const auto cands = candidate_genotypes(observed, panel.locus(i), panel.freqs(i));
    by_locus.push_back(deconvolve_locus(aligned[i], cands, n, mass, panel.locus(i), panel.freqs(i), model, dec_rng));
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Genotype> profile;
    bool informative = false;
    for (std::size_t i = 0; i < panel.size(); ++i) {
      profile.push_back(by_locus[i][c]);
      informative |= profile.back().second != kWildcard;  // wildcard sorts first
    }
    if (informative) out.candidates.push_back(std::move(profile));
  }
  if (!out.candidates.empty()) {
    auto pick_rng = rng.child("select");
    out.selection = pick_rng.below(out.candidates.size());
  }
  return out;
}

std::optional<std::size_t> attribute_candidate(const std::vector<Genotype>& candidate,
                                               std::span<const GenotypeProfile> contributors,
                                               const std::vector<std::vector<Allele>>& observed, Stream& rng) {
  std::vector<std::size_t> best;
  std::size_t best_count = 0;
  for (std::size_t t = 0; t < contributors.size(); ++t) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i)
      if (genotype_matches(candidate[i], contributors[t][i], observed[i])) ++count;
    if (count == 0) continue;
    if (count > best_count) {
      best_count = count;
      best.clear();
    }
    if (count == best_count) best.push_back(t);
  }
  if (best.empty()) return std::nullopt;
  return best[rng.below(best.size())];
}

// --- Game adversaries -----------------------------------------------------

AttackerContext context_for(const TestProcedure& procedure, const AttackerOptions& options) {
  AttackerContext ctx;
  ctx.population = procedure.panel;
  ctx.epg_params = procedure.epg;
  if (options.assumed_stutter_ratio) ctx.epg_params.stutter_ratio = *options.assumed_stutter_ratio;
  ctx.victim_mass = options.victim_mass;
  ctx.scenario = Scenario::C;
  ctx.known_mixture = std::vector<Contribution>{};
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, t0::Dilution>) {
          for (const auto& p : s.panel_profiles) ctx.known_mixture->push_back({p, s.per_profile_mass});
        } else if constexpr (std::is_same_v<T, t0::Randomizing>) {
          ctx.scenario = Scenario::D;
          ctx.known_mixture.reset();
        } else if constexpr (std::is_same_v<T, t0::AllelicLadder>) {
          ctx.known_ladder_mass = s.mass_per_allele;
        } else if constexpr (std::is_same_v<T, t0::Destruction>) {
          ctx.victim_mass *= 1.0 - s.efficiency;
        }
      },
      procedure.t0);
  return ctx;
}

namespace {

int decide(double score, Stream& rng) {
  if (score > 0.0) return 1;
  if (score < 0.0) return 0;
  return rng.coin() ? 1 : 0;
}

template <typename F>
double over_branches(const GameView& v, F&& f) {
  double s = f(v.positive->residue);
  if (v.negative) s += f(v.negative->residue);
  return s;
}

class CoinAttacker final : public GameAttacker {
 public:
  std::string name() const override { return "coin"; }
  int guess(const GameView&, Stream& rng) const override { return rng.coin() ? 1 : 0; }
};

class NegatedAttacker final : public GameAttacker {
 public:
  explicit NegatedAttacker(std::unique_ptr<GameAttacker> inner) : inner_(std::move(inner)) {}
  std::string name() const override { return "negated-" + inner_->name(); }
  int guess(const GameView& v, Stream& rng) const override { return 1 - inner_->guess(v, rng); }

 private:
  std::unique_ptr<GameAttacker> inner_;
};

/// Likelihood ratio between the two candidate victims given whatever part
/// of the mixture is public.
class ConfirmAttacker final : public GameAttacker {
 public:
  explicit ConfirmAttacker(AttackerContext ctx) : ctx_(std::move(ctx)), model_(ctx_.epg_params) {}
  std::string name() const override { return "confirm"; }
  int guess(const GameView& v, Stream& rng) const override {
    Hypothesis h0{mixture_or_empty(ctx_), ctx_.known_ladder_mass};
    Hypothesis h1 = h0;
    h0.contributors.push_back({*v.dna0, ctx_.victim_mass});
    h1.contributors.push_back({*v.dna1, ctx_.victim_mass});
    const auto& panel = *ctx_.population;
    return decide(over_branches(v, [&](const Residue& r) { return log_likelihood_ratio(r, h1, h0, panel, model_); }),
                  rng);
  }

 private:
  AttackerContext ctx_;
  PeakModel model_;
};

class HomerAttacker final : public GameAttacker {
 public:
  HomerAttacker(std::shared_ptr<const FrequencyPanel> panel, HomerCalibration cal)
      : panel_(std::move(panel)), cal_(std::move(cal)) {}
  std::string name() const override { return "homer"; }
  int guess(const GameView& v, Stream& rng) const override {
    return decide(over_branches(v,
                                [&](const Residue& r) {
                                  return homer_statistic(r, *v.dna1, *panel_, cal_) -
                                         homer_statistic(r, *v.dna0, *panel_, cal_);
                                }),
                  rng);
  }

 private:
  std::shared_ptr<const FrequencyPanel> panel_;
  HomerCalibration cal_;
};

class DeconvolveKnownAttacker final : public GameAttacker {
 public:
  explicit DeconvolveKnownAttacker(AttackerContext ctx) : ctx_(std::move(ctx)) {
    if (!ctx_.known_mixture) ctx_.known_mixture = std::vector<Contribution>{};
  }
  std::string name() const override { return "deconvolve-known"; }
  int guess(const GameView& v, Stream& rng) const override {
    return decide(over_branches(v,
                                [&](const Residue& r) {
                                  const auto iso = attack_isolate_known_mixture(ctx_, r);
                                  double s = 0.0;
                                  for (std::size_t i = 0; i < iso.loci.size(); ++i)
                                    s += std::log(std::max(posterior_of(iso.loci[i], (*v.dna1)[i]), 1e-300)) -
                                         std::log(std::max(posterior_of(iso.loci[i], (*v.dna0)[i]), 1e-300));
                                  return s;
                                }),
                  rng);
  }

 private:
  AttackerContext ctx_;
};

class FullUnknownAttacker final : public GameAttacker {
 public:
  FullUnknownAttacker(AttackerContext ctx, NocOptions noc) : ctx_(std::move(ctx)), noc_(noc) {}
  std::string name() const override { return "full-unknown"; }
  int guess(const GameView& v, Stream& rng) const override {
    std::uint64_t branch = 0;
    const double score = over_branches(v, [&](const Residue& r) {
      auto attack_rng = rng.child("branch", branch++);
      const auto res = attack_full_unknown(ctx_, r, attack_rng, noc_);
      if (!res.selection) return 0.0;
      const auto& cand = res.candidates[*res.selection];
      double s = 0.0;
      for (std::size_t i = 0; i < cand.size(); ++i)
        s += (genotype_matches(cand[i], (*v.dna1)[i], res.observed[i]) ? 1.0 : 0.0) -
             (genotype_matches(cand[i], (*v.dna0)[i], res.observed[i]) ? 1.0 : 0.0);
      return s;
    });
    return decide(score, rng);
  }

 private:
  AttackerContext ctx_;
  NocOptions noc_;
};

/// Uses only which alleles appear, never heights.
class PresenceOnlyAttacker final : public GameAttacker {
 public:
  explicit PresenceOnlyAttacker(std::shared_ptr<const FrequencyPanel> panel) : panel_(std::move(panel)) {}
  std::string name() const override { return "presence-only"; }
  int guess(const GameView& v, Stream& rng) const override {
    auto fraction = [&](const Residue& r, const GenotypeProfile& p) {
      const auto aligned = align_to_panel(r, *panel_);
      double hit = 0.0, total = 0.0;
      for (std::size_t i = 0; i < panel_->size(); ++i) {
        hit += present(aligned[i], p[i].first);
        total += 1.0;
        if (!p[i].homozygous()) {
          hit += present(aligned[i], p[i].second);
          total += 1.0;
        }
      }
      return hit / total;
    };
    return decide(over_branches(v, [&](const Residue& r) { return fraction(r, *v.dna1) - fraction(r, *v.dna0); }), rng);
  }

 private:
  std::shared_ptr<const FrequencyPanel> panel_;
};

double residue_distance(const Residue& a, const Residue& b) {
  double d = 0.0;
  for (const auto& la : a.loci) {
    const auto* lb = b.find(la.locus);
    std::span<const Peak> pb = lb ? std::span<const Peak>(lb->peaks) : std::span<const Peak>{};
    std::size_t i = 0, j = 0;
    while (i < la.peaks.size() || j < pb.size()) {
      if (j == pb.size() || (i < la.peaks.size() && la.peaks[i].allele < pb[j].allele)) {
        d += la.peaks[i++].height;
      } else if (i == la.peaks.size() || pb[j].allele < la.peaks[i].allele) {
        d += pb[j++].height;
      } else {
        d += std::abs(la.peaks[i++].height - pb[j++].height);
      }
    }
  }
  return d;
}

/// Runs the public test procedure on both candidate DNAs and picks the one
/// whose own residues look closer to the challenger's.
class CompareResiduesAttacker final : public GameAttacker {
 public:
  CompareResiduesAttacker(TestProcedure procedure, const AttackerOptions& options)
      : procedure_(std::move(procedure)), options_(options) {}
  std::string name() const override { return "compare-residues"; }
  int guess(const GameView& v, Stream& rng) const override {
    double score = 0.0;  // distance to DNA0 minus distance to DNA1
    auto compare = [&](const Residue& target, std::uint64_t copies, std::uint64_t branch) {
      for (int b = 0; b < 2; ++b) {
        Specimen s;
        s.contributions.push_back({b ? *v.dna1 : *v.dna0, options_.victim_mass});
        s.viral_rna_copies = copies;
        for (std::size_t r = 0; r < options_.self_runs; ++r) {
          auto own = rng.child("self", (branch * 2 + static_cast<std::uint64_t>(b)) * 1000 + r);
          const double d = residue_distance(target, run_test(procedure_, s, own).residue);
          score += b ? -d : d;
        }
      }
    };
    compare(v.positive->residue, options_.viral_copies, 0);
    if (v.negative) compare(v.negative->residue, 0, 1);
    return decide(score, rng);
  }

 private:
  TestProcedure procedure_;
  AttackerOptions options_;
};

}  // namespace

std::vector<std::string> attacker_names() {
  return {"confirm", "homer", "deconvolve-known", "full-unknown", "presence-only", "compare-residues", "coin"};
}

std::unique_ptr<GameAttacker> negate(std::unique_ptr<GameAttacker> inner) {
  return std::make_unique<NegatedAttacker>(std::move(inner));
}

std::unique_ptr<GameAttacker> make_attacker(std::string_view name, const TestProcedure& procedure,
                                            const AttackerOptions& options) {
  constexpr std::string_view kNegated = "negated-";
  if (name.starts_with(kNegated)) return negate(make_attacker(name.substr(kNegated.size()), procedure, options));
  procedure.validate();
  const auto ctx = context_for(procedure, options);
  if (name == "coin") return std::make_unique<CoinAttacker>();
  if (name == "confirm") return std::make_unique<ConfirmAttacker>(ctx);
  if (name == "deconvolve-known") return std::make_unique<DeconvolveKnownAttacker>(ctx);
  if (name == "full-unknown") return std::make_unique<FullUnknownAttacker>(ctx, options.noc);
  if (name == "presence-only") return std::make_unique<PresenceOnlyAttacker>(procedure.panel);
  if (name == "compare-residues") return std::make_unique<CompareResiduesAttacker>(procedure, options);
  if (name == "homer") {
    // Null residues: the procedure applied to a random non-victim.
    auto null_residue = [&](Stream& rng) {
      Specimen s;
      auto person_rng = rng.child("person");
      s.contributions.push_back({sample_genotype(*procedure.panel, person_rng), options.victim_mass});
      auto run_rng = rng.child("run");
      return run_test(procedure, s, run_rng).residue;
    };
    Stream rng(options.seed);
    return std::make_unique<HomerAttacker>(procedure.panel,
                                           calibrate_homer(*procedure.panel, null_residue, options.homer_calibration, rng));
  }
  throw std::invalid_argument("unknown attacker '" + std::string(name) + "'");
}

}  // namespace dnapriv
