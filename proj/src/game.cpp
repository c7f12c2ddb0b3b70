#include "dnapriv/game.hpp"
#include "dnapriv/parallel.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>
#include <stdexcept>

namespace dnapriv {

std::string_view to_string(ProfileChoice c) {
  return c == ProfileChoice::RandomPair ? "random_pair" : "adversarial_max_distance";
}

void GameConfig::validate() const {
  procedure.validate();
  if (trials < 1) throw std::invalid_argument("game: trials must be >= 1");
  if (viral_copies_when_positive < procedure.assay.limit_of_detection)
    throw std::invalid_argument("game: viral_copies_when_positive is below the limit of detection");
  if (!(victim_mass > 0.0)) throw std::invalid_argument("game: victim_mass must be > 0");
  if (fixed_pair) {
    validate_profile(*procedure.panel, fixed_pair->first);
    validate_profile(*procedure.panel, fixed_pair->second);
  }
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("game: confidence must be in (0, 1)");
  if (protocol && protocol->n_samples < 2) throw std::invalid_argument("game: cut-and-choose needs >= 2 samples");
}

AdvantageEstimate AdvantageEstimate::from_counts(std::uint64_t correct, std::uint64_t trials, double confidence) {
  AdvantageEstimate e;
  e.trials = trials;
  e.correct_guesses = correct;
  e.confidence = confidence;
  if (correct > trials) throw std::invalid_argument("advantage estimate: more correct guesses than trials");
  if (trials == 0) return e;
  e.p_hat = static_cast<double>(correct) / static_cast<double>(trials);
  // From the counts, so that c and trials - c give bit-identical values.
  const auto c2 = 2 * correct;
  e.adv_hat = static_cast<double>(c2 > trials ? c2 - trials : trials - c2) / static_cast<double>(trials);
  const auto ci = stats::wilson(correct, trials, confidence);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  const double dl = std::abs(ci.low - 0.5), dh = std::abs(ci.high - 0.5);
  e.adv_ci_high = std::min(1.0, 2.0 * std::max(dl, dh));
  e.adv_ci_low = (ci.low <= 0.5 && ci.high >= 0.5) ? 0.0 : 2.0 * std::min(dl, dh);
  assert(e.adv_hat >= 0.0 && e.adv_hat <= 1.0);
  assert(e.adv_ci_low <= e.adv_hat && e.adv_hat <= e.adv_ci_high);
  return e;
}

namespace {

TestRun run_branch(const GameConfig& config, const Specimen& s, Stream rng, bool& aborted) {
  if (!config.protocol) return run_test(config.procedure, s, rng);
  CutAndChooseOptions opts{config.protocol->verify_all_but_one, config.protocol->control_target_mass};
  auto out = cut_and_choose(config.protocol->n_samples, config.protocol->kit, rng, config.procedure, s, opts);
  if (out.aborted) {
    aborted = true;
    return {};
  }
  return {*out.result, std::move(*out.residue)};
}

}  // namespace

Round challenger_round(const GameConfig& config, const GenotypeProfile& dna0, const GenotypeProfile& dna1, Stream& rng) {
  Round r;
  auto b_rng = rng.child("b");
  r.b = b_rng.coin() ? 1 : 0;
  Specimen negative;
  negative.contributions.push_back({r.b ? dna1 : dna0, config.victim_mass});
  Specimen virus;
  virus.viral_rna_copies = config.viral_copies_when_positive;
  const std::pair<Specimen, double> parts[] = {{negative, 1.0}, {virus, 1.0}};
  const Specimen positive = mix(parts);
  r.positive = run_branch(config, positive, rng.child("positive"), r.aborted);
  if (!r.aborted) r.negative = run_branch(config, negative, rng.child("negative"), r.aborted);
  return r;
}

std::pair<GenotypeProfile, GenotypeProfile> adversarial_pair(const FrequencyPanel& panel, std::size_t search, Stream& rng) {
  if (search < 1) throw std::invalid_argument("adversarial pair: search must be >= 1");
  std::pair<GenotypeProfile, GenotypeProfile> best;
  std::size_t best_score = 0;
  for (std::size_t i = 0; i < search; ++i) {
    auto a = sample_genotype(panel, rng);
    auto b = sample_genotype(panel, rng);
    const auto score = disjoint_loci(a, b);
    if (i == 0 || score > best_score) {
      best_score = score;
      best = {std::move(a), std::move(b)};
    }
  }
  return best;
}

GameResult run_game(const GameConfig& config) {
  config.validate();
  auto options = config.attacker_options;
  options.victim_mass = config.victim_mass;
  options.viral_copies = config.viral_copies_when_positive;
  options.seed = Stream(config.root_seed).child("attacker-setup").seed();
  const auto attacker = make_attacker(config.attacker, config.procedure, options);
  return run_game(config, *attacker);
}

GameResult run_game(const GameConfig& config, const GameAttacker& attacker) {
  config.validate();
  const Stream root(config.root_seed);
  std::optional<std::pair<GenotypeProfile, GenotypeProfile>> fixed = config.fixed_pair;
  if (!fixed && config.profile_choice == ProfileChoice::AdversarialMaxDistance) {
    auto adv_rng = root.child("adversary");
    fixed = adversarial_pair(*config.procedure.panel, config.profile_search, adv_rng);
  }

  GameResult result;
  result.attacker = attacker.name();
  result.records.resize(config.trials);

  auto run_trial = [&](std::size_t t) {
    const Stream trial = root.child("trial", t);
    GenotypeProfile dna0, dna1;
    if (fixed) {
      dna0 = fixed->first;
      dna1 = fixed->second;
    } else {
      auto prof_rng = trial.child("profiles");
      dna0 = sample_genotype(*config.procedure.panel, prof_rng);
      dna1 = sample_genotype(*config.procedure.panel, prof_rng);
    }
    auto ch_rng = trial.child("challenger");
    const auto round = challenger_round(config, dna0, dna1, ch_rng);
    auto& rec = result.records[t];
    rec.index = t;
    rec.b = round.b;
    rec.aborted = round.aborted;
    if (round.aborted) return;
    GameView view{&round.positive, config.single_branch ? nullptr : &round.negative, &dna0, &dna1};
    auto att_rng = trial.child("attacker");
    rec.guess = attacker.guess(view, att_rng);
    rec.positive_peaks = round.positive.residue.peak_count();
    rec.negative_peaks = round.negative.residue.peak_count();
  };

  parallel_for(config.trials, config.threads, run_trial);

  std::uint64_t correct = 0, completed = 0;
  for (const auto& r : result.records) {
    if (r.aborted) {
      ++result.aborted;
      continue;
    }
    ++completed;
    correct += r.guess == r.b;
  }
  result.estimate = AdvantageEstimate::from_counts(correct, completed, config.confidence);
  return result;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::SecureAtThreshold: return "secure_at_threshold";
    case Verdict::Insecure: return "insecure";
    case Verdict::Inconclusive: break;
  }
  return "inconclusive";
}

Verdict check_security(const AdvantageEstimate& estimate, double threshold) {
  if (estimate.adv_ci_high < threshold) return Verdict::SecureAtThreshold;
  if (estimate.adv_ci_low >= threshold) return Verdict::Insecure;
  return Verdict::Inconclusive;
}

namespace {

/// Feature matrix (rows = residues) over the union of observed labels.
std::vector<std::vector<double>> residue_features(std::span<const Residue> a, std::span<const Residue> b) {
  std::set<std::pair<std::string, Allele>> labels;
  std::set<std::string> loci;
  for (auto span : {a, b})
    for (const auto& r : span)
      for (const auto& l : r.loci) {
        loci.insert(l.locus);
        for (const auto& p : l.peaks) labels.insert({l.locus, p.allele});
      }
  std::vector<std::vector<double>> rows;
  for (auto span : {a, b})
    for (const auto& r : span) {
      std::vector<double> f;
      f.reserve(labels.size() * 2 + loci.size() * 2);
      for (const auto& [locus, allele] : labels) {
        double h = 0.0;
        if (const auto* lp = r.find(locus))
          for (const auto& p : lp->peaks)
            if (p.allele == allele) h = p.height;
        f.push_back(h > 0.0 ? 1.0 : 0.0);
        f.push_back(std::log1p(h));
      }
      for (const auto& locus : loci) {
        std::vector<double> hs;
        if (const auto* lp = r.find(locus))
          for (const auto& p : lp->peaks) hs.push_back(p.height);
        std::sort(hs.begin(), hs.end());
        f.push_back(hs.empty() ? 0.0 : std::log1p(hs.back()));
        f.push_back(hs.empty() ? 0.0 : std::log1p(hs[hs.size() / 2]));
      }
      rows.push_back(std::move(f));
    }
  return rows;
}

}  // namespace

EquivResult chem_equiv(std::span<const Residue> a, std::span<const Residue> b, Stream& rng, const EquivOptions& options) {
  if (a.empty() || b.empty()) throw std::invalid_argument("chem_equiv: empty sample");
  const auto rows = residue_features(a, b);
  const std::size_t n = rows.size(), na = a.size(), nb = b.size();
  const std::size_t dims = rows.front().size();

  // Keep only features that vary; scale by the pooled variance, which is
  // invariant under relabelling.
  std::vector<std::size_t> keep;
  std::vector<double> total(dims, 0.0), inv_var(dims, 0.0);
  for (std::size_t f = 0; f < dims; ++f) {
    double s = 0.0, ss = 0.0;
    for (const auto& r : rows) {
      s += r[f];
      ss += r[f] * r[f];
    }
    const double var = (ss - s * s / static_cast<double>(n)) / static_cast<double>(n - 1 > 0 ? n - 1 : 1);
    total[f] = s;
    if (var > 1e-12) {
      keep.push_back(f);
      inv_var[f] = 1.0 / var;
    }
  }
  EquivResult out;
  if (keep.empty()) return out;

  auto statistic = [&](const std::vector<std::size_t>& group_a) {
    double t = 0.0;
    for (auto f : keep) {
      double sa = 0.0;
      for (auto i : group_a) sa += rows[i][f];
      const double diff = sa / static_cast<double>(na) - (total[f] - sa) / static_cast<double>(nb);
      t += diff * diff * inv_var[f];
    }
    return t;
  };

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::size_t> group(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(na));
  out.statistic = statistic(group);
  std::size_t exceed = 0;
  for (std::size_t p = 0; p < options.permutations; ++p) {
    for (std::size_t i = 0; i < na; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    group.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(na));
    if (statistic(group) >= out.statistic) ++exceed;
  }
  out.p_value = static_cast<double>(exceed + 1) / static_cast<double>(options.permutations + 1);
  out.distinguishable = out.p_value < options.alpha;
  return out;
}

DistributionReport residue_distribution_check(const TestProcedure& procedure, const GenotypeProfile& dna,
                                              const GenotypeProfile& dna_prime, std::size_t trials, Stream& rng,
                                              double victim_mass, std::uint64_t viral_copies,
                                              const EquivOptions& options) {
  if (!std::holds_alternative<t0::Randomizing>(procedure.t0))
    throw std::invalid_argument("residue distribution check: procedure step must be randomizing");
  if (trials < 1) throw std::invalid_argument("residue distribution check: trials must be >= 1");
  procedure.validate();
  auto family = [&](const GenotypeProfile& p, std::string_view label) {
    Specimen s;
    s.contributions.push_back({p, victim_mass});
    s.viral_rna_copies = viral_copies;
    std::vector<Residue> out;
    for (std::size_t t = 0; t < trials; ++t) {
      auto run_rng = rng.child(label, t);
      out.push_back(run_test(procedure, s, run_rng).residue);
    }
    return out;
  };
  const auto fa = family(dna, "family-a");
  const auto fb = family(dna_prime, "family-b");
  auto perm_rng = rng.child("permutations");
  return {chem_equiv(fa, fb, perm_rng, options), trials};
}

ImpossibilityReport impossibility_demo(const TestProcedure& procedure, const GenotypeProfile& dna0,
                                       const GenotypeProfile& dna1, std::size_t trials, std::uint64_t seed,
                                       std::size_t family_size, unsigned threads) {
  procedure.validate();
  const Stream root(seed);
  ImpossibilityReport report;
  const std::uint64_t copies = 1000;

  auto family = [&](const GenotypeProfile& p, std::string_view label) {
    Specimen s;
    s.contributions.push_back({p, 1.0});
    s.viral_rna_copies = copies;
    std::vector<Residue> out;
    for (std::size_t t = 0; t < family_size; ++t) {
      auto run_rng = root.child(label, t);
      out.push_back(run_test(procedure, s, run_rng).residue);
    }
    return out;
  };
  const auto f0 = family(dna0, "family-0");
  const auto f1 = family(dna1, "family-1");
  auto perm_rng = root.child("permutations");
  report.equiv = chem_equiv(f0, f1, perm_rng);
  if (!report.equiv.distinguishable) return report;

  GameConfig game;
  game.procedure = procedure;
  game.attacker = "compare-residues";
  game.trials = trials;
  game.fixed_pair = {dna0, dna1};
  game.viral_copies_when_positive = std::max<std::uint64_t>(copies, procedure.assay.limit_of_detection);
  game.root_seed = root.child("game").seed();
  game.threads = threads;
  report.attack = run_game(game);
  return report;
}

}  // namespace dnapriv
