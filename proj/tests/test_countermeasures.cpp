#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <boost/math/distributions/gamma.hpp>

#include "dnapriv/config.hpp"
#include "dnapriv/countermeasures.hpp"
#include "dnapriv/game.hpp"

using namespace dnapriv;

namespace {

std::shared_ptr<const FrequencyPanel> panel() {
  static const auto p = std::make_shared<const FrequencyPanel>(load_panel(default_panel_path()));
  return p;
}

std::vector<GenotypeProfile> people(std::size_t n, std::uint64_t seed) {
  Stream rng(seed);
  std::vector<GenotypeProfile> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_genotype(*panel(), rng));
  return out;
}

Specimen patient(const GenotypeProfile& p, double mass = 1.0, std::uint64_t copies = 0) {
  Specimen s;
  s.contributions.push_back({p, mass});
  s.viral_rna_copies = copies;
  return s;
}

TestProcedure with(PrivacyStep step) {
  TestProcedure t;
  t.panel = panel();
  t.t0 = std::move(step);
  return t;
}

std::size_t aborts(std::size_t n, std::size_t trials, bool all_but_one, std::uint64_t seed) {
  const auto proc = with(t0::Destruction{1.0, 0.0});
  const auto victim = people(1, seed).front();
  const KitModel fake{KitBehavior::FakeColorNoDnase, false};
  std::size_t a = 0;
  const Stream root(seed);
  for (std::size_t t = 0; t < trials; ++t) {
    auto rng = root.child("t", t);
    a += cut_and_choose(n, fake, rng, proc, patient(victim), {all_but_one, 0.0}).aborted;
  }
  return a;
}

}  // namespace

TEST_CASE("dilution") {
  const auto v = people(1, 1).front();
  const auto k20 = people(20, 2);
  CHECK_THROWS_AS(apply_dilution(patient(v), {}, 1.0), std::invalid_argument);
  const auto d = apply_dilution(patient(v, 1.0, 7), k20, 1.0);
  CHECK(d.human_mass() == doctest::Approx(21.0));
  CHECK(d.viral_rna_copies == 7);
  // The same panel gives the same contribution multiset every time.
  const auto again = apply_dilution(patient(v, 1.0, 7), k20, 1.0);
  for (std::size_t i = 0; i < d.contributions.size(); ++i) CHECK(again.contributions[i].profile == d.contributions[i].profile);
}

TEST_CASE("dilution with one profile keeps the victim's private alleles visible") {
  const auto v = people(1, 3).front();
  const auto other = people(1, 4);
  const auto proc = with(t0::Dilution{other, 1.0});
  int private_alleles = 0, seen = 0;
  for (int seed = 0; seed < 200; ++seed) {
    Stream rng(seed);
    const auto run = run_test(proc, patient(v), rng);
    for (std::size_t l = 0; l < panel()->size(); ++l) {
      const auto* lp = run.residue.find(panel()->locus(l).name);
      for (Allele a : {v[l].first, v[l].second}) {
        if (other[0][l].contains(a) || other[0][l].contains(a + 1)) continue;  // shared, or masked by stutter
        ++private_alleles;
        if (lp && std::any_of(lp->peaks.begin(), lp->peaks.end(), [&](const Peak& p) { return p.allele == a; })) ++seen;
      }
    }
  }
  REQUIRE(private_alleles > 0);
  CHECK(seen / double(private_alleles) > 0.99);
}

TEST_CASE("randomizing: degenerate zero count leaves the specimen alone") {
  const auto v = people(1, 5).front();
  const auto pool = people(10, 6);
  Stream rng(1);
  const auto out = apply_randomizing(patient(v), pool, CountDistribution::degenerate(0), {}, rng);
  CHECK(out.contributions.size() == 1);
}

TEST_CASE("randomizing: contributor counts are uniform on {2..6}") {
  const auto v = people(1, 5).front();
  const auto pool = people(100, 7);
  const auto counts = CountDistribution::uniform(2, 6);
  std::vector<std::uint64_t> hist(5, 0);
  const Stream root(2);
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    auto rng = root.child("t", t);
    const auto out = apply_randomizing(patient(v, 1.0, 9), pool, counts, {}, rng);
    CHECK(out.viral_rna_copies == 9);
    ++hist[out.contributions.size() - 1 - 2];
  }
  for (auto h : hist) CHECK(std::abs(h / double(n) - 0.2) <= 0.02);
  CHECK(stats::chi_square_gof(hist, std::vector<double>(5, 0.2)) > 0.01);
}

TEST_CASE("randomizing: fresh draws differ between seeds") {
  // |pool| = 100, n = 4: equal sets with probability 1 / C(100, 4).
  const auto v = people(1, 5).front();
  const auto pool = people(100, 8);
  int same = 0;
  const int n = 2000;
  for (int t = 0; t < n; ++t) {
    Stream a(2 * t), b(2 * t + 1);
    auto set_of = [&](Stream& rng) {
      const auto s = apply_randomizing(patient(v), pool, CountDistribution::degenerate(4), {}, rng);
      std::set<std::vector<Genotype>> out;
      for (std::size_t i = 1; i < s.contributions.size(); ++i) out.insert(s.contributions[i].profile.genotypes);
      return out;
    };
    same += set_of(a) == set_of(b);
  }
  // 1 - 1/C(100,4) is about 1 - 2.6e-7, so any repeat at all would be suspicious.
  CHECK(same == 0);
}

TEST_CASE("allelic ladder") {
  const auto v = people(1, 9).front();
  const auto s = apply_allelic_ladder(patient(v, 1.0, 3), *panel(), 0.0);
  CHECK(s.ladder.empty());
  CHECK(s.viral_rna_copies == 3);

  const auto empty_ladder = apply_allelic_ladder(Specimen{}, *panel(), 1.0);
  Stream rng(1);
  EpgParams e;
  e.dropin_rate = 0;
  const auto r = simulate_residue(empty_ladder, *panel(), e, rng);
  for (std::size_t l = 0; l < panel()->size(); ++l) {
    const auto* lp = r.find(panel()->locus(l).name);
    REQUIRE(lp);
    for (Allele a : panel()->locus(l).alleles)
      CHECK(std::any_of(lp->peaks.begin(), lp->peaks.end(), [&](const Peak& p) { return p.allele == a; }));
  }
}

TEST_CASE("ladder at victim mass blinds the presence-only attacker") {
  GameConfig c;
  c.procedure = with(t0::AllelicLadder{1.0});
  c.attacker = "presence-only";
  c.trials = 10000;
  c.root_seed = 17;
  const auto r = run_game(c);
  CHECK(r.estimate.ci_low <= 0.5);
  CHECK(r.estimate.ci_high >= 0.5);
}

TEST_CASE("dnase examples") {
  const auto v = people(1, 10).front();
  const auto full = apply_dnase(patient(v, 1.0, 11), 1.0, 0.0);
  CHECK(full.specimen.human_mass() == 0.0);
  CHECK(full.color == Color::Red);
  CHECK(full.specimen.viral_rna_copies == 11);

  const auto none = apply_dnase(patient(v, 1.0, 11), 0.0, 0.0);
  CHECK(none.specimen.human_mass() == 1.0);
  CHECK(none.color == Color::Blue);
}

TEST_CASE("dnase at 0.999 on 1000 units leaves 1 unit, all peaks sub-threshold") {
  // Height scale of 1 RFU per unit, so one surviving unit sits far below 50 RFU.
  const auto v = people(1, 12).front();
  const auto d = apply_dnase(patient(v, 1000.0), 0.999, 50.0);
  CHECK(d.specimen.human_mass() == doctest::Approx(1.0));
  CHECK(d.color == Color::Red);

  EpgParams e;
  e.mean_peak_height = 1.0;
  e.dropin_rate = 0.0;
  // Oracle: every expected peak (alleles and stutter) below the threshold.
  double p_none = 1.0;
  for (std::size_t l = 0; l < panel()->size(); ++l) {
    const double copies = v[l].homozygous() ? 2.0 : 1.0;
    for (int k = 0; k < (v[l].homozygous() ? 1 : 2); ++k) {
      boost::math::gamma_distribution<double> g(16.0, copies / 16.0);  // CV 0.25
      p_none *= boost::math::cdf(g, 50.0);
    }
  }
  int none = 0;
  for (int seed = 0; seed < 1000; ++seed) {
    Stream rng(seed);
    none += simulate_residue(d.specimen, *panel(), e, rng).peak_count() == 0;
  }
  CHECK(std::abs(none / 1000.0 - p_none) <= 0.01);
}

TEST_CASE("dnase color is sound") {
  Stream rng(13);
  const auto v = people(1, 14).front();
  for (int i = 0; i < 2000; ++i) {
    const double mass = 1000 * rng.uniform();
    const double eff = rng.uniform();
    const double thr = 100 * rng.uniform();
    const auto d = apply_dnase(patient(v, mass + 1e-9), eff, thr);
    if (d.color == Color::Red) CHECK(d.specimen.dna_mass() <= thr);
    else CHECK(d.specimen.dna_mass() > thr);
  }
}

TEST_CASE("every step leaves the viral copies alone") {
  const auto v = people(1, 15).front();
  const auto others = people(30, 16);
  const Specimen s = patient(v, 1.0, 12345);
  Stream rng(1);
  CHECK(apply_dilution(s, others, 1.0).viral_rna_copies == 12345);
  CHECK(apply_randomizing(s, others, CountDistribution::uniform(2, 6), {0.5, 2.0}, rng).viral_rna_copies == 12345);
  CHECK(apply_allelic_ladder(s, *panel(), 1.0).viral_rna_copies == 12345);
  CHECK(apply_dnase(s, 1.0).specimen.viral_rna_copies == 12345);
}

TEST_CASE("test validity under every step") {
  const auto others = people(30, 18);
  t0::Randomizing r;
  r.pool = others;
  const std::vector<TestProcedure> procs = {with(t0::Identity{}), with(t0::Dilution{people(5, 19), 1.0}), with(r),
                                            with(t0::AllelicLadder{1.0}), with(t0::Destruction{1.0, 0.0})};
  Stream who(20);
  for (const auto& proc : procs)
    for (int seed = 0; seed < 200; ++seed) {
      const auto v = sample_genotype(*panel(), who);
      Stream a(seed), b(seed);
      CHECK(run_test(proc, patient(v, 1.0, proc.assay.limit_of_detection), a).result.outcome == Outcome::Positive);
      CHECK(run_test(proc, patient(v, 1.0, 0), b).result.outcome == Outcome::Negative);
    }
}

TEST_CASE("cut-and-choose with an honest kit never aborts") {
  const auto proc = with(t0::Destruction{1.0, 0.0});
  const auto v = people(1, 21).front();
  for (int t = 0; t < 1000; ++t) {
    Stream rng(t);
    const auto out = cut_and_choose(2, KitModel{}, rng, proc, patient(v, 1.0, t % 2 ? 1000 : 0));
    CHECK_FALSE(out.aborted);
    CHECK(out.result->outcome == (t % 2 ? Outcome::Positive : Outcome::Negative));
  }
}

TEST_CASE("cut-and-choose catches a fake kit at rate 1/n") {
  const std::size_t trials = 10000;
  CHECK(std::abs(aborts(2, trials, false, 1) / double(trials) - 0.5) <= 0.02);
  CHECK(std::abs(aborts(4, trials, false, 2) / double(trials) - 0.25) <= 0.02);
  // Exact binomial band around 1/n for a few n.
  for (std::size_t n : {3, 5, 8}) {
    const auto a = aborts(n, 4000, false, 10 + n);
    const auto band = stats::binomial_band(4000, 1.0 / n, 0.99);
    CHECK(a >= band.low);
    CHECK(a <= band.high);
  }
  // Verifying all but one vial catches it with probability (n - 1)/n.
  CHECK(std::abs(aborts(4, trials, true, 3) / double(trials) - 0.75) <= 0.02);
}

TEST_CASE("cut-and-choose preconditions") {
  const auto v = people(1, 22).front();
  Stream rng(1);
  CHECK_THROWS_AS(cut_and_choose(1, KitModel{}, rng, with(t0::Destruction{}), patient(v)), std::invalid_argument);
  CHECK_THROWS_AS(cut_and_choose(2, KitModel{}, rng, with(t0::Identity{}), patient(v)), std::invalid_argument);
}

TEST_CASE("process control") {
  const auto proc = with(t0::Destruction{1.0, 0.0});
  const auto v = people(1, 23).front();
  const KitModel killer{KitBehavior::KillsVirusToo, true};
  const KitModel killer_keeps_control{KitBehavior::KillsVirusToo, false};
  for (int t = 0; t < 1000; ++t) {
    Stream a(t), b(t), c(t);
    const auto honest = process_control(proc, patient(v), 1.0, a);
    CHECK(honest.run.residue.control_target_detected);
    CHECK_FALSE(honest.invalid);
    // Infected patient, virus destroyed: the false negative is flagged.
    const auto bad = process_control(proc, patient(v, 1.0, 1000), 1.0, b, killer);
    CHECK(bad.run.result.outcome == Outcome::Negative);
    CHECK(bad.invalid);
    CHECK_FALSE(process_control(proc, patient(v, 1.0, 1000), 1.0, c, killer_keeps_control).invalid);
  }
  Stream rng(1);
  CHECK_THROWS_AS(process_control(proc, patient(v), 0.0, rng), std::invalid_argument);
}

TEST_CASE("procedure validation") {
  CHECK_THROWS(with(t0::Dilution{{}, 1.0}).validate());
  CHECK_THROWS(with(t0::Destruction{1.5, 0.0}).validate());
  t0::Randomizing r;
  r.pool = people(3, 24);
  r.counts = CountDistribution::uniform(2, 6);
  CHECK_THROWS(with(r).validate());
  CHECK_NOTHROW(with(t0::AllelicLadder{0.0}).validate());
}
