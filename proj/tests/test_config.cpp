#include "doctest.h"

#include <algorithm>
#include <fstream>

#include "dnapriv/acceptance.hpp"
#include "dnapriv/config.hpp"
#include "dnapriv/report.hpp"

using namespace dnapriv;
using nlohmann::json;

namespace {

std::shared_ptr<const FrequencyPanel> panel() { return resolve_panel("default"); }

json identity_spec() {
  return json::parse(R"({"name": "id", "procedure": {"t0": {"kind": "identity"}},
                         "attacker": {"name": "coin"}, "game": {"trials": 60, "threshold": 0.05}})");
}


}  // namespace

TEST_CASE("experiment parsing rejects bad specs") {
  CHECK_THROWS_AS(parse_experiment(json::parse(R"({"name": "a", "bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(json::parse(R"({"name": "../a"})")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(json::parse(R"({"name": ""})")), ConfigError);
  CHECK_THROWS_AS(parse_experiment(json::parse(R"([1, 2])")), ConfigError);
  // Sweep paths must name existing numeric fields; at most two axes.
  CHECK_THROWS_AS(parse_experiment(json::parse(
                      R"({"name": "a", "procedure": {"t0": {"kind": "dilution", "k": 5}},
                          "sweep": [{"path": "/procedure/t0/kind", "values": [1]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(json::parse(R"({"name": "a", "sweep": [{"path": "/game/trials", "values": [1]}]})")),
                  ConfigError);
  CHECK_THROWS_AS(parse_experiment(json::parse(
                      R"({"name": "a", "game": {"trials": 1, "victim_mass": 1, "profile_search": 3},
                          "sweep": [{"path": "/game/trials", "values": [1]},
                                    {"path": "/game/victim_mass", "values": [1]},
                                    {"path": "/game/profile_search", "values": [1]}]})")),
                  ConfigError);
}

TEST_CASE("game settings reject bad values") {
  auto s = identity_spec();
  s["attacker"]["name"] = "psychic";
  CHECK_THROWS_AS(build_game(s, panel(), 1, 1), ConfigError);
  s = identity_spec();
  s["procedure"]["t0"]["kind"] = "teleport";
  CHECK_THROWS_AS(build_game(s, panel(), 1, 1), ConfigError);
  s = identity_spec();
  s["procedure"]["t0"] = {{"kind", "identity"}, {"k", 3}};
  CHECK_THROWS_AS(build_game(s, panel(), 1, 1), ConfigError);
  s = identity_spec();
  s["game"]["profile_choice"] = "best";
  CHECK_THROWS_AS(build_game(s, panel(), 1, 1), ConfigError);
  s = identity_spec();
  s["procedure"]["t0"] = {{"kind", "dnase"}, {"efficiency", 1.5}};
  CHECK_THROWS_AS(build_game(s, panel(), 1, 1), ConfigError);
  CHECK_NOTHROW(build_game(identity_spec(), panel(), 1, 1));
  CHECK_THROWS_AS(resolve_panel("no/such/panel.csv"), ConfigError);
}

TEST_CASE("protocol specs") {
  CHECK_THROWS_AS(build_protocol(json{{"kit", "magic"}}), ConfigError);
  for (const char* k : {"honest", "kills_virus_too", "fake_color_no_dnase"}) CHECK_NOTHROW(build_protocol(json{{"kit", k}}));
  const auto ident = json::parse(R"({"name": "p", "procedure": {"t0": {"kind": "identity"}}})");
  CHECK_THROWS_AS(parse_protocol_spec(ident, {}, 1), ConfigError);
  const auto ok = parse_protocol_spec(json::parse(R"({"name": "p", "protocol": {"kit": "honest"}, "trials": 10})"), {}, 1);
  CHECK(std::holds_alternative<t0::Destruction>(ok.procedure.t0));
  CHECK(ok.protocol.n_samples == 2);
}

TEST_CASE("sweep expansion") {
  const auto spec = parse_experiment(json::parse(
      R"({"name": "sw", "procedure": {"t0": {"kind": "dilution", "k": 5}}, "game": {"victim_mass": 1.0},
          "sweep": [{"path": "/procedure/t0/k", "values": [0, 5, 20]},
                    {"path": "/game/victim_mass", "values": [0.5, 2]}]})"));
  const auto points = expand_sweep(spec);
  REQUIRE(points.size() == 6);
  CHECK(points[0].suffix == "__k-0__victim_mass-0.5");
  CHECK(points[5].suffix == "__k-20__victim_mass-2");
  CHECK(points[2].spec["procedure"]["t0"]["k"].is_number_integer());
  CHECK(points[2].spec["procedure"]["t0"]["k"] == 5);
  CHECK(points[3].coordinates == json({{"k", 5}, {"victim_mass", 2}}));
  for (const auto& p : points) {
    CHECK_FALSE(p.spec.contains("sweep"));
    CHECK(filesystem_safe(spec.name + p.suffix));
  }
  CHECK(expand_sweep(parse_experiment(identity_spec())).size() == 1);
}

TEST_CASE("filesystem-safe names") {
  CHECK(filesystem_safe("dnase-1.0_x"));
  CHECK_FALSE(filesystem_safe(""));
  CHECK_FALSE(filesystem_safe("a/b"));
  CHECK_FALSE(filesystem_safe(".."));
  CHECK_FALSE(filesystem_safe("a b"));
}

TEST_CASE("dilution profiles are nested across k") {
  const auto a = build_procedure(json::parse(R"({"t0": {"kind": "dilution", "k": 5}})"), panel(), 9);
  const auto b = build_procedure(json::parse(R"({"t0": {"kind": "dilution", "k": 20}})"), panel(), 9);
  const auto& pa = std::get<t0::Dilution>(a.t0).panel_profiles;
  const auto& pb = std::get<t0::Dilution>(b.t0).panel_profiles;
  REQUIRE(pa.size() == 5);
  REQUIRE(pb.size() == 20);
  for (std::size_t i = 0; i < 5; ++i) CHECK(pa[i] == pb[i]);
  const auto c = build_procedure(json::parse(R"({"t0": {"kind": "dilution", "k": 5}})"), panel(), 10);
  CHECK_FALSE(std::get<t0::Dilution>(c.t0).panel_profiles[0] == pa[0]);
}

TEST_CASE("config hash") {
  const auto a = identity_spec();
  CHECK(config_hash(a) == config_hash(json::parse(a.dump())));
  CHECK(config_hash(a).size() == 16);
  auto b = a;
  b["game"]["trials"] = 61;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("game reports round-trip through JSON") {
  const auto spec = parse_experiment(identity_spec());
  const auto point = expand_sweep(spec).front();
  const auto settings = build_game(point.spec, panel(), 3, 1);
  const auto result = run_game(settings.config);
  const auto report = game_report(spec.name, point, settings, result, 1.25);
  CHECK(report["kind"] == "game_report");
  CHECK(report["seed"] == 3);
  CHECK(report["tallies"]["trials"] == 60);
  CHECK(report["attacker"] == "coin");
  CHECK(report.contains("wall_clock_seconds"));
  CHECK(render_table(json::parse(report.dump(2))) == render_table(report));

  // Everything but the clock is a function of spec and seed.
  auto again = game_report(spec.name, point, settings, run_game(settings.config), std::nullopt);
  auto stripped = report;
  stripped.erase("wall_clock_seconds");
  CHECK(again == stripped);

  const auto csv = render_csv(report);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const auto trials = trials_csv(result);
  CHECK(std::count(trials.begin(), trials.end(), '\n') == 61);
}

TEST_CASE("sweep summary flags the trend") {
  auto body = json::parse(R"({"name": "k", "procedure": {"t0": {"kind": "dilution", "k": 0}},
                              "attacker": {"name": "confirm"}, "game": {"trials": 100},
                              "sweep": [{"path": "/procedure/t0/k", "values": [0, 5, 10, 20]}]})");
  const auto spec = parse_experiment(body);
  json reports = json::array();
  for (const auto& p : expand_sweep(spec)) {
    const auto s = build_game(p.spec, panel(), 42, 1);
    reports.push_back(game_report(spec.name, p, s, run_game(s.config), std::nullopt));
  }
  const auto summary = game_summary(spec.name, reports);
  CHECK(summary["kind"] == "game_summary");
  CHECK(summary["reports"].size() == 4);
  CHECK(summary["trend"]["axis"] == "k");
  CHECK(summary["trend"].contains("adv_non_increasing"));
  CHECK(render_table(json::parse(summary.dump())) == render_table(summary));
  const auto csv = render_csv(summary);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("protocol runs") {
  auto spec_for = [](const char* protocol) {
    return parse_protocol_spec(json::parse(std::string(R"({"name": "p", "trials": 2000, "protocol": )") + protocol + "}"),
                               {}, 5);
  };
  const auto honest = run_protocol(spec_for(R"({"kit": "honest", "control_target_mass": 1.0})"), 5, 1);
  CHECK(honest.aborted == 0);
  CHECK(honest.invalid_negatives == 0);

  const auto fake = run_protocol(spec_for(R"({"kit": "fake_color_no_dnase"})"), 5, 1);
  const auto ci = stats::wilson(fake.aborted, fake.trials, 0.99);
  CHECK(ci.low <= 0.5);
  CHECK(ci.high >= 0.5);

  const auto killer = spec_for(R"({"kit": "kills_virus_too", "destroys_control": true, "control_target_mass": 1.0})");
  const auto k = run_protocol(killer, 5, 1);
  CHECK(k.control_negatives > 0);
  CHECK(k.invalid_negatives == k.control_negatives);

  const auto report = protocol_report(killer, k, 5, std::nullopt);
  CHECK(report["kind"] == "protocol_report");
  CHECK(render_table(json::parse(report.dump())) == render_table(report));
  CHECK(run_protocol(killer, 5, 3).invalid_negatives == k.invalid_negatives);
}

TEST_CASE("attacker table rows") {
  CHECK(describe_attacker("confirm").scenario == "A");
  CHECK(describe_attacker("homer").scenario == "B");
  CHECK(describe_attacker("deconvolve-known").scenario == "C");
  CHECK(describe_attacker("full-unknown").scenario == "D");
  CHECK(describe_attacker("negated-confirm").goal.find("negated") != std::string::npos);
}

TEST_CASE("a corrupted panel fails only the panel criterion") {
  const auto dir = std::filesystem::temp_directory_path() / "dnapriv_bad_panel";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "panel.csv");
    f << "locus,allele,frequency\nTH01,6,0.5\nTH01,7,0.4\n";
  }
  AcceptanceOptions opt;
  opt.panel_path = dir / "panel.csv";
  opt.scale = 0.1;
  opt.only = {0, 3, 5};
  const auto bad = run_acceptance(opt);
  CHECK_FALSE(bad.passed);
  REQUIRE(bad.json["criteria"].size() == 3);
  CHECK_FALSE(bad.json["criteria"][0]["passed"].get<bool>());
  CHECK(bad.json["criteria"][0]["detail"].get<std::string>().find("TH01") != std::string::npos);
  CHECK(bad.json["criteria"][1]["passed"].get<bool>());
  CHECK(bad.json["criteria"][2]["passed"].get<bool>());
  CHECK(bad.json["stand_in_panel"] == true);
  CHECK(render_table(json::parse(bad.json.dump())) == render_table(bad.json));
  std::filesystem::remove_all(dir);
}
