#include "dnapriv/report.hpp"

#include <cstdio>
#include <sstream>

#include "dnapriv/parallel.hpp"

namespace dnapriv {

using nlohmann::json;

AttackerInfo describe_attacker(std::string_view name) {
  std::string_view base = name;
  const bool negated = base.rfind("negated-", 0) == 0;
  if (negated) base.remove_prefix(8);
  AttackerInfo info{"-", "-", "-"};
  if (base == "confirm") info = {"A", "victim + mixture", "confirm presence"};
  else if (base == "homer") info = {"B", "victim", "membership"};
  else if (base == "deconvolve-known") info = {"C", "mixture", "isolate victim"};
  else if (base == "full-unknown") info = {"D", "nothing", "isolate a profile"};
  else if (base == "compare-residues") info = {"-", "procedure", "rerun and compare"};
  else if (base == "presence-only") info = {"-", "DNA0, DNA1", "allele presence"};
  else if (base == "coin") info = {"-", "none", "baseline"};
  if (negated) info.goal += " (negated)";
  return info;
}

json game_report(const std::string& name, const SweepPoint& point, const GameSettings& settings,
                 const GameResult& result, std::optional<double> wall_clock_seconds) {
  const auto& c = settings.config;
  const auto& e = result.estimate;
  const auto info = describe_attacker(c.attacker);
  json r;
  r["kind"] = "game_report";
  r["name"] = name + point.suffix;
  r["point"] = point.coordinates;
  r["seed"] = c.root_seed;
  r["config_hash"] = config_hash(point.spec);
  r["config"] = point.spec;
  r["attacker"] = c.attacker;
  r["scenario"] = info.scenario;
  r["knowledge"] = info.knowledge;
  r["goal"] = info.goal;
  r["procedure"] = std::string(kind_name(c.procedure.t0));
  r["tallies"] = {{"trials", e.trials}, {"correct", e.correct_guesses}, {"aborted", result.aborted}};
  r["p_hat"] = e.p_hat;
  r["adv_hat"] = e.adv_hat;
  r["ci"] = {{"low", e.ci_low}, {"high", e.ci_high}, {"confidence", e.confidence}};
  r["adv_ci"] = {{"low", e.adv_ci_low}, {"high", e.adv_ci_high}};
  r["verdict"] = {{"threshold", settings.threshold}, {"result", std::string(to_string(check_security(e, settings.threshold)))}};
  if (wall_clock_seconds) r["wall_clock_seconds"] = *wall_clock_seconds;
  return r;
}

json game_summary(const std::string& name, const json& reports) {
  json s;
  s["kind"] = "game_summary";
  s["name"] = name;
  s["reports"] = reports;
  // Trend only makes sense along a single axis.
  if (!reports.empty() && reports.front()["point"].size() == 1) {
    bool non_increasing = true;
    for (std::size_t i = 1; i < reports.size(); ++i)
      non_increasing = non_increasing && reports[i]["adv_hat"].get<double>() <= reports[i - 1]["adv_hat"].get<double>();
    s["trend"] = {{"axis", reports.front()["point"].begin().key()}, {"adv_non_increasing", non_increasing}};
  }
  return s;
}

ProtocolTally run_protocol(const ProtocolSpec& spec, std::uint64_t seed, unsigned threads) {
  struct Row {
    bool infected = false, aborted = false, verification = false, detected = false;
    bool control_negative = false, invalid = false;
  };
  std::vector<Row> rows(spec.trials);
  const Stream root(seed);
  const CutAndChooseOptions options{spec.protocol.verify_all_but_one, spec.protocol.control_target_mass};
  parallel_for(spec.trials, threads, [&](std::size_t t) {
    const Stream trial = root.child("trial", t);
    auto status = trial.child("status");
    auto patient_rng = trial.child("patient");
    Row& row = rows[t];
    row.infected = status.uniform() < spec.positive_fraction;
    Specimen s;
    s.contributions.push_back({sample_genotype(*spec.procedure.panel, patient_rng), spec.victim_mass});
    s.viral_rna_copies = row.infected ? spec.viral_copies : 0;
    auto run_rng = trial.child("protocol");
    const auto out = cut_and_choose(spec.protocol.n_samples, spec.protocol.kit, run_rng, spec.procedure, s, options);
    row.aborted = out.aborted;
    row.verification = out.aborted && out.abort_reason == AbortReason::VerificationFailed;
    row.detected = !out.aborted && out.result->outcome == Outcome::Positive;
    if (spec.protocol.control_target_mass > 0.0) {
      auto ctl_rng = trial.child("control");
      const auto ctl = process_control(spec.procedure, s, spec.protocol.control_target_mass, ctl_rng, spec.protocol.kit);
      row.control_negative = ctl.run.result.outcome == Outcome::Negative;
      row.invalid = ctl.invalid;
    }
  });
  ProtocolTally tally;
  tally.trials = spec.trials;
  for (const auto& r : rows) {
    tally.aborted += r.aborted;
    tally.aborted_verification += r.verification;
    tally.aborted_control += r.aborted && !r.verification;
    tally.infected += r.infected;
    tally.infected_completed += r.infected && !r.aborted;
    tally.detected += r.infected && r.detected;
    tally.control_negatives += r.control_negative;
    tally.invalid_negatives += r.invalid;
  }
  return tally;
}

namespace {

json rate(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return {{"count", k}, {"of", n}, {"rate", nullptr}, {"ci_low", nullptr}, {"ci_high", nullptr}};
  const auto ci = stats::wilson(k, n, 0.95);
  return {{"count", k}, {"of", n}, {"rate", static_cast<double>(k) / static_cast<double>(n)}, {"ci_low", ci.low},
          {"ci_high", ci.high}};
}

std::string fixed(const json& v, int digits = 4) {
  if (v.is_null()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v.get<double>());
  return buf;
}

std::string plain(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "-";
  return v.dump();
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << " | ";
      os << r[c];
      if (c + 1 < r.size()) os << std::string(width[c] - r[c].size(), ' ');
    }
    os << '\n';
  };
  line(header);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) os << "-+-";
    os << std::string(width[c], '-');
  }
  os << '\n';
  for (const auto& r : rows) line(r);
  return os.str();
}

std::string point_label(const json& point) {
  if (point.empty()) return "-";
  std::string s;
  for (const auto& [k, v] : point.items()) s += (s.empty() ? "" : ",") + k + "=" + plain(v);
  return s;
}

const std::vector<std::string> kGameHeader = {"scenario", "knowledge", "goal",  "attacker", "procedure", "point",
                                              "trials",   "aborted",   "p_hat", "adv_hat",  "adv CI",    "verdict"};

std::vector<std::string> game_row(const json& r) {
  return {r["scenario"].get<std::string>(),
          r["knowledge"].get<std::string>(),
          r["goal"].get<std::string>(),
          r["attacker"].get<std::string>(),
          r["procedure"].get<std::string>(),
          point_label(r["point"]),
          plain(r["tallies"]["trials"]),
          plain(r["tallies"]["aborted"]),
          fixed(r["p_hat"]),
          fixed(r["adv_hat"]),
          "[" + fixed(r["adv_ci"]["low"]) + ", " + fixed(r["adv_ci"]["high"]) + "]",
          r["verdict"]["result"].get<std::string>() + " @ " + plain(r["verdict"]["threshold"])};
}

std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + csv_field(fields[i]);
  return out + "\n";
}

}  // namespace

json protocol_report(const ProtocolSpec& spec, const ProtocolTally& t, std::uint64_t seed,
                     std::optional<double> wall_clock_seconds) {
  json r;
  r["kind"] = "protocol_report";
  r["name"] = spec.name;
  r["seed"] = seed;
  r["config_hash"] = config_hash(spec.body);
  r["config"] = spec.body;
  r["kit"] = std::string(to_string(spec.protocol.kit.behavior));
  r["n_samples"] = spec.protocol.n_samples;
  r["trials"] = t.trials;
  r["abort"] = rate(t.aborted, t.trials);
  r["abort_reasons"] = {{"verification_failed", t.aborted_verification}, {"control_failed", t.aborted_control}};
  r["detection"] = rate(t.detected, t.infected_completed);
  r["invalid_negative"] = rate(t.invalid_negatives, t.control_negatives);
  if (wall_clock_seconds) r["wall_clock_seconds"] = *wall_clock_seconds;
  return r;
}

std::string render_table(const json& report) {
  const auto kind = report.value("kind", std::string());
  std::ostringstream os;
  if (kind == "game_report") {
    os << "experiment " << report["name"].get<std::string>() << "  seed " << plain(report["seed"]) << "  config "
       << report["config_hash"].get<std::string>() << '\n';
    os << table(kGameHeader, {game_row(report)});
  } else if (kind == "game_summary") {
    os << "experiment " << report["name"].get<std::string>() << '\n';
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report["reports"]) rows.push_back(game_row(r));
    os << table(kGameHeader, rows);
    if (report.contains("trend"))
      os << "trend along " << report["trend"]["axis"].get<std::string>() << ": adv_hat "
         << (report["trend"]["adv_non_increasing"].get<bool>() ? "non-increasing" : "NOT non-increasing") << '\n';
  } else if (kind == "protocol_report") {
    os << "protocol " << report["name"].get<std::string>() << "  seed " << plain(report["seed"]) << "  config "
       << report["config_hash"].get<std::string>() << '\n';
    std::vector<std::vector<std::string>> rows;
    for (const char* key : {"abort", "detection", "invalid_negative"}) {
      const auto& x = report[key];
      rows.push_back({key, plain(x["count"]) + "/" + plain(x["of"]), fixed(x["rate"]),
                      "[" + fixed(x["ci_low"]) + ", " + fixed(x["ci_high"]) + "]"});
    }
    os << "kit " << report["kit"].get<std::string>() << ", n = " << plain(report["n_samples"]) << ", trials "
       << plain(report["trials"]) << '\n';
    os << table({"measure", "count", "rate", "95% CI"}, rows);
  } else if (kind == "acceptance") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& c : report["criteria"])
      rows.push_back({plain(c["id"]), c["name"].get<std::string>(), c["passed"].get<bool>() ? "PASS" : "FAIL",
                      c["detail"].get<std::string>()});
    os << "acceptance  seed " << plain(report["seed"]) << '\n';
    os << table({"#", "criterion", "result", "detail"}, rows);
    os << (report["passed"].get<bool>() ? "all criteria passed" : "SOME CRITERIA FAILED") << '\n';
  } else {
    throw std::invalid_argument("render_table: unknown report kind '" + kind + "'");
  }
  return os.str();
}

std::string render_csv(const json& report) {
  const auto kind = report.value("kind", std::string());
  std::string out;
  if (kind == "game_report" || kind == "game_summary") {
    out = csv_line({"name", "scenario", "attacker", "procedure", "point", "trials", "correct", "aborted", "p_hat",
                    "adv_hat", "ci_low", "ci_high", "adv_ci_low", "adv_ci_high", "verdict", "threshold", "seed",
                    "config_hash"});
    auto row = [&](const json& r) {
      out += csv_line({r["name"].get<std::string>(), r["scenario"].get<std::string>(), r["attacker"].get<std::string>(),
                       r["procedure"].get<std::string>(), point_label(r["point"]), plain(r["tallies"]["trials"]),
                       plain(r["tallies"]["correct"]), plain(r["tallies"]["aborted"]), plain(r["p_hat"]),
                       plain(r["adv_hat"]), plain(r["ci"]["low"]), plain(r["ci"]["high"]), plain(r["adv_ci"]["low"]),
                       plain(r["adv_ci"]["high"]), r["verdict"]["result"].get<std::string>(),
                       plain(r["verdict"]["threshold"]), plain(r["seed"]), r["config_hash"].get<std::string>()});
    };
    if (kind == "game_report")
      row(report);
    else
      for (const auto& r : report["reports"]) row(r);
  } else if (kind == "protocol_report") {
    out = csv_line({"name", "kit", "n_samples", "measure", "count", "of", "rate", "ci_low", "ci_high", "seed"});
    for (const char* key : {"abort", "detection", "invalid_negative"}) {
      const auto& x = report[key];
      out += csv_line({report["name"].get<std::string>(), report["kit"].get<std::string>(), plain(report["n_samples"]),
                       key, plain(x["count"]), plain(x["of"]), plain(x["rate"]), plain(x["ci_low"]),
                       plain(x["ci_high"]), plain(report["seed"])});
    }
  } else if (kind == "acceptance") {
    out = csv_line({"id", "criterion", "passed", "detail"});
    for (const auto& c : report["criteria"])
      out += csv_line({plain(c["id"]), c["name"].get<std::string>(), c["passed"].get<bool>() ? "true" : "false",
                       c["detail"].get<std::string>()});
  } else {
    throw std::invalid_argument("render_csv: unknown report kind '" + kind + "'");
  }
  return out;
}

std::string trials_csv(const GameResult& result) {
  std::string out = csv_line({"trial", "b", "guess", "correct", "aborted", "positive_peaks", "negative_peaks"});
  for (const auto& r : result.records)
    out += csv_line({std::to_string(r.index), std::to_string(r.b), r.aborted ? "" : std::to_string(r.guess),
                     r.aborted ? "" : (r.guess == r.b ? "1" : "0"), r.aborted ? "1" : "0",
                     std::to_string(r.positive_peaks), std::to_string(r.negative_peaks)});
  return out;
}

}  // namespace dnapriv
