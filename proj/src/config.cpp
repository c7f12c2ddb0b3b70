#include "dnapriv/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace dnapriv {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

double num(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where + "." + key + ": not finite");
  return d;
}

std::uint64_t count(const json& j, const char* key, std::uint64_t fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const double d = num(j, key, 0.0, where);
  if (d < 0.0 || d != std::floor(d) || d > 9.0e15) throw ConfigError(where + "." + key + ": expected a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

bool flag(const json& j, const char* key, bool fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(where + "." + key + ": expected true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const char* key, const std::string& fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return j.at(key).get<std::string>();
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string format_value(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<GenotypeProfile> draw_profiles(const FrequencyPanel& panel, std::size_t n, std::uint64_t seed,
                                           std::string_view label) {
  auto rng = Stream(seed).child(label);
  std::vector<GenotypeProfile> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_genotype(panel, rng));
  return out;
}

}  // namespace

std::string SweepAxis::label() const {
  const auto pos = path.find_last_of('/');
  return pos == std::string::npos ? path : path.substr(pos + 1);
}

bool filesystem_safe(std::string_view name) {
  if (name.empty() || name == "." || name == "..") return false;
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return true;
}

ExperimentSpec parse_experiment(const json& j) {
  check_keys(j, {"name", "panel", "procedure", "attacker", "game", "protocol", "sweep", "seed"}, "experiment");
  ExperimentSpec spec;
  spec.name = text(j, "name", "", "experiment");
  if (!filesystem_safe(spec.name)) throw ConfigError("experiment.name must be nonempty and use only [A-Za-z0-9._-]");
  spec.panel = text(j, "panel", "default", "experiment");
  spec.body = j;
  if (j.contains("sweep")) {
    const auto& axes = j.at("sweep");
    if (!axes.is_array()) throw ConfigError("experiment.sweep: expected an array");
    if (axes.size() > 2) throw ConfigError("experiment.sweep: at most two axes");
    for (const auto& a : axes) {
      check_keys(a, {"path", "values"}, "sweep axis");
      SweepAxis axis;
      axis.path = text(a, "path", "", "sweep axis");
      json::json_pointer ptr;
      try {
        ptr = json::json_pointer(axis.path);
      } catch (const json::exception&) {
        throw ConfigError("sweep axis: bad path '" + axis.path + "'");
      }
      if (axis.path.rfind("/sweep", 0) == 0 || !j.contains(ptr) || !j.at(ptr).is_number())
        throw ConfigError("sweep axis: '" + axis.path + "' does not name an existing numeric parameter");
      if (!a.contains("values") || !a.at("values").is_array() || a.at("values").empty())
        throw ConfigError("sweep axis: values must be a nonempty array");
      for (const auto& v : a.at("values")) {
        if (!v.is_number()) throw ConfigError("sweep axis: values must be numbers");
        axis.values.push_back(v.get<double>());
      }
      spec.sweep.push_back(std::move(axis));
    }
    if (spec.sweep.size() == 2 && spec.sweep[0].path == spec.sweep[1].path)
      throw ConfigError("sweep: the two axes name the same parameter");
  }
  return spec;
}

ExperimentSpec load_experiment(const std::filesystem::path& path) { return parse_experiment(read_json(path)); }

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points{{"", json::object(), spec.body}};
  for (const auto& axis : spec.sweep) {
    std::vector<SweepPoint> next;
    const json::json_pointer ptr(axis.path);
    for (const auto& p : points)
      for (double v : axis.values) {
        SweepPoint q = p;
        q.spec.erase("sweep");
        const bool integral = spec.body.at(ptr).is_number_integer() || spec.body.at(ptr).is_number_unsigned();
        if (integral && v == std::floor(v))
          q.spec[ptr] = static_cast<std::int64_t>(v);
        else
          q.spec[ptr] = v;
        q.coordinates[axis.label()] = q.spec[ptr];
        q.suffix += "__" + axis.label() + "-" + format_value(v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

std::filesystem::path default_panel_path() { return std::filesystem::path(DNAPRIV_DATA_DIR) / "default_panel.csv"; }

std::shared_ptr<const FrequencyPanel> resolve_panel(const std::string& source, const std::filesystem::path& base_dir) {
  std::filesystem::path path = source == "default" ? default_panel_path() : std::filesystem::path(source);
  if (path.is_relative() && !base_dir.empty() && source != "default") path = base_dir / path;
  try {
    return std::make_shared<const FrequencyPanel>(load_panel(path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("panel: ") + e.what());
  }
}

json procedure_defaults() {
  const AssayParams a;
  const EpgParams e;
  return {{"t0", {{"kind", "identity"}}},
          {"assay",
           {{"max_cycles", a.max_cycles},
            {"detection_copies", a.detection_copies},
            {"amplification_efficiency", a.amplification_efficiency},
            {"limit_of_detection", a.limit_of_detection}}},
          {"epg",
           {{"mean_peak_height", e.mean_peak_height},
            {"peak_height_cv", e.peak_height_cv},
            {"stutter_ratio", e.stutter_ratio},
            {"dropin_rate", e.dropin_rate},
            {"analytical_threshold", e.analytical_threshold},
            {"dropin_mean_factor", e.dropin_mean_factor}}}};
}

TestProcedure build_procedure(const json& j, std::shared_ptr<const FrequencyPanel> panel, std::uint64_t seed) {
  const json empty = json::object();
  const json& pj = j.is_null() ? empty : j;
  check_keys(pj, {"t0", "assay", "epg"}, "procedure");
  TestProcedure p;
  p.panel = std::move(panel);

  const json& t = pj.contains("t0") ? pj.at("t0") : json({{"kind", "identity"}});
  const auto kind = text(t, "kind", "", "procedure.t0");
  const std::string where = "procedure.t0";
  if (kind == "identity") {
    check_keys(t, {"kind"}, where);
  } else if (kind == "dilution") {
    check_keys(t, {"kind", "k", "per_profile_mass"}, where);
    t0::Dilution d;
    d.per_profile_mass = num(t, "per_profile_mass", 1.0, where);
    d.panel_profiles = draw_profiles(*p.panel, count(t, "k", 5, where), seed, "dilution-profiles");
    // k = 0 adds nothing; it is the undiluted baseline of a k sweep.
    if (d.panel_profiles.empty())
      p.t0 = t0::Identity{};
    else
      p.t0 = std::move(d);
  } else if (kind == "randomizing") {
    check_keys(t, {"kind", "pool_size", "count_min", "count_max", "mass_low", "mass_high"}, where);
    t0::Randomizing r;
    const auto lo = count(t, "count_min", 2, where), hi = count(t, "count_max", 6, where);
    if (lo > hi || hi > 100000) throw ConfigError(where + ": need count_min <= count_max");
    r.counts = CountDistribution::uniform(static_cast<int>(lo), static_cast<int>(hi));
    r.masses = {num(t, "mass_low", 1.0, where), num(t, "mass_high", 1.0, where)};
    r.pool = draw_profiles(*p.panel, count(t, "pool_size", 100, where), seed, "randomizing-pool");
    p.t0 = std::move(r);
  } else if (kind == "ladder") {
    check_keys(t, {"kind", "mass_per_allele"}, where);
    p.t0 = t0::AllelicLadder{num(t, "mass_per_allele", 1.0, where)};
  } else if (kind == "dnase") {
    check_keys(t, {"kind", "efficiency", "color_threshold"}, where);
    p.t0 = t0::Destruction{num(t, "efficiency", 1.0, where), num(t, "color_threshold", 0.0, where)};
  } else {
    throw ConfigError(where + ".kind: unknown kind '" + kind + "' (identity, dilution, randomizing, ladder, dnase)");
  }

  if (pj.contains("assay")) {
    const auto& a = pj.at("assay");
    check_keys(a, {"max_cycles", "detection_copies", "amplification_efficiency", "limit_of_detection"}, "procedure.assay");
    p.assay.max_cycles = static_cast<int>(count(a, "max_cycles", static_cast<std::uint64_t>(p.assay.max_cycles), "procedure.assay"));
    p.assay.detection_copies = num(a, "detection_copies", p.assay.detection_copies, "procedure.assay");
    p.assay.amplification_efficiency = num(a, "amplification_efficiency", p.assay.amplification_efficiency, "procedure.assay");
    p.assay.limit_of_detection = count(a, "limit_of_detection", p.assay.limit_of_detection, "procedure.assay");
  }
  if (pj.contains("epg")) {
    const auto& e = pj.at("epg");
    const std::string w = "procedure.epg";
    check_keys(e, {"mean_peak_height", "peak_height_cv", "stutter_ratio", "dropin_rate", "analytical_threshold", "dropin_mean_factor"}, w);
    p.epg.mean_peak_height = num(e, "mean_peak_height", p.epg.mean_peak_height, w);
    p.epg.peak_height_cv = num(e, "peak_height_cv", p.epg.peak_height_cv, w);
    p.epg.stutter_ratio = num(e, "stutter_ratio", p.epg.stutter_ratio, w);
    p.epg.dropin_rate = num(e, "dropin_rate", p.epg.dropin_rate, w);
    p.epg.analytical_threshold = num(e, "analytical_threshold", p.epg.analytical_threshold, w);
    p.epg.dropin_mean_factor = num(e, "dropin_mean_factor", p.epg.dropin_mean_factor, w);
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("procedure: ") + e.what());
  }
  return p;
}

AttackerOptions build_attacker_options(const json& j) {
  const std::string w = "attacker";
  check_keys(j, {"name", "mc_samples", "noc_max", "noc_samples", "assumed_stutter_ratio", "self_runs", "homer_calibration"}, w);
  AttackerOptions o;
  o.mc_samples = count(j, "mc_samples", o.mc_samples, w);
  o.noc.max_contributors = count(j, "noc_max", o.noc.max_contributors, w);
  o.noc.samples = count(j, "noc_samples", o.noc.samples, w);
  if (j.contains("assumed_stutter_ratio")) o.assumed_stutter_ratio = num(j, "assumed_stutter_ratio", 0.0, w);
  o.self_runs = count(j, "self_runs", o.self_runs, w);
  o.homer_calibration = count(j, "homer_calibration", o.homer_calibration, w);
  return o;
}

ProtocolConfig build_protocol(const json& j) {
  const std::string w = "protocol";
  check_keys(j, {"kit", "destroys_control", "n_samples", "verify_all_but_one", "control_target_mass"}, w);
  ProtocolConfig p;
  const auto kit = text(j, "kit", "honest", w);
  const auto behavior = kit_behavior_from_string(kit);
  if (!behavior)
    throw ConfigError(w + ".kit: unknown kit behavior '" + kit + "' (honest, kills_virus_too, fake_color_no_dnase)");
  p.kit.behavior = *behavior;
  p.kit.destroys_control = flag(j, "destroys_control", false, w);
  p.n_samples = count(j, "n_samples", 2, w);
  if (p.n_samples < 2) throw ConfigError(w + ".n_samples must be >= 2");
  p.verify_all_but_one = flag(j, "verify_all_but_one", false, w);
  p.control_target_mass = num(j, "control_target_mass", 0.0, w);
  if (p.control_target_mass < 0.0) throw ConfigError(w + ".control_target_mass must be >= 0");
  return p;
}

GameSettings build_game(const json& spec, std::shared_ptr<const FrequencyPanel> panel, std::uint64_t seed,
                        unsigned threads) {
  GameSettings s;
  auto& c = s.config;
  c.procedure = build_procedure(spec.value("procedure", json::object()), panel, seed);

  const json attacker = spec.value("attacker", json{{"name", "confirm"}});
  c.attacker = text(attacker, "name", "confirm", "attacker");
  c.attacker_options = build_attacker_options(attacker);

  const json g = spec.value("game", json::object());
  const std::string w = "game";
  check_keys(g, {"trials", "profile_choice", "profile_search", "viral_copies_when_positive", "victim_mass",
                 "single_branch", "threshold", "confidence"},
             w);
  c.trials = count(g, "trials", 1000, w);
  const auto choice = text(g, "profile_choice", "adversarial_max_distance", w);
  if (choice == "adversarial_max_distance")
    c.profile_choice = ProfileChoice::AdversarialMaxDistance;
  else if (choice == "random_pair")
    c.profile_choice = ProfileChoice::RandomPair;
  else
    throw ConfigError(w + ".profile_choice: expected adversarial_max_distance or random_pair");
  c.profile_search = count(g, "profile_search", 1000, w);
  c.viral_copies_when_positive = count(g, "viral_copies_when_positive", 1000, w);
  c.victim_mass = num(g, "victim_mass", 1.0, w);
  c.single_branch = flag(g, "single_branch", false, w);
  c.confidence = num(g, "confidence", 0.95, w);
  s.threshold = num(g, "threshold", 1e-3, w);
  if (!(s.threshold > 0.0)) throw ConfigError(w + ".threshold must be > 0");
  if (spec.contains("protocol")) c.protocol = build_protocol(spec.at("protocol"));
  c.root_seed = seed;
  c.threads = threads;

  try {
    c.validate();
    auto probe = c.attacker_options;
    make_attacker(c.attacker, c.procedure, probe);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("game: ") + e.what());
  }
  return s;
}

ProtocolSpec parse_protocol_spec(const json& j, const std::filesystem::path& base_dir, std::uint64_t seed) {
  check_keys(j, {"name", "panel", "procedure", "protocol", "trials", "positive_fraction", "viral_copies", "victim_mass", "seed"},
             "protocol spec");
  ProtocolSpec s;
  s.body = j;
  s.name = text(j, "name", "", "protocol spec");
  if (!filesystem_safe(s.name)) throw ConfigError("protocol spec.name must be nonempty and use only [A-Za-z0-9._-]");
  s.panel = text(j, "panel", "default", "protocol spec");
  auto panel = resolve_panel(s.panel, base_dir);
  json proc = j.value("procedure", json{{"t0", {{"kind", "dnase"}, {"efficiency", 1.0}}}});
  s.procedure = build_procedure(proc, panel, seed);
  if (!std::holds_alternative<t0::Destruction>(s.procedure.t0))
    throw ConfigError("protocol spec: procedure.t0.kind must be dnase for cut-and-choose");
  s.protocol = build_protocol(j.value("protocol", json::object()));
  s.trials = count(j, "trials", 1000, "protocol spec");
  if (s.trials < 1) throw ConfigError("protocol spec.trials must be >= 1");
  s.positive_fraction = num(j, "positive_fraction", 0.5, "protocol spec");
  if (s.positive_fraction < 0.0 || s.positive_fraction > 1.0)
    throw ConfigError("protocol spec.positive_fraction must be in [0, 1]");
  s.viral_copies = count(j, "viral_copies", 1000, "protocol spec");
  s.victim_mass = num(j, "victim_mass", 1.0, "protocol spec");
  if (!(s.victim_mass > 0.0)) throw ConfigError("protocol spec.victim_mass must be > 0");
  return s;
}

std::string config_hash(const json& j) {
  const auto h = fnv1a(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dnapriv
