// dnapriv: run privacy games, protocol simulations and the acceptance suite.
//
// Exit codes: 0 success, 1 configuration error, 2 acceptance failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dnapriv/acceptance.hpp"
#include "dnapriv/config.hpp"
#include "dnapriv/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dnapriv;

namespace {

struct Globals {
  std::uint64_t seed = 42;
  bool seed_given = false;
  unsigned threads = 1;
  std::string out;
  std::string format = "table";
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

fs::path out_dir(const Globals& g) {
  fs::path dir(g.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

/// Writes <stem>.json and <stem>.txt (and .csv with --format csv).
void save_report(const Globals& g, const std::string& stem, const json& report) {
  if (g.out.empty()) return;
  const auto dir = out_dir(g);
  write_file(dir / (stem + ".json"), report.dump(2) + "\n");
  write_file(dir / (stem + ".txt"), render_table(report));
  if (g.format == "csv") write_file(dir / (stem + ".csv"), render_csv(report));
}

void print(const Globals& g, const json& report) {
  if (g.format == "json")
    std::cout << report.dump(2) << "\n";
  else if (g.format == "csv")
    std::cout << render_csv(report);
  else
    std::cout << render_table(report);
}

std::uint64_t seed_for(const Globals& g, const json& spec) {
  if (g.seed_given) return g.seed;
  if (spec.contains("seed")) {
    const auto& s = spec.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
      throw ConfigError("seed must be a non-negative integer");
    return s.get<std::uint64_t>();
  }
  return g.seed;
}

json read_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

int cmd_panel_generate(const Globals& g, std::size_t loci, std::size_t alleles, double concentration) {
  auto rng = Stream(g.seed).child("panel");
  FrequencyPanel panel = [&] {
    try {
      return random_panel(loci, alleles, rng, concentration);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  std::ostringstream os;
  write_panel(os, panel);
  if (g.out.empty()) {
    std::cout << os.str();
  } else {
    const auto path = out_dir(g) / "panel.csv";
    write_file(path, os.str());
    std::cerr << "wrote " << path.string() << "\n";
  }
  return 0;
}

int cmd_panel_validate(const std::string& file) {
  const fs::path path = file.empty() ? default_panel_path() : fs::path(file);
  try {
    const auto panel = load_panel(path);
    std::size_t alleles = 0;
    for (std::size_t i = 0; i < panel.size(); ++i) alleles += panel.locus(i).alleles.size();
    std::cout << "OK " << path.string() << ": " << panel.size() << " loci, " << alleles << " alleles\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "invalid panel " << path.string() << ": " << e.what() << "\n";
    return 1;
  }
}

int cmd_game(const Globals& g, const std::string& file, bool dump_trials) {
  const fs::path path(file);
  const json body = read_spec(path);
  const auto spec = parse_experiment(body);
  const auto seed = seed_for(g, body);
  const auto panel = resolve_panel(spec.panel, path.parent_path());
  const auto points = expand_sweep(spec);

  // Build every point first so a bad point fails before any work is done.
  std::vector<GameSettings> settings;
  for (const auto& p : points) settings.push_back(build_game(p.spec, panel, seed, g.threads));

  json reports = json::array();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto t = std::chrono::steady_clock::now();
    const auto result = run_game(settings[i].config);
    const auto report = game_report(spec.name, points[i], settings[i], result, seconds_since(t));
    save_report(g, spec.name + points[i].suffix, report);
    if (dump_trials) {
      if (g.out.empty()) throw ConfigError("--dump-trials needs --out DIR");
      write_file(out_dir(g) / (spec.name + points[i].suffix + "__trials.csv"), trials_csv(result));
    }
    if (points.size() == 1) print(g, report);
    reports.push_back(report);
  }
  if (points.size() > 1) {
    const auto summary = game_summary(spec.name, reports);
    save_report(g, spec.name + "__summary", summary);
    print(g, summary);
  }
  return 0;
}

int cmd_protocol(const Globals& g, const std::string& file) {
  const fs::path path(file);
  const json body = read_spec(path);
  const auto seed = seed_for(g, body);
  const auto spec = parse_protocol_spec(body, path.parent_path(), seed);
  const auto t = std::chrono::steady_clock::now();
  const auto tally = run_protocol(spec, seed, g.threads);
  const auto report = protocol_report(spec, tally, seed, seconds_since(t));
  save_report(g, spec.name, report);
  print(g, report);
  return 0;
}

int cmd_repro(const Globals& g, double scale, const std::string& panel, const std::vector<int>& only) {
  AcceptanceOptions opt;
  opt.seed = g.seed;
  opt.threads = g.threads;
  opt.scale = scale;
  opt.only = only;
  if (!panel.empty()) opt.panel_path = panel;
  const bool live = g.format == "table";
  opt.on_result = [&](const json& c, double seconds) {
    if (!live) return;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", c["passed"].get<bool>() ? "PASS" : "FAIL", c["id"].get<int>(),
                c["name"].get<std::string>().c_str(), c["detail"].get<std::string>().c_str(), seconds);
    std::fflush(stdout);
  };
  const auto report = run_acceptance(opt);
  if (!g.out.empty()) {
    const auto dir = out_dir(g);
    write_file(dir / "acceptance.json", report.json.dump(2) + "\n");
    write_file(dir / "acceptance.txt", render_table(report.json));
  }
  if (live)
    std::cout << (report.passed ? "all criteria passed" : "SOME CRITERIA FAILED") << "\n";
  else
    print(g, report.json);
  return report.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy games for DNA-leaking medical tests"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Root seed (default 42; overrides a spec's seed)");
  app.add_option("--threads", g.threads, "Worker threads; never changes results")->check(CLI::Range(1u, 1024u));
  app.add_option("--out", g.out, "Directory for report files");
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"json", "csv", "table"}));

  auto* panel = app.add_subcommand("panel", "Generate or validate allele-frequency panels");
  panel->require_subcommand(1);
  auto* gen = panel->add_subcommand("generate", "Write a random panel as CSV");
  std::size_t loci = 15, alleles = 8;
  double concentration = 1.0;
  gen->add_option("--loci", loci, "Number of loci")->check(CLI::PositiveNumber);
  gen->add_option("--alleles", alleles, "Alleles per locus")->check(CLI::Range(2, 1000));
  gen->add_option("--concentration", concentration, "Dirichlet concentration")->check(CLI::PositiveNumber);
  auto* val = panel->add_subcommand("validate", "Load a panel CSV and report problems");
  std::string panel_file;
  val->add_option("file", panel_file, "Panel CSV (default: shipped panel)");

  auto* game = app.add_subcommand("game", "Run the privacy game described by a JSON spec");
  std::string game_file;
  bool dump_trials = false;
  game->add_option("spec", game_file, "Experiment spec (JSON)")->required();
  game->add_flag("--dump-trials", dump_trials, "Also write one CSV row per trial");

  auto* proto = app.add_subcommand("protocol", "Simulate cut-and-choose with a kit model");
  std::string proto_file;
  proto->add_option("spec", proto_file, "Protocol spec (JSON)")->required();

  auto* repro = app.add_subcommand("repro", "Run the acceptance suite");
  double scale = 1.0;
  std::string repro_panel;
  std::vector<int> only;
  repro->add_option("--scale", scale, "Trial-count multiplier (1 = stated counts)")->check(CLI::Range(1e-4, 100.0));
  repro->add_option("--panel", repro_panel, "Panel CSV to test (default: shipped panel)");
  repro->add_option("--only", only, "Criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  g.seed_given = seed_opt->count() > 0;

  try {
    if (*gen) return cmd_panel_generate(g, loci, alleles, concentration);
    if (*val) return cmd_panel_validate(panel_file);
    if (*game) return cmd_game(g, game_file, dump_trials);
    if (*proto) return cmd_protocol(g, proto_file);
    if (*repro) return cmd_repro(g, scale, repro_panel, only);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
