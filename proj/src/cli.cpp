#include "emsx/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "emsx/error.hpp"
#include "emsx/pipeline.hpp"
#include "emsx/rng.hpp"
#include "emsx/synth.hpp"

namespace emsx {

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitFault = 2;

struct Settings {
  std::string workspace;
  bool error_json = false;
  std::string tariff_path;

  // synth
  int sites = 4;
  int weeks = 6;
  std::uint64_t seed = 0;
  SynthSpec synth;

  // ingest
  std::vector<std::string> inputs;
  std::string schema = "canonical";

  // calibrate / simulate
  std::vector<std::string> controllers;
  int clusters = 10;
  int order = 1;
  int min_samples_factor = 10;
  DpGrid grid;
  int horizon = kLookaheadSteps;
  int scenarios = 50;
  int parallelism = 1;

  // report
  std::string format = "csv";
  bool per_site = false;
};

const char* error_kind(const std::exception& e) {
  if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
  if (dynamic_cast<const IngestError*>(&e)) return "IngestError";
  if (dynamic_cast<const DegenerateClusterError*>(&e)) return "DegenerateClusterError";
  if (dynamic_cast<const ArtifactMissing*>(&e)) return "ArtifactMissing";
  if (dynamic_cast<const ControllerFault*>(&e)) return "ControllerFault";
  if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
  return "Error";
}

class SimulationFaults : public Error {
 public:
  using Error::Error;
};

std::shared_ptr<const Tariff> load_tariff(const Settings& s) {
  if (s.tariff_path.empty()) return std::make_shared<Tariff>(Tariff::default_schedule());
  return std::make_shared<Tariff>(Tariff::load(s.tariff_path));
}

void cmd_synth(const Workspace& ws, const Settings& s) {
  if (s.sites < 1 || s.weeks < 1) throw ValidationError("synth needs at least one site and week");
  SynthSpec base = s.synth;
  base.weeks = s.weeks;
  auto specs = synth_fleet_specs(base, s.sites, derive_seed(s.seed, std::string_view("fleet")));
  fs::create_directories(ws.sites_dir());
  for (const auto& e : fs::directory_iterator(ws.sites_dir()))
    if (e.path().extension() == ".csv" || e.path().extension() == ".json") fs::remove(e.path());
  for (const auto& spec : specs)
    write_site(synth_site(spec, derive_seed(s.seed, spec.site_id)),
               ws.sites_dir() / (spec.site_id + ".csv"));
  std::cout << "wrote " << specs.size() << " sites to " << ws.sites_dir().string() << "\n";
}

void cmd_ingest(const Workspace& ws, const Settings& s) {
  SiteSchema schema;
  if (s.schema == "canonical") schema = SiteSchema::canonical;
  else if (s.schema == "upstream") schema = SiteSchema::upstream;
  else throw ValidationError("unknown schema '" + s.schema + "'");
  fs::create_directories(ws.sites_dir());
  for (const auto& in : s.inputs) {
    SiteRecord rec = ingest_site(in, schema);
    write_site(rec, ws.sites_dir() / (rec.site_id + ".csv"));
    std::cout << rec.site_id << ": " << rec.theta() << " rows\n";
  }
}

void cmd_split(const Workspace& ws, const Settings& s) {
  auto sites = load_sites(ws);
  SplitTable table = make_split(sites, s.seed);
  write_split(table, s.seed, ws.split_path());
  for (const auto& [site, sp] : table)
    std::cout << site << ": " << sp.split.calibration.size() << " calibration, "
              << sp.split.simulation.size() << " simulation, " << sp.dropped_partial_weeks
              << " partial weeks dropped\n";
}

void cmd_calibrate(const Workspace& ws, const Settings& s) {
  if (s.controllers.empty()) throw ValidationError("calibrate needs --controller");
  SplitTable table = read_split(ws.split_path());
  auto tariff = load_tariff(s);
  auto sites = load_sites(ws);
  for (const auto& name : s.controllers) {
    CalibrateOptions o;
    o.kind = parse_controller_kind(name);
    o.clusters = s.clusters;
    o.order = s.order;
    o.seed = s.seed;
    o.min_samples_per_parameter = s.min_samples_factor;
    o.grid = s.grid;
    for (const auto& rec : sites) {
      PartitionedSite part = partition(rec, table);
      double secs = calibrate_site(ws, rec, part.calibration, o, *tariff);
      std::cout << rec.site_id << " " << name << ": " << secs << " s\n";
    }
  }
}

int cmd_simulate(const Workspace& ws, const Settings& s) {
  if (s.controllers.empty()) throw ValidationError("simulate needs --controller");
  if (s.parallelism < 1) throw ValidationError("--parallelism must be >= 1");
  SplitTable table = read_split(ws.split_path());
  auto tariff = load_tariff(s);
  auto records = load_sites(ws);

  BenchmarkPlan plan;
  plan.tariff = tariff;
  std::map<std::string, BatteryParams> batteries;
  for (const auto& rec : records) {
    PartitionedSite part = partition(rec, table);
    plan.sites.push_back({rec.site_id, rec.battery, std::move(part.simulation)});
    batteries[rec.site_id] = rec.battery;
  }
  std::vector<ControllerSpec> specs;
  for (const auto& name : s.controllers) {
    ControllerSpec spec;
    spec.kind = parse_controller_kind(name);
    spec.horizon = s.horizon;
    spec.scenarios = s.scenarios;
    spec.order = s.order;
    spec.seed = s.seed;
    spec.grid = s.grid;
    specs.push_back(spec);
    plan.controllers.push_back({spec.name(), make_controller_factory(ws, spec, batteries, tariff)});
  }

  auto bounds = compute_bounds(plan.sites, *tariff, s.parallelism);
  write_bounds(bounds, ws.results_dir() / "bounds.csv");
  BenchmarkOutput out = run_benchmark(plan, s.parallelism);

  int faults = 0;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const std::string name = specs[c].name();
    std::map<std::string, std::string> prov;
    std::vector<SimResult> rows;
    for (auto& r : out.results) {
      if (r.controller != name) continue;
      auto it = prov.find(r.site_id);
      if (it == prov.end()) it = prov.emplace(r.site_id, cell_provenance(ws, specs[c], r.site_id)).first;
      r.provenance = it->second;
      if (r.faulted()) {
        ++faults;
        log_warning(name + " faulted on " + r.site_id + " " + r.week_id + ": " + *r.fault);
      }
      rows.push_back(r);
    }
    write_results(rows, bounds, ws.results_dir() / (name + ".csv"));
    std::cout << name << ": " << rows.size() << " weeks\n";
  }
  for (const auto& e : out.errors)
    std::cerr << "error: " << e.controller << " on " << e.site_id << ": " << e.message << "\n";
  if (faults > 0) throw SimulationFaults(std::to_string(faults) + " simulated weeks faulted");
  if (!out.errors.empty())
    throw ArtifactMissing(std::to_string(out.errors.size()) + " (controller, site) cells could not run");
  return 0;
}

void cmd_score(const Workspace& ws) {
  ScoreReport report = score_workspace(ws);
  std::cout << scores_csv(report);
}

void cmd_report(const Workspace& ws, const Settings& s) {
  if (s.format != "csv" && s.format != "json") throw ValidationError("--format must be csv or json");
  if (!fs::exists(ws.report_dir() / "scores.json"))
    throw ValidationError("no scores in " + ws.report_dir().string() + "; run `score` first");
  if (s.format == "json") std::cout << read_text(ws.report_dir() / "scores.json");
  else std::cout << read_text(ws.report_dir() / (s.per_site ? "per_site.csv" : "scores.csv"));
}

void add_grid(CLI::App* cmd, Settings& s) {
  cmd->add_option("--soc-points", s.grid.soc_points, "SoC grid points")->check(CLI::Range(2, 1000));
  cmd->add_option("--control-points", s.grid.control_points, "control grid points")
      ->check(CLI::Range(2, 10000));
  cmd->add_option("--lag-points", s.grid.lag_points, "points per net-demand lag axis")
      ->check(CLI::Range(1, 1000));
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  Settings s;
  if (const char* env = std::getenv("EMSX_DATA_DIR")) s.workspace = env;
  if (s.workspace.empty()) s.workspace = ".";

  CLI::App app{"Benchmark harness for microgrid energy management controllers", "emsx"};
  app.set_config("--config", "", "TOML or INI file with option values; flags take precedence");
  app.add_option("-w,--workspace", s.workspace, "data directory (default: $EMSX_DATA_DIR or .)");
  app.add_flag("--error-json", s.error_json, "print errors as JSON on stdout");
  app.require_subcommand(1);

  auto* synth = app.add_subcommand("synth", "generate synthetic sites");
  synth->add_option("--sites", s.sites, "number of sites");
  synth->add_option("--weeks", s.weeks, "complete weeks per site");
  synth->add_option("--seed", s.seed, "random seed");
  synth->add_option("--demand-base", s.synth.demand_base);
  synth->add_option("--demand-amplitude", s.synth.demand_amplitude);
  synth->add_option("--pv-amplitude", s.synth.pv_amplitude);
  synth->add_option("--noise-scale", s.synth.noise_scale);
  synth->add_option("--noise-ar", s.synth.noise_ar);
  synth->add_option("--forecast-error-scale", s.synth.forecast_error_scale);
  synth->add_option("--forecast-error-ar", s.synth.forecast_error_ar);
  synth->add_option("--capacity", s.synth.battery.capacity_kwh, "battery capacity (kWh)");
  synth->add_option("--max-power", s.synth.battery.max_power_kw, "battery power (kW)");

  auto* ingest = app.add_subcommand("ingest", "validate site files and copy them into the workspace");
  ingest->add_option("inputs", s.inputs, "site CSV files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--schema", s.schema, "canonical or upstream");

  auto* split = app.add_subcommand("split", "assign weeks to calibration and simulation");
  split->add_option("--seed", s.seed, "random seed");

  auto* calibrate = app.add_subcommand("calibrate", "fit models and value functions");
  calibrate->add_option("--controller", s.controllers, "olfc, sdp or sdp-ar")->required();
  calibrate->add_option("--clusters", s.clusters, "support size of the discrete distributions")
      ->check(CLI::Range(1, 1000));
  calibrate->add_option("-k,--order", s.order, "AR order")->check(CLI::Range(1, 6));
  calibrate->add_option("--seed", s.seed, "k-means seed");
  calibrate->add_option("--min-samples-factor", s.min_samples_factor,
                        "minimum AR samples per slot, per parameter");
  calibrate->add_option("--tariff", s.tariff_path, "tariff JSON")->check(CLI::ExistingFile);
  add_grid(calibrate, s);

  auto* simulate = app.add_subcommand("simulate", "run controllers over the simulation weeks");
  simulate->add_option("--controller", s.controllers, "dummy, mpc, olfc, sdp or sdp-ar")->required();
  simulate->add_option("-H,--horizon", s.horizon, "lookahead steps")->check(CLI::Range(1, 672));
  simulate->add_option("-n,--scenarios", s.scenarios, "OLFC scenario count")->check(CLI::Range(1, 100000));
  simulate->add_option("-k,--order", s.order, "AR order")->check(CLI::Range(1, 6));
  simulate->add_option("--seed", s.seed, "scenario sampling seed");
  simulate->add_option("-j,--parallelism", s.parallelism, "worker threads");
  simulate->add_option("--tariff", s.tariff_path, "tariff JSON")->check(CLI::ExistingFile);
  add_grid(simulate, s);

  auto* score = app.add_subcommand("score", "compute gains and scores from the results");

  auto* report = app.add_subcommand("report", "print the score table");
  report->add_option("--format", s.format, "csv or json");
  report->add_flag("--per-site", s.per_site, "per-site rows (csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  Workspace ws{s.workspace};
  try {
    if (*synth) cmd_synth(ws, s);
    else if (*ingest) cmd_ingest(ws, s);
    else if (*split) cmd_split(ws, s);
    else if (*calibrate) cmd_calibrate(ws, s);
    else if (*simulate) return cmd_simulate(ws, s);
    else if (*score) cmd_score(ws);
    else if (*report) cmd_report(ws, s);
    return 0;
  } catch (const std::exception& e) {
    const bool fault = dynamic_cast<const SimulationFaults*>(&e) != nullptr;
    const int code = fault ? kExitFault : kExitValidation;
    if (s.error_json)
      std::cout << nlohmann::json{{"status", code},
                                  {"error", fault ? "SimulationFault" : error_kind(e)},
                                  {"message", e.what()}}
                       .dump()
                << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return code;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"emsx"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace emsx
