#include "emsx/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "emsx/calibration.hpp"
#include "emsx/controllers.hpp"
#include "emsx/error.hpp"
#include "emsx/rng.hpp"
#include "emsx/scenario_model.hpp"

namespace emsx {

namespace {

constexpr const char* kScenarioFile = "scenario_model.v1.json";
constexpr const char* kNoiseFile = "noise_model.v1.json";
constexpr const char* kArFile = "ar_model.v1.json";
constexpr const char* kValueFile = "value_function.bin";
constexpr const char* kTimingFile = "timing.json";

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& path) { return hex(fnv1a(read_text(path))); }

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw ValidationError(file.string() + ": bad number '" + s + "'");
  return v;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, const std::string& header) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw ValidationError(path.string() + ": unexpected header");
  std::vector<std::vector<std::string>> rows;
  const std::size_t width = split_csv_line(header).size();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != width) throw ValidationError(path.string() + ": malformed row");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

std::vector<fs::path> site_files(const Workspace& ws) {
  if (!fs::is_directory(ws.sites_dir()))
    throw ValidationError("no site directory " + ws.sites_dir().string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(ws.sites_dir()))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no sites in " + ws.sites_dir().string());
  return files;
}

std::vector<SiteRecord> load_sites(const Workspace& ws) {
  std::vector<SiteRecord> out;
  for (const auto& f : site_files(ws)) out.push_back(ingest_site(f));
  std::sort(out.begin(), out.end(),
            [](const SiteRecord& a, const SiteRecord& b) { return a.site_id < b.site_id; });
  return out;
}

SplitTable make_split(const std::vector<SiteRecord>& sites, std::uint64_t seed) {
  SplitTable table;
  for (const auto& rec : sites) {
    ChronicleSet set = build_chronicles(rec);
    SiteSplit s{split_weeks(set.weeks, derive_seed(seed, rec.site_id)), set.dropped_partial_weeks};
    s.split.seed = seed;
    table[rec.site_id] = std::move(s);
  }
  return table;
}

void write_split(const SplitTable& table, std::uint64_t seed, const fs::path& path) {
  nlohmann::ordered_json j;
  j["format"] = "emsx.split";
  j["version"] = 1;
  j["seed"] = seed;
  j["sites"] = nlohmann::ordered_json::object();
  for (const auto& [site, s] : table) {
    j["sites"][site]["calibration"] = s.split.calibration;
    j["sites"][site]["simulation"] = s.split.simulation;
    j["sites"][site]["dropped_partial_weeks"] = s.dropped_partial_weeks;
  }
  write_text(path, j.dump(2) + "\n");
}

SplitTable read_split(const fs::path& path) {
  if (!fs::exists(path))
    throw ValidationError("no calibration/simulation split at " + path.string() +
                          "; run `split` first");
  SplitTable table;
  try {
    auto j = nlohmann::json::parse(read_text(path));
    if (j.at("format") != "emsx.split" || j.at("version") != 1)
      throw ValidationError(path.string() + ": not a version 1 split file");
    std::uint64_t seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [site, v] : j.at("sites").items()) {
      SiteSplit s;
      s.split.seed = seed;
      s.split.calibration = v.at("calibration").get<std::set<std::string>>();
      s.split.simulation = v.at("simulation").get<std::set<std::string>>();
      s.dropped_partial_weeks = v.at("dropped_partial_weeks").get<int>();
      table[site] = std::move(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return table;
}

PartitionedSite partition(const SiteRecord& rec, const SplitTable& table) {
  auto it = table.find(rec.site_id);
  if (it == table.end()) throw ValidationError("site " + rec.site_id + " missing from the split");
  return apply_split(build_chronicles(rec).weeks, it->second.split);
}

ControllerKind parse_controller_kind(const std::string& text) {
  if (text == "dummy") return ControllerKind::dummy;
  if (text == "mpc") return ControllerKind::mpc;
  if (text == "olfc") return ControllerKind::olfc;
  if (text == "sdp") return ControllerKind::sdp;
  if (text == "sdp-ar" || text == "sdpar") return ControllerKind::sdpar;
  throw ValidationError("unknown controller '" + text + "'");
}

std::string ControllerSpec::name() const {
  std::string h = horizon == kLookaheadSteps ? "" : "-h" + std::to_string(horizon);
  switch (kind) {
    case ControllerKind::dummy: return "dummy";
    case ControllerKind::mpc: return "mpc" + h;
    case ControllerKind::olfc: return "olfc-" + std::to_string(scenarios) + h;
    case ControllerKind::sdp: return "sdp";
    case ControllerKind::sdpar: return "sdp-ar" + std::to_string(order);
  }
  return "";
}

std::string ControllerSpec::artifact_kind() const {
  switch (kind) {
    case ControllerKind::olfc: return "olfc";
    case ControllerKind::sdp: return "sdp";
    case ControllerKind::sdpar: return "sdp-ar" + std::to_string(order);
    default: return "";
  }
}

double calibrate_site(const Workspace& ws, const SiteRecord& rec, const CalibrationSet& cal,
                      const CalibrateOptions& options, const Tariff& tariff) {
  ControllerSpec spec;
  spec.kind = options.kind;
  spec.order = options.order;
  const std::string kind = spec.artifact_kind();
  if (kind.empty()) throw ValidationError(spec.name() + " needs no calibration");
  const fs::path dir = ws.artifact_dir(rec.site_id, kind);
  fs::create_directories(dir);
  const std::uint64_t seed = derive_seed(options.seed, rec.site_id);
  DpOptions dp;
  dp.grid = options.grid;

  auto t0 = std::chrono::steady_clock::now();
  if (options.kind == ControllerKind::olfc) {
    ScenarioFitOptions so;
    so.k = options.clusters;
    so.seed = seed;
    fit_scenario_model(cal, so).save(dir / kScenarioFile);
  } else if (options.kind == ControllerKind::sdp) {
    NoiseModel noise = fit_noise_model(cal, {options.clusters, seed});
    noise.save(dir / kNoiseFile);
    ValueFunction v = compute_value_functions_sdp(noise, rec.battery, tariff, dp);
    v.provenance()["model_hash"] = file_hash(dir / kNoiseFile);
    v.save(dir / kValueFile);
  } else {
    ArFitOptions ao;
    ao.order = options.order;
    ao.k = options.clusters;
    ao.seed = seed;
    ao.min_samples_per_parameter = options.min_samples_per_parameter;
    ArModel ar = fit_ar_model(cal, ao);
    ar.save(dir / kArFile);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& w : cal.weeks())
      for (int i = 1; i <= Chronicle::kSteps; ++i) {
        lo = std::min(lo, w.realized_net_demand(i));
        hi = std::max(hi, w.realized_net_demand(i));
      }
    ValueFunction v = compute_value_functions_sdpar(ar, rec.battery, tariff, lo, hi, dp);
    v.provenance()["model_hash"] = file_hash(dir / kArFile);
    v.save(dir / kValueFile);
  }
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_text(dir / kTimingFile, nlohmann::json{{"offline_seconds", seconds}}.dump() + "\n");
  return seconds;
}

namespace {

fs::path require(const fs::path& p) {
  if (!fs::exists(p)) throw ArtifactMissing("missing artifact " + p.string());
  return p;
}

std::shared_ptr<const ValueFunction> load_value_function(const fs::path& dir,
                                                         const BatteryParams& battery,
                                                         const Tariff& tariff) {
  auto v = std::make_shared<ValueFunction>(ValueFunction::load(require(dir / kValueFile)));
  if (v->provenance().value("economics", "") != economics_fingerprint(battery, tariff))
    throw ValidationError(dir.string() + ": value function was computed for another battery or tariff");
  return v;
}

}  // namespace

ControllerFactory make_controller_factory(const Workspace& ws, const ControllerSpec& spec,
                                          std::map<std::string, BatteryParams> batteries,
                                          std::shared_ptr<const Tariff> tariff) {
  return [ws, spec, batteries = std::move(batteries),
          tariff = std::move(tariff)](const std::string& site) -> ControllerPtr {
    auto b = batteries.find(site);
    if (b == batteries.end()) throw ValidationError("unknown site " + site);
    const BatteryParams& battery = b->second;
    const fs::path dir = ws.artifact_dir(site, spec.artifact_kind());
    switch (spec.kind) {
      case ControllerKind::dummy:
        return std::make_unique<DummyController>();
      case ControllerKind::mpc:
        return std::make_unique<MpcController>(battery, tariff, spec.horizon);
      case ControllerKind::olfc: {
        auto model = std::make_shared<ScenarioModel>(ScenarioModel::load(require(dir / kScenarioFile)));
        return std::make_unique<OlfcController>(battery, tariff, std::move(model), spec.scenarios,
                                                derive_seed(spec.seed, site), spec.horizon);
      }
      case ControllerKind::sdp: {
        auto noise = std::make_shared<NoiseModel>(NoiseModel::load(require(dir / kNoiseFile)));
        return std::make_unique<SdpController>(battery, tariff, std::move(noise),
                                               load_value_function(dir, battery, *tariff),
                                               spec.grid.control_points);
      }
      case ControllerKind::sdpar: {
        auto ar = std::make_shared<ArModel>(ArModel::load(require(dir / kArFile)));
        return std::make_unique<SdpArController>(battery, tariff, std::move(ar),
                                                 load_value_function(dir, battery, *tariff),
                                                 spec.grid.control_points);
      }
    }
    throw ValidationError("unknown controller kind");
  };
}

std::string cell_provenance(const Workspace& ws, const ControllerSpec& spec,
                            const std::string& site) {
  std::string out = spec.name();
  switch (spec.kind) {
    case ControllerKind::mpc: out += " horizon=" + std::to_string(spec.horizon); break;
    case ControllerKind::olfc:
      out += " horizon=" + std::to_string(spec.horizon) +
             " scenarios=" + std::to_string(spec.scenarios) + " seed=" + std::to_string(spec.seed);
      break;
    case ControllerKind::sdp:
    case ControllerKind::sdpar:
      out += " control_points=" + std::to_string(spec.grid.control_points);
      break;
    default: break;
  }
  const std::string kind = spec.artifact_kind();
  if (!kind.empty()) {
    const fs::path dir = ws.artifact_dir(site, kind);
    for (const char* f : {kScenarioFile, kNoiseFile, kArFile, kValueFile})
      if (fs::exists(dir / f)) out += std::string(" ") + f + "=" + file_hash(dir / f);
  }
  if (fs::exists(ws.split_path())) out += " split=" + file_hash(ws.split_path());
  return out;
}

namespace {
constexpr const char* kResultsHeader =
    "controller,site_id,week_id,management_cost,dummy_delta,mean_online_seconds,fault,provenance";
constexpr const char* kBoundsHeader = "site_id,week_id,dummy_cost,anticipative_cost";
}  // namespace

void write_results(const std::vector<SimResult>& results, const std::vector<WeekBound>& bounds,
                   const fs::path& path) {
  std::map<std::pair<std::string, std::string>, double> dummy;
  for (const auto& b : bounds) dummy[{b.site_id, b.week_id}] = b.dummy_cost;
  std::ostringstream os;
  os << kResultsHeader << '\n';
  for (const auto& r : results) {
    auto it = dummy.find({r.site_id, r.week_id});
    os << csv_quote(r.controller) << ',' << csv_quote(r.site_id) << ',' << csv_quote(r.week_id)
       << ',' << format_number(r.management_cost) << ','
       << (it == dummy.end() || r.faulted() ? "" : format_number(r.management_cost - it->second))
       << ',' << format_number(r.mean_online_seconds) << ',' << csv_quote(r.fault.value_or(""))
       << ',' << csv_quote(r.provenance) << '\n';
  }
  write_text(path, os.str());
}

std::vector<SimResult> read_results(const fs::path& path) {
  std::vector<SimResult> out;
  for (const auto& row : read_csv(path, kResultsHeader)) {
    SimResult r;
    r.controller = row[0];
    r.site_id = row[1];
    r.week_id = row[2];
    r.management_cost = parse_double(row[3], path);
    r.mean_online_seconds = parse_double(row[5], path);
    if (!row[6].empty()) r.fault = row[6];
    r.provenance = row[7];
    out.push_back(std::move(r));
  }
  return out;
}

void write_bounds(const std::vector<WeekBound>& bounds, const fs::path& path) {
  std::ostringstream os;
  os << kBoundsHeader << '\n';
  for (const auto& b : bounds)
    os << csv_quote(b.site_id) << ',' << csv_quote(b.week_id) << ',' << format_number(b.dummy_cost)
       << ',' << format_number(b.anticipative_cost) << '\n';
  write_text(path, os.str());
}

std::vector<WeekBound> read_bounds(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("no bounds at " + path.string() + "; run `simulate` first");
  std::vector<WeekBound> out;
  for (const auto& row : read_csv(path, kBoundsHeader))
    out.push_back({row[0], row[1], parse_double(row[2], path), parse_double(row[3], path)});
  return out;
}

ScoreReport score_workspace(const Workspace& ws) {
  std::vector<WeekBound> bounds = read_bounds(ws.results_dir() / "bounds.csv");
  std::vector<SimResult> results;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(ws.results_dir()))
    if (e.path().extension() == ".csv" && e.path().filename() != "bounds.csv")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("no simulation results in " + ws.results_dir().string());
  for (const auto& f : files) {
    auto r = read_results(f);
    results.insert(results.end(), r.begin(), r.end());
  }
  ScoreReport report = build_score_report(results, bounds);

  std::set<std::string> sites;
  for (const auto& b : bounds) sites.insert(b.site_id);
  for (const auto& f : site_files(ws)) {
    SiteRecord rec = ingest_site(f);
    if (sites.count(rec.site_id)) report.site_rmse[rec.site_id] = rmse(rec);
  }

  // Offline time: mean over sites of the artifact fitting time.
  for (auto& c : report.controllers) {
    std::string kind;
    if (c.controller.rfind("olfc", 0) == 0) kind = "olfc";
    else if (c.controller.rfind("sdp-ar", 0) == 0) kind = c.controller;
    else if (c.controller == "sdp") kind = "sdp";
    if (kind.empty()) continue;
    double sum = 0.0;
    int n = 0;
    for (const auto& site : sites) {
      fs::path t = ws.artifact_dir(site, kind) / kTimingFile;
      if (!fs::exists(t)) continue;
      sum += nlohmann::json::parse(read_text(t)).at("offline_seconds").get<double>();
      ++n;
    }
    if (n > 0) c.offline_seconds = sum / n;
  }

  std::uint64_t split_seed = 0;
  if (fs::exists(ws.split_path()))
    split_seed = nlohmann::json::parse(read_text(ws.split_path())).at("seed").get<std::uint64_t>();
  report.metadata["split_seed"] = split_seed;
  if (fs::exists(ws.split_path())) report.metadata["split_hash"] = file_hash(ws.split_path());
  report.metadata["bounds_hash"] = file_hash(ws.results_dir() / "bounds.csv");

  const fs::path out = ws.report_dir();
  write_text(out / "scores.csv", scores_csv(report));
  write_text(out / "per_site.csv", per_site_csv(report));
  write_text(out / "scores.json", report_json(report).dump(2) + "\n");
  write_text(out / "timing.csv", timing_csv(report));
  return report;
}

}  // namespace emsx
