#pragma once

// On-disk workspace used by the command-line tool:
//   DIR/sites/<site>.csv + <site>.json   canonical site records
//   DIR/split.json                       calibration/simulation weeks per site
//   DIR/artifacts/<site>/<kind>/         calibrated models and value functions
//   DIR/results/<controller>.csv         one row per simulated week
//   DIR/results/bounds.csv               dummy and anticipative weekly costs
//   DIR/report/                          scores.csv, scores.json, per_site.csv, timing.csv

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "emsx/chronicle.hpp"
#include "emsx/scoring.hpp"
#include "emsx/simulate.hpp"
#include "emsx/value_function.hpp"

namespace emsx {

namespace fs = std::filesystem;

struct Workspace {
  fs::path root;

  fs::path sites_dir() const { return root / "sites"; }
  fs::path split_path() const { return root / "split.json"; }
  fs::path artifact_dir(const std::string& site, const std::string& kind) const {
    return root / "artifacts" / site / kind;
  }
  fs::path results_dir() const { return root / "results"; }
  fs::path report_dir() const { return root / "report"; }
};

/// Site CSVs under DIR/sites, sorted by site id.
std::vector<fs::path> site_files(const Workspace& ws);
std::vector<SiteRecord> load_sites(const Workspace& ws);

struct SiteSplit {
  Split split;
  int dropped_partial_weeks = 0;
};
using SplitTable = std::map<std::string, SiteSplit>;

/// Per-site week split; each site shuffles with a seed derived from `seed`
/// and its id.
SplitTable make_split(const std::vector<SiteRecord>& sites, std::uint64_t seed);
void write_split(const SplitTable& table, std::uint64_t seed, const fs::path& path);
/// Throws ValidationError when the file is absent or malformed.
SplitTable read_split(const fs::path& path);

PartitionedSite partition(const SiteRecord& rec, const SplitTable& table);

enum class ControllerKind { dummy, mpc, olfc, sdp, sdpar };

struct ControllerSpec {
  ControllerKind kind = ControllerKind::dummy;
  int horizon = kLookaheadSteps;  // MPC, OLFC
  int scenarios = 50;             // OLFC
  int order = 1;                  // SDP-AR
  std::uint64_t seed = 0;         // OLFC sampling
  DpGrid grid;                    // SDP, SDP-AR online control grid

  /// dummy, mpc, mpc-h<H>, olfc-<n>, olfc-<n>-h<H>, sdp, sdp-ar<k>
  std::string name() const;
  /// Artifact sub-directory, empty for uncalibrated controllers.
  std::string artifact_kind() const;
};

ControllerKind parse_controller_kind(const std::string& text);

struct CalibrateOptions {
  ControllerKind kind = ControllerKind::sdp;
  int clusters = 10;
  int order = 1;
  std::uint64_t seed = 0;
  int min_samples_per_parameter = 10;
  DpGrid grid;
};

/// Fits and writes the artifacts of one controller for one site; returns
/// the offline wall time in seconds (also stored next to the artifacts).
double calibrate_site(const Workspace& ws, const SiteRecord& rec, const CalibrationSet& cal,
                      const CalibrateOptions& options, const Tariff& tariff);

/// Loads artifacts lazily per site; throws ArtifactMissing when absent and
/// ValidationError when they were computed for another battery or tariff.
ControllerFactory make_controller_factory(const Workspace& ws, const ControllerSpec& spec,
                                          std::map<std::string, BatteryParams> batteries,
                                          std::shared_ptr<const Tariff> tariff);

/// Provenance string of a (controller, site) cell: parameters and artifact
/// hashes.
std::string cell_provenance(const Workspace& ws, const ControllerSpec& spec,
                            const std::string& site);

/// One row per week; the dummy delta is taken from `bounds`.
void write_results(const std::vector<SimResult>& results, const std::vector<WeekBound>& bounds,
                   const fs::path& path);
std::vector<SimResult> read_results(const fs::path& path);
void write_bounds(const std::vector<WeekBound>& bounds, const fs::path& path);
std::vector<WeekBound> read_bounds(const fs::path& path);

/// Scores every results file in the workspace and writes DIR/report.
ScoreReport score_workspace(const Workspace& ws);

/// Reads or writes a whole file.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace emsx
