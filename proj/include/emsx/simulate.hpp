#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "emsx/chronicle.hpp"
#include "emsx/controller.hpp"

namespace emsx {

struct SimResult {
  std::string site_id;
  std::string week_id;
  std::string controller;
  std::vector<double> soc;          // 673 values, x_0 .. x_672
  std::vector<double> controls;     // 672
  std::vector<double> stage_costs;  // 672
  double management_cost = 0.0;
  double mean_online_seconds = 0.0;
  std::optional<std::string> fault;
  std::string provenance;  // parameters and artifact hashes, set by the caller

  bool faulted() const { return fault.has_value(); }
};

/// Runs `controller` through a simulation week from an empty battery.
/// Contract violations and controller exceptions are recorded as a fault
/// and stop the run. Throws ValidationError for non-simulation chronicles.
SimResult simulate(Controller& controller, const Chronicle& chronicle,
                   const BatteryParams& battery, const Tariff& tariff);

/// Builds a fresh controller for one site; may throw ArtifactMissing.
using ControllerFactory = std::function<ControllerPtr(const std::string& site_id)>;

struct ControllerEntry {
  std::string name;
  ControllerFactory make;
};

struct SiteWeeks {
  std::string site_id;
  BatteryParams battery;
  std::vector<Chronicle> weeks;  // simulation role
};

struct BenchmarkPlan {
  std::vector<ControllerEntry> controllers;
  std::vector<SiteWeeks> sites;
  std::shared_ptr<const Tariff> tariff;
};

struct CellError {
  std::string controller;
  std::string site_id;
  std::string message;
};

struct BenchmarkOutput {
  std::vector<SimResult> results;  // sorted by (controller, site, week)
  std::vector<CellError> errors;   // sorted by (controller, site)
};

/// Runs every (controller, site, week) unit on `parallelism` worker threads.
/// A controller that cannot be built for a site yields one CellError and the
/// remaining units proceed. Output does not depend on `parallelism`.
BenchmarkOutput run_benchmark(const BenchmarkPlan& plan, int parallelism);

struct WeekBound {
  std::string site_id;
  std::string week_id;
  double dummy_cost;
  double anticipative_cost;
};

/// Dummy and anticipative costs of every week, sorted by (site, week).
std::vector<WeekBound> compute_bounds(const std::vector<SiteWeeks>& sites, const Tariff& tariff,
                                      int parallelism);

/// Runs fn(i) for i in [0, n) on a pool of `parallelism` threads.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn);

}  // namespace emsx
