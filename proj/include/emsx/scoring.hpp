#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsx/simulate.hpp"
#include "emsx/site.hpp"

namespace emsx {

/// Sites whose gain upper bound is below this are left out of aggregation.
inline constexpr double kMinimumGainBound = 1e-6;

/// Mean over weeks of C(dummy) - C(controller). Both maps are keyed by
/// week_id and must hold the same weeks.
double gain(const std::map<std::string, double>& controller_costs,
            const std::map<std::string, double>& dummy_costs);

/// gain / upper, or nothing when upper <= kMinimumGainBound.
std::optional<double> site_score(double gain, double upper);

/// Mean of the defined scores; throws ValidationError when none is defined.
double aggregate_score(const std::vector<std::optional<double>>& site_scores);

/// Forecast RMSE on net demand min-max normalised with the site's observed
/// range, averaged over all (issue row, lead) pairs inside the record.
double rmse(const SiteRecord& rec);

struct SiteScore {
  std::string controller;
  std::string site_id;
  int weeks = 0;
  double gain = 0.0;
  double gain_bound = 0.0;
  std::optional<double> score;  // empty when excluded
  std::string note;             // reason for exclusion
  std::string provenance;
};

struct ControllerScore {
  std::string controller;
  std::optional<double> score;
  int sites_scored = 0;
  double offline_seconds = 0.0;
  double mean_online_seconds = 0.0;
};

struct ScoreReport {
  std::vector<ControllerScore> controllers;
  std::vector<SiteScore> sites;
  std::map<std::string, double> site_rmse;
  nlohmann::json metadata = nlohmann::json::object();
};

/// Controller name used for the anticipative oracle rows.
inline constexpr const char* kAnticipativeName = "anticipative";

/// Scores every controller found in `results` found in `results`. Weeks missing from a
/// (site, controller) cell or faulted weeks invalidate that cell.
ScoreReport build_score_report(const std::vector<SimResult>& results,
                               const std::vector<WeekBound>& bounds);

/// Shortest round-trip decimal form.
std::string format_number(double v);

/// controller,score,sites_scored
std::string scores_csv(const ScoreReport& report);
/// controller,site_id,weeks,gain,gain_bound,score,rmse,note,provenance
std::string per_site_csv(const ScoreReport& report);
/// controller,offline_seconds,mean_online_seconds
std::string timing_csv(const ScoreReport& report);
/// Scores, per-site rows and metadata; no timings.
nlohmann::ordered_json report_json(const ScoreReport& report);

}  // namespace emsx
