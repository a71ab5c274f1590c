#pragma once

// Net-demand scenario generator for open-loop feedback control.
//
// Forecast errors are modelled only at a handful of lead times (day-part
// separators). Each separator has K clustered error values; a Markov chain
// links the clusters of consecutive separators. Scenario errors between
// separators are linearly interpolated and added to the point forecast.

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "emsx/chronicle.hpp"
#include "emsx/rng.hpp"
#include "emsx/step_info.hpp"

namespace emsx {

inline constexpr std::array<int, 6> kSeparators{1, 4, 8, 16, 48, 96};
inline constexpr std::size_t kSeparatorCount = kSeparators.size();

struct ScenarioModel {
  struct DayTypeModel {
    std::vector<std::vector<double>> centers;      // [separator][cluster]
    std::vector<std::vector<double>> transitions;  // [separator pair][from * k + to]
  };

  int k = 10;
  std::array<DayTypeModel, 2> day_types;    // weekday, weekend
  std::vector<std::vector<double>> initial;  // [calendar_key][cluster]

  const DayTypeModel& for_day(DayType d) const {
    return day_types[d == DayType::weekend ? 1 : 0];
  }

  /// Checks shapes, row-stochastic transitions and normalised initial
  /// distributions (1e-9). Throws ValidationError.
  void validate() const;

  nlohmann::json to_json() const;
  static ScenarioModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ScenarioModel load(const std::filesystem::path& path);
};

struct ScenarioFitOptions {
  int k = 10;
  std::uint64_t seed = 0;
  double transition_pseudo_count = 1.0;
};

ScenarioModel fit_scenario_model(const CalibrationSet& calibration,
                                 const ScenarioFitOptions& options = {});

struct Scenario {
  std::vector<double> net_demand;  // leads 1..forecast_size
  double probability;
};

/// Draws `n` scenarios (with replacement). Probabilities are the product of
/// the sampled initial and transition probabilities, renormalised over the
/// batch.
std::vector<Scenario> sample_scenarios(const ScenarioModel& model, const StepInfo& info, int n,
                                       RandomStream& rng);

/// Error at every lead 1..leads given errors at the separators: linear
/// interpolation between separators, flat beyond the last one.
std::vector<double> interpolate_separator_errors(const std::array<double, kSeparatorCount>& at_sep,
                                                 int leads);

}  // namespace emsx
