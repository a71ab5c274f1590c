#pragma once

// Cost-to-go tables for the SDP and SDP-AR controllers.
//
// The state grid is SoC x (lag_1 x ... x lag_k); off-grid states are
// multilinearly interpolated, lags are clamped to the axis range. Slice
// t = steps is the terminal slice and is identically zero.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "emsx/calibration.hpp"
#include "emsx/model.hpp"

namespace emsx {

struct DpGrid {
  int soc_points = 10;
  int control_points = 20;
  int lag_points = 10;
};

/// Candidate controls at state x: `points` equally spaced values on the
/// power box intersected with the admissible interval, plus the interval
/// endpoints and zero. Ascending.
std::vector<double> control_candidates(double x, const BatteryParams& battery, int points);

/// Index of the minimum of `values`; near-ties (1e-12 relative) go to the
/// smallest |u|, then the smallest u.
std::size_t tie_broken_argmin(std::span<const double> controls, std::span<const double> values);

std::vector<double> linspace(double lo, double hi, int n);

class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(std::string kind, int steps, std::vector<double> soc_axis,
                std::vector<std::vector<double>> lag_axes);

  const std::string& kind() const { return kind_; }
  int steps() const { return steps_; }
  int order() const { return static_cast<int>(lag_axes_.size()); }
  const std::vector<double>& soc_axis() const { return soc_axis_; }
  const std::vector<std::vector<double>>& lag_axes() const { return lag_axes_; }
  std::size_t slice_size() const { return slice_size_; }

  /// Flat grid index -> (soc index, lag indices).
  std::size_t index(std::size_t soc_i, std::span<const std::size_t> lag_i) const;

  double& at(int t, std::size_t flat) {
    return values_[static_cast<std::size_t>(t) * slice_size_ + flat];
  }
  double at(int t, std::size_t flat) const {
    return values_[static_cast<std::size_t>(t) * slice_size_ + flat];
  }

  /// Interpolated V_t(x, lags); lags.size() == order().
  double operator()(int t, double x, std::span<const double> lags = {}) const;

  nlohmann::json& provenance() { return provenance_; }
  const nlohmann::json& provenance() const { return provenance_; }

  /// Binary file: "EMSXVF01", u64 header length, JSON header, float64
  /// little-endian values in [t][flat index] order.
  void save(const std::filesystem::path& path) const;
  static ValueFunction load(const std::filesystem::path& path);

  bool operator==(const ValueFunction& o) const {
    return kind_ == o.kind_ && steps_ == o.steps_ && soc_axis_ == o.soc_axis_ &&
           lag_axes_ == o.lag_axes_ && values_ == o.values_;
  }

 private:
  std::string kind_;
  int steps_ = 0;
  std::vector<double> soc_axis_;
  std::vector<std::vector<double>> lag_axes_;
  std::size_t slice_size_ = 0;
  std::vector<double> values_;
  nlohmann::json provenance_ = nlohmann::json::object();
};

struct DpOptions {
  DpGrid grid;
  int steps = kStepsPerWeek;  // horizon T; step t uses tariff slot t
};

/// Backward Bellman recursion over the SoC grid with the slot-wise noise
/// distributions.
ValueFunction compute_value_functions_sdp(const NoiseModel& noise, const BatteryParams& battery,
                                          const Tariff& tariff, const DpOptions& options = {});

/// Backward recursion on the SoC x lag grid; the lag axes span
/// [lag_min, lag_max] with grid.lag_points points.
ValueFunction compute_value_functions_sdpar(const ArModel& ar, const BatteryParams& battery,
                                            const Tariff& tariff, double lag_min, double lag_max,
                                            const DpOptions& options = {});

/// One-step lookahead with a value function: returns the candidate control
/// minimising expected stage cost plus V_{t+1}.
double sdp_control(int t, double x, const ValueFunction& v, const NoiseModel& noise,
                   const BatteryParams& battery, const Tariff& tariff, int control_points);
double sdpar_control(int t, double x, std::span<const double> lags, const ValueFunction& v,
                     const ArModel& ar, const BatteryParams& battery, const Tariff& tariff,
                     int control_points);

/// Hash identifying battery and tariff, stored in value-function provenance.
std::string economics_fingerprint(const BatteryParams& battery, const Tariff& tariff);

}  // namespace emsx
