#pragma once

// Microgrid battery model: state-of-charge dynamics, admissible controls and
// grid-exchange costs. Energies are kWh per 15-minute step.

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace emsx {

inline constexpr double kStepHours = 0.25;
inline constexpr int kStepsPerDay = 96;
inline constexpr int kStepsPerWeek = 672;
inline constexpr int kLookaheadSteps = 96;

struct BatteryParams {
  double capacity_kwh;
  double max_power_kw;
  double rho_c;
  double rho_d;

  /// Throws DomainError unless capacity, power > 0 and efficiencies in (0, 1].
  void validate() const;

  double max_charge() const { return max_power_kw * kStepHours; }
  double max_discharge() const { return -max_power_kw * kStepHours; }
};

/// Validated wrapper for x in [0, 1].
class StateOfCharge {
 public:
  explicit StateOfCharge(double x);
  double value() const { return x_; }

 private:
  double x_;
};

struct Uncertainty {
  double pv = 0.0;
  double demand = 0.0;

  double net_demand() const { return demand - pv; }
};

struct AdmissibleInterval {
  double lo;
  double hi;

  bool contains(double u, double tol = 0.0) const {
    return u >= lo - tol && u <= hi + tol;
  }
  double clamp(double u) const { return u < lo ? lo : (u > hi ? hi : u); }
};

/// Buy/sell prices per quarter-hour-of-week; slot 0 is Monday 00:00.
class Tariff {
 public:
  Tariff(std::vector<double> buy, std::vector<double> sell);

  /// Peak/off-peak schedule, identical every day. Hours are [start, end) in
  /// local time; off_peak_start > off_peak_end wraps midnight.
  static Tariff two_level(double peak_buy, double off_peak_buy, double sell,
                          int off_peak_start_hour, int off_peak_end_hour);

  /// Placeholder peak/off-peak schedule shipped as config/tariff_default.json.
  static Tariff default_schedule();

  /// Reads either {"slots": [[buy, sell], ...]} with 672 rows or a compact
  /// {"peak_buy", "off_peak_buy", "sell", "off_peak_start_hour",
  /// "off_peak_end_hour"} object.
  static Tariff load(const std::filesystem::path& path);

  double buy(int slot) const { return buy_[wrap(slot)]; }
  double sell(int slot) const { return sell_[wrap(slot)]; }

  Tariff scaled(double factor) const;

  std::span<const double> buy_prices() const { return buy_; }
  std::span<const double> sell_prices() const { return sell_; }

 private:
  static std::size_t wrap(int slot) {
    int s = slot % kStepsPerWeek;
    return static_cast<std::size_t>(s < 0 ? s + kStepsPerWeek : s);
  }

  std::vector<double> buy_;
  std::vector<double> sell_;
};

/// x + (rho_c / c) u+ - u- / (rho_d c). Total on the reals; callers keep u
/// admissible.
double dynamics(double x, double u, const BatteryParams& p);
inline StateOfCharge dynamics(StateOfCharge x, double u, const BatteryParams& p) {
  return StateOfCharge(dynamics(x.value(), u, p));
}

/// Closed-form intersection of the power box with 0 <= f(x, u) <= 1.
AdmissibleInterval admissible_interval(double x, const BatteryParams& p);

/// p+ e+ - p- e- with e = demand - pv + u, the energy bought from the grid.
double stage_cost(double u, double net_demand, double buy, double sell);
inline double stage_cost(double u, const Uncertainty& w_next, const Tariff& tariff,
                         int slot) {
  return stage_cost(u, w_next.net_demand(), tariff.buy(slot), tariff.sell(slot));
}

double total_cost(std::span<const double> stage_costs);

}  // namespace emsx
