#include "emsx/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include <json.hpp>

#include "emsx/controller.hpp"
#include "emsx/error.hpp"
#include "emsx/step_info.hpp"

namespace emsx {

void BatteryParams::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(capacity_kwh) || capacity_kwh <= 0.0)
    throw DomainError("battery capacity must be > 0");
  if (!finite(max_power_kw) || max_power_kw <= 0.0)
    throw DomainError("battery max power must be > 0");
  if (!finite(rho_c) || rho_c <= 0.0 || rho_c > 1.0)
    throw DomainError("charge efficiency must lie in (0, 1]");
  if (!finite(rho_d) || rho_d <= 0.0 || rho_d > 1.0)
    throw DomainError("discharge efficiency must lie in (0, 1]");
}

StateOfCharge::StateOfCharge(double x) : x_(x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("state of charge " + std::to_string(x) + " outside [0, 1]");
}

Tariff::Tariff(std::vector<double> buy, std::vector<double> sell)
    : buy_(std::move(buy)), sell_(std::move(sell)) {
  if (buy_.size() != kStepsPerWeek || sell_.size() != kStepsPerWeek)
    throw ValidationError("tariff needs exactly 672 buy and sell prices");
  for (std::size_t s = 0; s < buy_.size(); ++s) {
    if (!std::isfinite(buy_[s]) || !std::isfinite(sell_[s]) || sell_[s] < 0.0)
      throw ValidationError("tariff slot " + std::to_string(s) +
                            ": prices must be finite and >= 0");
    if (buy_[s] < sell_[s])
      throw ValidationError("tariff slot " + std::to_string(s) +
                            ": buy price below sell price");
  }
}

Tariff Tariff::two_level(double peak_buy, double off_peak_buy, double sell,
                         int off_peak_start_hour, int off_peak_end_hour) {
  std::vector<double> buy(kStepsPerWeek), sel(kStepsPerWeek, sell);
  for (int s = 0; s < kStepsPerWeek; ++s) {
    int hour = (s % kStepsPerDay) / 4;
    bool off_peak = off_peak_start_hour <= off_peak_end_hour
                        ? (hour >= off_peak_start_hour && hour < off_peak_end_hour)
                        : (hour >= off_peak_start_hour || hour < off_peak_end_hour);
    buy[static_cast<std::size_t>(s)] = off_peak ? off_peak_buy : peak_buy;
  }
  return Tariff(std::move(buy), std::move(sel));
}

Tariff Tariff::default_schedule() { return two_level(0.18, 0.13, 0.05, 22, 6); }

Tariff Tariff::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open tariff file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("tariff file " + path.string() + ": " + e.what());
  }
  try {
    if (j.contains("slots")) {
      std::vector<double> buy, sell;
      for (const auto& row : j.at("slots")) {
        buy.push_back(row.at(0).get<double>());
        sell.push_back(row.at(1).get<double>());
      }
      return Tariff(std::move(buy), std::move(sell));
    }
    return two_level(j.at("peak_buy").get<double>(), j.at("off_peak_buy").get<double>(),
                     j.at("sell").get<double>(), j.at("off_peak_start_hour").get<int>(),
                     j.at("off_peak_end_hour").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("tariff file " + path.string() + ": " + e.what());
  }
}

Tariff Tariff::scaled(double factor) const {
  std::vector<double> b(buy_), s(sell_);
  for (auto& v : b) v *= factor;
  for (auto& v : s) v *= factor;
  return Tariff(std::move(b), std::move(s));
}

double dynamics(double x, double u, const BatteryParams& p) {
  double up = std::max(0.0, u);
  double um = std::max(0.0, -u);
  return x + p.rho_c / p.capacity_kwh * up - um / (p.rho_d * p.capacity_kwh);
}

AdmissibleInterval admissible_interval(double x, const BatteryParams& p) {
  if (!(x >= 0.0 && x <= 1.0))
    throw DomainError("admissible_interval: state " + std::to_string(x) + " outside [0, 1]");
  double lo = std::max(p.max_discharge(), -x * p.capacity_kwh * p.rho_d);
  double hi = std::min(p.max_charge(), (1.0 - x) * p.capacity_kwh / p.rho_c);
  return {std::min(lo, 0.0), std::max(hi, 0.0)};
}

double stage_cost(double u, double net_demand, double buy, double sell) {
  double e = net_demand + u;
  return e >= 0.0 ? buy * e : sell * e;
}

double total_cost(std::span<const double> stage_costs) {
  return std::accumulate(stage_costs.begin(), stage_costs.end(), 0.0);
}

Calendar calendar_of_slot(int slot_of_week) {
  int s = slot_of_week % kStepsPerWeek;
  if (s < 0) s += kStepsPerWeek;
  int day = s / kStepsPerDay;
  return {s % kStepsPerDay, day >= 5 ? DayType::weekend : DayType::weekday};
}

StepInfo::StepInfo(int step_index, std::span<const Uncertainty> history,
                   std::span<const Uncertainty> forecast)
    : step_(step_index), history_(history), forecast_(forecast) {
  if (history_.empty()) throw DomainError("StepInfo needs at least one past observation");
}

}  // namespace emsx
