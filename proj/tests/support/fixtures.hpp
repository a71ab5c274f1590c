#pragma once

#include <functional>
#include <random>
#include <vector>

#include "emsx/chronicle.hpp"
#include "emsx/site.hpp"

namespace emsx::testing {

inline constexpr Minutes kSunday = 25778880;  // 2019-01-06 00:00

/// Site whose row r observes obs(r); forecasts are the realized values
/// (zero beyond the last row) plus fc_error(r, lead).
inline SiteRecord make_site(
    int rows, const std::function<Uncertainty(int)>& obs,
    const std::function<double(int, int)>& fc_error = [](int, int) { return 0.0; },
    BatteryParams battery = {100, 40, 0.95, 0.95}, Minutes start = kSunday,
    std::string id = "site_x") {
  std::vector<Uncertainty> o(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) o[static_cast<std::size_t>(r)] = obs(r);
  std::vector<Uncertainty> f(static_cast<std::size_t>(rows) * kLookaheadSteps);
  for (int r = 0; r < rows; ++r)
    for (int k = 1; k <= kLookaheadSteps; ++k) {
      int target = r + k - 1;
      Uncertainty w = target < rows ? o[static_cast<std::size_t>(target)] : Uncertainty{};
      w.demand += fc_error(r, k);
      f[static_cast<std::size_t>(r) * kLookaheadSteps + static_cast<std::size_t>(k - 1)] = w;
    }
  return make_site_record(std::move(id), battery, start, std::move(o), std::move(f));
}

inline Tariff flat_tariff(double buy, double sell) {
  return Tariff(std::vector<double>(kStepsPerWeek, buy), std::vector<double>(kStepsPerWeek, sell));
}

/// Independent uniform prices per slot with buy >= sell >= 0.
inline Tariff random_tariff(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> buy(kStepsPerWeek), sell(kStepsPerWeek);
  for (int s = 0; s < kStepsPerWeek; ++s) {
    buy[static_cast<std::size_t>(s)] = 0.05 + 0.3 * U(gen);
    sell[static_cast<std::size_t>(s)] = buy[static_cast<std::size_t>(s)] * U(gen);
  }
  return Tariff(std::move(buy), std::move(sell));
}

/// Chronicles of `rec` tagged with `role`.
inline std::vector<Chronicle> weeks_of(const SiteRecord& rec, SplitRole role) {
  std::vector<Chronicle> out;
  for (const auto& c : build_chronicles(rec).weeks) out.push_back(c.with_role(role));
  return out;
}

}  // namespace emsx::testing
