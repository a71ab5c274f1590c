#pragma once

#include <cstddef>
#include <span>

#include "emsx/model.hpp"

namespace emsx {

enum class DayType { weekday, weekend };

struct Calendar {
  int quarter_hour_of_day;
  DayType day_type;
};

/// Calendar of a quarter-hour-of-week slot; slot 0 is Monday 00:00.
Calendar calendar_of_slot(int slot_of_week);

/// Index 0..191 combining quarter-hour-of-day and day type.
inline int calendar_key(const Calendar& c) {
  return c.quarter_hour_of_day + (c.day_type == DayType::weekend ? kStepsPerDay : 0);
}
inline constexpr int kCalendarKeys = 2 * kStepsPerDay;

/// Information available at decision step t: the last 96 observations
/// w_t, ..., w_{t-95} and the forecasts w^_{t,t+1}, ... issued at t.
/// Non-owning view into chronicle storage.
class StepInfo {
 public:
  /// `history` is chronological: history.back() is w_t.
  StepInfo(int step_index, std::span<const Uncertainty> history,
           std::span<const Uncertainty> forecast);

  int step_index() const { return step_; }
  Calendar calendar() const { return calendar_of_slot(step_); }

  /// w_{t-lag}, lag in [0, 95].
  const Uncertainty& past(int lag) const {
    return history_[history_.size() - 1 - static_cast<std::size_t>(lag)];
  }
  int past_size() const { return static_cast<int>(history_.size()); }

  /// w^_{t,t+lead}, lead in [1, forecast_size()].
  const Uncertainty& forecast(int lead) const {
    return forecast_[static_cast<std::size_t>(lead - 1)];
  }
  int forecast_size() const { return static_cast<int>(forecast_.size()); }

  double past_net_demand(int lag) const { return past(lag).net_demand(); }
  double forecast_net_demand(int lead) const { return forecast(lead).net_demand(); }

 private:
  int step_;
  std::span<const Uncertainty> history_;
  std::span<const Uncertainty> forecast_;
};

}  // namespace emsx
