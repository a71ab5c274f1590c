#include "emsx/chronicle.hpp"

#include <algorithm>
#include <cmath>

#include "emsx/error.hpp"
#include "emsx/rng.hpp"

namespace emsx {

Chronicle::Chronicle(std::string site_id, std::string week_id,
                     std::shared_ptr<const SeriesStore> series, std::size_t monday_row,
                     SplitRole role)
    : site_id_(std::move(site_id)),
      week_id_(std::move(week_id)),
      series_(std::move(series)),
      monday_row_(monday_row),
      role_(role) {
  if (monday_row_ < static_cast<std::size_t>(kStepsPerDay) ||
      monday_row_ + kSteps > series_->rows())
    throw DomainError("chronicle " + week_id_ + " does not fit in its series");
}

Chronicle Chronicle::with_role(SplitRole role) const {
  Chronicle c = *this;
  c.role_ = role;
  return c;
}

StepInfo Chronicle::step(int t) const {
  if (t < 0 || t >= kSteps) throw DomainError("chronicle step out of range");
  std::size_t row = monday_row_ + static_cast<std::size_t>(t);
  std::span<const Uncertainty> history(series_->observed.data() + row - kStepsPerDay,
                                       kStepsPerDay);
  std::size_t width = static_cast<std::size_t>(series_->width);
  if (truncate_at_week_end_) width = std::min<std::size_t>(width, static_cast<std::size_t>(kSteps - t));
  std::span<const Uncertainty> forecast(series_->forecast_row(row), width);
  return StepInfo(t, history, forecast);
}

Chronicle Chronicle::with_perfect_forecasts(int window) const {
  if (window < 1) throw DomainError("forecast window must be >= 1");
  auto store = std::make_shared<SeriesStore>();
  store->width = window;
  // Keep the history day and the week; rows are re-based at the Sunday.
  const std::size_t first = monday_row_ - kStepsPerDay;
  store->observed.assign(series_->observed.begin() + static_cast<std::ptrdiff_t>(first),
                         series_->observed.begin() +
                             static_cast<std::ptrdiff_t>(monday_row_ + kSteps));
  store->forecast.assign(store->observed.size() * static_cast<std::size_t>(window),
                         Uncertainty{});
  for (std::size_t r = 0; r < store->observed.size(); ++r)
    for (int k = 0; k < window && r + static_cast<std::size_t>(k) < store->observed.size(); ++k)
      store->forecast[r * static_cast<std::size_t>(window) + static_cast<std::size_t>(k)] =
          store->observed[r + static_cast<std::size_t>(k)];
  Chronicle c(site_id_, week_id_, std::move(store), kStepsPerDay, role_);
  c.truncate_at_week_end_ = true;
  return c;
}

ChronicleSet build_chronicles(const SiteRecord& rec) {
  ChronicleSet out;
  const std::size_t rows = rec.series->rows();
  auto is_monday_midnight = [&](std::size_t r) {
    Minutes t = rec.timestamp(r);
    return weekday_of(t) == 0 && (t % 1440 + 1440) % 1440 == 0;
  };
  std::size_t first_monday = 0;
  while (first_monday < rows && !is_monday_midnight(first_monday)) ++first_monday;
  // Rows before the first Monday beyond the Sunday history: a truncated week.
  if (first_monday > static_cast<std::size_t>(kStepsPerDay)) ++out.dropped_partial_weeks;
  for (std::size_t row = first_monday; row < rows; row += kStepsPerWeek) {
    bool has_history = row >= static_cast<std::size_t>(kStepsPerDay);
    bool has_week = row + kStepsPerWeek <= rows;
    if (has_history && has_week) {
      std::string week_id = format_timestamp(rec.timestamp(row)).substr(0, 10);
      out.weeks.emplace_back(rec.site_id, week_id, rec.series, row);
    } else {
      ++out.dropped_partial_weeks;
    }
  }
  return out;
}

Split split_weeks(const std::vector<Chronicle>& chronicles, std::uint64_t seed) {
  if (chronicles.size() < 2) throw ValidationError("split needs at least 2 weeks");
  std::vector<std::string> ids;
  for (const auto& c : chronicles) ids.push_back(c.week_id());
  std::sort(ids.begin(), ids.end());
  RandomStream rng(seed);
  rng.shuffle(ids);
  std::size_t n_sim = static_cast<std::size_t>(std::ceil(0.4 * static_cast<double>(ids.size())));
  Split s;
  s.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i)
    (i < n_sim ? s.simulation : s.calibration).insert(ids[i]);
  return s;
}

CalibrationSet::CalibrationSet(std::vector<Chronicle> weeks) : weeks_(std::move(weeks)) {
  for (const auto& c : weeks_)
    if (c.role() != SplitRole::calibration)
      throw ValidationError("week " + c.week_id() + " is not a calibration week");
}

PartitionedSite apply_split(const std::vector<Chronicle>& chronicles, const Split& split) {
  std::vector<Chronicle> cal, sim;
  for (const auto& c : chronicles) {
    bool in_cal = split.calibration.count(c.week_id()) > 0;
    bool in_sim = split.simulation.count(c.week_id()) > 0;
    if (in_cal && in_sim) throw ValidationError("week " + c.week_id() + " in both sets");
    if (in_cal) cal.push_back(c.with_role(SplitRole::calibration));
    if (in_sim) sim.push_back(c.with_role(SplitRole::simulation));
  }
  return {CalibrationSet(std::move(cal)), std::move(sim)};
}

}  // namespace emsx
