#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "emsx/site.hpp"
#include "emsx/step_info.hpp"

namespace emsx {

enum class SplitRole { unassigned, calibration, simulation };

/// One Monday 00:00 to Sunday 23:45 week of a site, plus the preceding
/// Sunday as observation history. Step t decides over the interval
/// [t, t+1); w_{t+1} is the observation of that interval.
class Chronicle {
 public:
  static constexpr int kSteps = kStepsPerWeek;

  /// `monday_row` is the series row stamped Monday 00:00. Rows
  /// monday_row - 96 .. monday_row + 671 must exist.
  Chronicle(std::string site_id, std::string week_id,
            std::shared_ptr<const SeriesStore> series, std::size_t monday_row,
            SplitRole role = SplitRole::unassigned);

  const std::string& site_id() const { return site_id_; }
  const std::string& week_id() const { return week_id_; }
  SplitRole role() const { return role_; }
  Chronicle with_role(SplitRole role) const;

  /// h_t for t in [0, 671].
  StepInfo step(int t) const;

  /// w_i for i in [-95, 672].
  const Uncertainty& realized(int i) const {
    return series_->observed[monday_row_ + static_cast<std::size_t>(i) - 1];
  }
  double realized_net_demand(int i) const { return realized(i).net_demand(); }

  /// Copy whose forecasts are the realized values up to `window` steps
  /// ahead, truncated at the end of the week (clairvoyant information).
  Chronicle with_perfect_forecasts(int window) const;

 private:
  std::string site_id_;
  std::string week_id_;
  std::shared_ptr<const SeriesStore> series_;
  std::size_t monday_row_;
  SplitRole role_;
  bool truncate_at_week_end_ = false;
};

struct ChronicleSet {
  std::vector<Chronicle> weeks;
  int dropped_partial_weeks = 0;
};

/// One chronicle per complete week that has a full preceding Sunday.
ChronicleSet build_chronicles(const SiteRecord& rec);

struct Split {
  std::set<std::string> calibration;
  std::set<std::string> simulation;
  std::uint64_t seed = 0;
};

/// Shuffles the weeks with `seed` and assigns ceil(0.4 n) to simulation.
Split split_weeks(const std::vector<Chronicle>& chronicles, std::uint64_t seed);

/// Calibration weeks only; construction rejects any other role.
class CalibrationSet {
 public:
  explicit CalibrationSet(std::vector<Chronicle> weeks);
  const std::vector<Chronicle>& weeks() const { return weeks_; }
  std::size_t size() const { return weeks_.size(); }

 private:
  std::vector<Chronicle> weeks_;
};

struct PartitionedSite {
  CalibrationSet calibration;
  std::vector<Chronicle> simulation;  // role == simulation
};

/// Tags chronicles with their role per `split`.
PartitionedSite apply_split(const std::vector<Chronicle>& chronicles, const Split& split);

}  // namespace emsx
