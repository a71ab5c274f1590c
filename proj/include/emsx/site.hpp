#pragma once

// Site records: observations and rolling 96-step forecasts for one site.
//
// Canonical CSV layout, one row per quarter hour:
//   timestamp,pv_kwh,demand_kwh,pv_fc_01..pv_fc_96,demand_fc_01..demand_fc_96
// The row stamped tau holds the energy of the interval [tau, tau + 15 min).
// Forecast column k of that row is the prediction, issued at tau, of the
// interval starting at tau + (k - 1) * 15 min.
//
// A JSON sidecar <site>.json carries
//   {"site_id", "capacity_kwh", "max_power_kw", "rho_c", "rho_d"}.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "emsx/model.hpp"

namespace emsx {

/// Minutes since 1970-01-01T00:00 (naive local time).
using Minutes = std::int64_t;

Minutes parse_timestamp(const std::string& text);
std::string format_timestamp(Minutes t);
/// 0 = Monday ... 6 = Sunday.
int weekday_of(Minutes t);

struct SeriesStore {
  std::vector<Uncertainty> observed;  // one per row
  std::vector<Uncertainty> forecast;  // rows x width, row-major
  int width = kLookaheadSteps;

  std::size_t rows() const { return observed.size(); }
  const Uncertainty* forecast_row(std::size_t row) const {
    return forecast.data() + row * static_cast<std::size_t>(width);
  }
};

struct SiteRecord {
  std::string site_id;
  BatteryParams battery;
  Minutes start;  // timestamp of row 0
  std::shared_ptr<const SeriesStore> series;

  int theta() const { return static_cast<int>(series->rows()); }
  Minutes timestamp(std::size_t row) const {
    return start + 15 * static_cast<Minutes>(row);
  }
};

inline constexpr int kMinimumRows = kStepsPerWeek + kStepsPerDay;

/// Validates and wraps in-memory series. Throws IngestError on NaN,
/// negative observations or fewer than 768 rows.
SiteRecord make_site_record(std::string site_id, BatteryParams battery, Minutes start,
                            std::vector<Uncertainty> observed,
                            std::vector<Uncertainty> forecast);

enum class SiteSchema { canonical, upstream };

/// Reads <path> (CSV) and its sidecar <path without extension>.json.
SiteRecord ingest_site(const std::filesystem::path& csv_path,
                       SiteSchema schema = SiteSchema::canonical);

/// Writes the canonical CSV and sidecar. Doubles use the shortest
/// round-trip representation, so write(ingest(f)) == f for canonical files.
void write_site(const SiteRecord& rec, const std::filesystem::path& csv_path);

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

}  // namespace emsx
