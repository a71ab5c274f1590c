#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emsx/site.hpp"

namespace emsx {

/// Parameters of a synthetic site. Energies are kWh per 15-minute step.
struct SynthSpec {
  std::string site_id = "site_01";
  int weeks = 2;
  double demand_base = 10.0;
  double demand_amplitude = 4.0;  // daily sinusoid half-swing, > 0
  double pv_amplitude = 8.0;      // clear-sky midday peak, >= 0
  double noise_scale = 1.0;       // stationary std of demand noise, >= 0
  double noise_ar = 0.0;          // AR(1) coefficient of demand noise, in [0, 1)
  double forecast_error_scale = 0.5;  // per-lead innovation std, >= 0
  double forecast_error_ar = 0.9;     // lead-to-lead AR(1) coefficient of errors
  BatteryParams battery{100.0, 50.0, 0.95, 0.95};
  /// Row 0 timestamp; defaults to Sunday 2019-01-06 00:00.
  Minutes start = 25778880;
};

/// Demand: base scaled by a weekly pattern plus a daily sinusoid and AR(1)
/// noise. PV: clipped daytime bell times a seasonal factor plus noise, zero
/// at night. Forecasts: future realisation plus an AR(1)-in-lead error whose
/// variance grows with lead time. One leading Sunday plus `weeks` weeks.
SiteRecord synth_site(const SynthSpec& spec, std::uint64_t seed);

/// Fleet of sites with per-site parameters drawn around `base`.
std::vector<SynthSpec> synth_fleet_specs(const SynthSpec& base, int sites, std::uint64_t seed);

}  // namespace emsx
