#include "emsx/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "emsx/error.hpp"
#include "emsx/rng.hpp"

namespace emsx {

namespace {

double daylight_bell(double hour) {
  // Zero outside 06:00-20:00, sine-squared bump in between.
  if (hour <= 6.0 || hour >= 20.0) return 0.0;
  double s = std::sin(std::numbers::pi * (hour - 6.0) / 14.0);
  return s * s;
}

}  // namespace

SiteRecord synth_site(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.weeks < 1) throw ValidationError("synth: weeks must be >= 1");
  if (!(spec.demand_amplitude > 0.0)) throw ValidationError("synth: demand amplitude must be > 0");
  if (spec.pv_amplitude < 0.0) throw ValidationError("synth: pv amplitude must be >= 0");
  if (spec.demand_base < 0.0) throw ValidationError("synth: demand base must be >= 0");
  if (spec.noise_scale < 0.0 || spec.forecast_error_scale < 0.0)
    throw ValidationError("synth: noise scales must be >= 0");
  if (spec.noise_ar < 0.0 || spec.noise_ar >= 1.0)
    throw ValidationError("synth: noise AR coefficient must lie in [0, 1)");
  spec.battery.validate();

  const int rows = kStepsPerDay + spec.weeks * kStepsPerWeek;
  const int total = rows + kLookaheadSteps;  // realisations beyond the record feed forecasts
  RandomStream rng(seed);

  std::vector<Uncertainty> truth(static_cast<std::size_t>(total));
  const double innovation = spec.noise_scale * std::sqrt(1.0 - spec.noise_ar * spec.noise_ar);
  double demand_noise = spec.noise_scale * rng.normal();
  double pv_noise = 0.0;
  for (int r = 0; r < total; ++r) {
    Minutes ts = spec.start + 15 * static_cast<Minutes>(r);
    double hour = static_cast<double>((ts % 1440 + 1440) % 1440) / 60.0;
    int dow = weekday_of(ts);
    double weekly = dow >= 5 ? 0.7 : 1.0;
    double day_of_year = static_cast<double>((ts / 1440) % 365);
    double season = 0.65 + 0.35 * std::cos(2.0 * std::numbers::pi * (day_of_year - 172.0) / 365.0);

    demand_noise = spec.noise_ar * demand_noise + innovation * rng.normal();
    pv_noise = 0.8 * pv_noise + 0.6 * rng.normal();
    double daily = std::sin(2.0 * std::numbers::pi * (hour - 12.0) / 24.0);
    double demand = spec.demand_base * weekly + spec.demand_amplitude * daily + demand_noise;

    double bell = daylight_bell(hour);
    double pv = spec.pv_amplitude * bell * season * (1.0 + 0.1 * spec.noise_scale * pv_noise);
    truth[static_cast<std::size_t>(r)] = {std::max(0.0, pv), std::max(0.0, demand)};
  }

  std::vector<Uncertainty> observed(truth.begin(), truth.begin() + rows);
  std::vector<Uncertainty> forecast(static_cast<std::size_t>(rows) * kLookaheadSteps);
  for (int r = 0; r < rows; ++r) {
    double e_demand = 0.0, e_pv = 0.0;
    for (int k = 0; k < kLookaheadSteps; ++k) {
      e_demand = spec.forecast_error_ar * e_demand + spec.forecast_error_scale * rng.normal();
      e_pv = spec.forecast_error_ar * e_pv + 0.5 * spec.forecast_error_scale * rng.normal();
      const Uncertainty& target = truth[static_cast<std::size_t>(r + k)];
      Uncertainty fc{target.pv > 0.0 ? std::max(0.0, target.pv + e_pv) : 0.0,
                     std::max(0.0, target.demand + e_demand)};
      forecast[static_cast<std::size_t>(r) * kLookaheadSteps + static_cast<std::size_t>(k)] = fc;
    }
  }
  return make_site_record(spec.site_id, spec.battery, spec.start, std::move(observed),
                          std::move(forecast));
}

std::vector<SynthSpec> synth_fleet_specs(const SynthSpec& base, int sites, std::uint64_t seed) {
  std::vector<SynthSpec> out;
  RandomStream rng(seed);
  for (int i = 0; i < sites; ++i) {
    SynthSpec s = base;
    char id[32];
    std::snprintf(id, sizeof(id), "site_%02d", i + 1);
    s.site_id = id;
    s.demand_base = base.demand_base * (0.6 + 0.8 * rng.uniform());
    s.demand_amplitude = base.demand_amplitude * (0.6 + 0.8 * rng.uniform());
    s.pv_amplitude = base.pv_amplitude * (0.5 + 1.0 * rng.uniform());
    s.noise_scale = base.noise_scale * (0.5 + 1.0 * rng.uniform());
    s.forecast_error_scale = base.forecast_error_scale * (0.5 + 1.0 * rng.uniform());
    double capacity = base.battery.capacity_kwh * (0.5 + 1.0 * rng.uniform());
    s.battery = {capacity, capacity * base.battery.max_power_kw / base.battery.capacity_kwh,
                 base.battery.rho_c, base.battery.rho_d};
    out.push_back(s);
  }
  return out;
}

}  // namespace emsx
