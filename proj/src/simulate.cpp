#include "emsx/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "emsx/controllers.hpp"
#include "emsx/error.hpp"

namespace emsx {

SimResult simulate(Controller& controller, const Chronicle& chronicle,
                   const BatteryParams& battery, const Tariff& tariff) {
  if (chronicle.role() != SplitRole::simulation)
    throw ValidationError("week " + chronicle.week_id() + " of " + chronicle.site_id() +
                          " is not a simulation week");
  SimResult r;
  r.site_id = chronicle.site_id();
  r.week_id = chronicle.week_id();
  r.controller = controller.name();
  r.soc.reserve(Chronicle::kSteps + 1);
  r.controls.reserve(Chronicle::kSteps);
  r.stage_costs.reserve(Chronicle::kSteps);

  double x = 0.0;
  r.soc.push_back(x);
  double seconds = 0.0;
  for (int t = 0; t < Chronicle::kSteps; ++t) {
    StepInfo info = chronicle.step(t);
    double u = 0.0;
    auto t0 = std::chrono::steady_clock::now();
    try {
      u = controller.decide(StateOfCharge(x), info);
    } catch (const std::exception& e) {
      r.fault = "step " + std::to_string(t) + ": " + e.what();
    }
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (r.fault) break;
    AdmissibleInterval iv = admissible_interval(x, battery);
    if (!std::isfinite(u) || !iv.contains(u, kContractTol)) {
      r.fault = "step " + std::to_string(t) + ": control " + std::to_string(u) +
                " outside [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "]";
      break;
    }
    u = iv.clamp(u);
    double cost = stage_cost(u, chronicle.realized_net_demand(t + 1), tariff.buy(t), tariff.sell(t));
    double next = dynamics(x, u, battery);
    if (next < -1e-9 || next > 1.0 + 1e-9) {
      r.fault = "step " + std::to_string(t) + ": state of charge left [0, 1]";
      break;
    }
    x = std::clamp(next, 0.0, 1.0);
    r.controls.push_back(u);
    r.stage_costs.push_back(cost);
    r.soc.push_back(x);
  }
  r.management_cost = total_cost(r.stage_costs);
  if (!r.controls.empty() || r.fault)
    r.mean_online_seconds = seconds / static_cast<double>(r.controls.size() + (r.fault ? 1 : 0));
  return r;
}

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, parallelism)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

BenchmarkOutput run_benchmark(const BenchmarkPlan& plan, int parallelism) {
  if (!plan.tariff) throw ValidationError("benchmark without tariff");
  struct Unit {
    std::size_t controller, site, week;
  };
  std::vector<Unit> units;
  for (std::size_t c = 0; c < plan.controllers.size(); ++c)
    for (std::size_t s = 0; s < plan.sites.size(); ++s)
      for (std::size_t w = 0; w < plan.sites[s].weeks.size(); ++w) units.push_back({c, s, w});

  std::vector<std::optional<SimResult>> slots(units.size());
  std::map<std::pair<std::size_t, std::size_t>, std::string> errors;
  std::mutex errors_mutex;
  parallel_for(units.size(), parallelism, [&](std::size_t i) {
    const Unit& u = units[i];
    const auto& site = plan.sites[u.site];
    const auto& entry = plan.controllers[u.controller];
    ControllerPtr ctrl;
    try {
      ctrl = entry.make(site.site_id);
    } catch (const Error& e) {
      std::lock_guard lock(errors_mutex);
      errors.emplace(std::make_pair(u.controller, u.site), e.what());
      return;
    }
    SimResult r = simulate(*ctrl, site.weeks[u.week], site.battery, *plan.tariff);
    r.controller = entry.name;
    slots[i] = std::move(r);
  });

  BenchmarkOutput out;
  for (auto& s : slots)
    if (s) out.results.push_back(std::move(*s));
  std::sort(out.results.begin(), out.results.end(), [](const SimResult& a, const SimResult& b) {
    return std::tie(a.controller, a.site_id, a.week_id) < std::tie(b.controller, b.site_id, b.week_id);
  });
  for (const auto& [key, msg] : errors)
    out.errors.push_back({plan.controllers[key.first].name, plan.sites[key.second].site_id, msg});
  std::sort(out.errors.begin(), out.errors.end(), [](const CellError& a, const CellError& b) {
    return std::tie(a.controller, a.site_id) < std::tie(b.controller, b.site_id);
  });
  return out;
}

std::vector<WeekBound> compute_bounds(const std::vector<SiteWeeks>& sites, const Tariff& tariff,
                                      int parallelism) {
  std::vector<std::pair<std::size_t, std::size_t>> units;
  for (std::size_t s = 0; s < sites.size(); ++s)
    for (std::size_t w = 0; w < sites[s].weeks.size(); ++w) units.emplace_back(s, w);
  std::vector<WeekBound> out(units.size());
  parallel_for(units.size(), parallelism, [&](std::size_t i) {
    const auto& site = sites[units[i].first];
    const Chronicle& week = site.weeks[units[i].second];
    double dummy = 0.0;
    for (int t = 0; t < Chronicle::kSteps; ++t)
      dummy += stage_cost(0.0, week.realized_net_demand(t + 1), tariff.buy(t), tariff.sell(t));
    out[i] = {site.site_id, week.week_id(), dummy, anticipative_cost(week, site.battery, tariff)};
  });
  std::sort(out.begin(), out.end(), [](const WeekBound& a, const WeekBound& b) {
    return std::tie(a.site_id, a.week_id) < std::tie(b.site_id, b.week_id);
  });
  return out;
}

}  // namespace emsx
