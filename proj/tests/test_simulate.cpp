#include <doctest.h>

#include <atomic>
#include <random>
#include <stdexcept>

#include "emsx/controllers.hpp"
#include "emsx/error.hpp"
#include "emsx/simulate.hpp"
#include "emsx/synth.hpp"
#include "support/fixtures.hpp"

using namespace emsx;
using namespace emsx::testing;
using doctest::Approx;

namespace {

class Scripted final : public Controller {
 public:
  explicit Scripted(std::vector<double> script) : script_(std::move(script)) {}
  std::string name() const override { return "scripted"; }
  double decide(StateOfCharge, const StepInfo& info) override {
    std::size_t t = static_cast<std::size_t>(info.step_index());
    return t < script_.size() ? script_[t] : 0.0;
  }

 private:
  std::vector<double> script_;
};

class Thrower final : public Controller {
 public:
  std::string name() const override { return "thrower"; }
  double decide(StateOfCharge, const StepInfo& info) override {
    if (info.step_index() == 5) throw std::runtime_error("boom");
    return 0.0;
  }
};

SiteWeeks synth_site_weeks(const std::string& id, int weeks, std::uint64_t seed) {
  SynthSpec spec;
  spec.site_id = id;
  spec.weeks = weeks;
  SiteRecord rec = synth_site(spec, seed);
  return {id, rec.battery, weeks_of(rec, SplitRole::simulation)};
}

}  // namespace

TEST_CASE("dummy run keeps the battery empty") {
  SiteWeeks s = synth_site_weeks("a", 1, 3);
  Tariff tariff = flat_tariff(0.25, 0.08);
  DummyController d;
  SimResult r = simulate(d, s.weeks[0], s.battery, tariff);
  REQUIRE(r.soc.size() == 673);
  REQUIRE(r.controls.size() == 672);
  double expected = 0;
  for (int t = 0; t < 672; ++t) {
    CHECK(r.soc[static_cast<std::size_t>(t + 1)] == 0.0);
    CHECK(r.controls[static_cast<std::size_t>(t)] == 0.0);
    expected += stage_cost(0.0, s.weeks[0].realized(t + 1), tariff, t);
  }
  CHECK(r.management_cost == Approx(expected).epsilon(1e-12));
  CHECK_FALSE(r.faulted());
  CHECK(r.controller == "dummy");
  CHECK(r.site_id == "a");
}

TEST_CASE("zero net demand and zero prices cost nothing") {
  auto rec = make_site(96 + 672, [](int) { return Uncertainty{1, 1}; });
  Chronicle week = weeks_of(rec, SplitRole::simulation)[0];
  auto tariff = std::make_shared<Tariff>(flat_tariff(0.0, 0.0));
  MpcController mpc(rec.battery, tariff);
  CHECK(simulate(mpc, week, rec.battery, *tariff).management_cost == 0.0);
}

TEST_CASE("scripted controller trajectory") {
  auto rec = make_site(96 + 672, [](int) { return Uncertainty{0, 1}; });
  Chronicle week = weeks_of(rec, SplitRole::simulation)[0];
  BatteryParams b{10, 40, 0.9, 0.8};
  Tariff tariff = flat_tariff(0.2, 0.1);
  Scripted c({2.0, -1.0, -0.44});
  SimResult r = simulate(c, week, b, tariff);
  CHECK(r.soc[1] == Approx(0.18));
  CHECK(r.soc[2] == Approx(0.055));
  CHECK(r.soc[3] == Approx(0.0).epsilon(1e-12));
  CHECK(r.stage_costs[0] == Approx(0.6));
  CHECK(r.stage_costs[1] == Approx(0.0));
  CHECK(r.stage_costs[2] == Approx(0.2 * 0.56));
  CHECK(r.management_cost == Approx(0.6 + 0.112 + 669 * 0.2));
}

TEST_CASE("contract violations are recorded as faults") {
  auto rec = make_site(96 + 672, [](int) { return Uncertainty{0, 1}; });
  Chronicle week = weeks_of(rec, SplitRole::simulation)[0];
  Tariff tariff = flat_tariff(0.2, 0.1);
  Scripted discharge({-1.0});
  SimResult r = simulate(discharge, week, rec.battery, tariff);
  CHECK(r.faulted());
  Thrower thrower;
  r = simulate(thrower, week, rec.battery, tariff);
  REQUIRE(r.faulted());
  CHECK(r.fault->find("boom") != std::string::npos);
}

TEST_CASE("calibration chronicles are rejected") {
  auto rec = make_site(96 + 672, [](int) { return Uncertainty{0, 1}; });
  DummyController d;
  Tariff tariff = flat_tariff(0.2, 0.1);
  CHECK_THROWS_AS(simulate(d, weeks_of(rec, SplitRole::calibration)[0], rec.battery, tariff),
                  ValidationError);
  CHECK_THROWS_AS(simulate(d, build_chronicles(rec).weeks[0], rec.battery, tariff), ValidationError);
}

TEST_CASE("benchmark output does not depend on parallelism") {
  std::mt19937_64 gen(41);
  BenchmarkPlan plan;
  plan.tariff = std::make_shared<Tariff>(random_tariff(gen));
  for (int i = 0; i < 4; ++i)
    plan.sites.push_back(synth_site_weeks("s" + std::to_string(i), 4, 100 + i));
  auto tariff = plan.tariff;
  std::vector<BatteryParams> batteries;
  for (const auto& s : plan.sites) batteries.push_back(s.battery);
  plan.controllers.push_back({"dummy", [](const std::string&) { return std::make_unique<DummyController>(); }});
  plan.controllers.push_back({"mpc-h8", [&](const std::string& id) {
    return std::make_unique<MpcController>(batteries[static_cast<std::size_t>(id[1] - '0')], tariff, 8);
  }});
  BenchmarkOutput one = run_benchmark(plan, 1);
  BenchmarkOutput eight = run_benchmark(plan, 8);
  REQUIRE(one.results.size() == 32);
  REQUIRE(eight.results.size() == 32);
  for (std::size_t i = 0; i < one.results.size(); ++i) {
    const SimResult &a = one.results[i], &b = eight.results[i];
    REQUIRE(a.controller == b.controller);
    REQUIRE(a.site_id == b.site_id);
    REQUIRE(a.week_id == b.week_id);
    REQUIRE(a.controls == b.controls);
    REQUIRE(a.soc == b.soc);
    REQUIRE(a.management_cost == b.management_cost);
  }
}

TEST_CASE("a failing factory errors only its cell") {
  BenchmarkPlan plan;
  plan.tariff = std::make_shared<Tariff>(flat_tariff(0.2, 0.1));
  for (int i = 0; i < 3; ++i)
    plan.sites.push_back(synth_site_weeks("s" + std::to_string(i), 2, 200 + i));
  plan.controllers.push_back({"dummy", [](const std::string& id) -> ControllerPtr {
    if (id == "s1") throw ArtifactMissing("missing value function for s1");
    return std::make_unique<DummyController>();
  }});
  BenchmarkOutput out = run_benchmark(plan, 3);
  CHECK(out.results.size() == 4);
  REQUIRE(out.errors.size() == 1);
  CHECK(out.errors[0].site_id == "s1");
  CHECK(out.errors[0].message.find("value function") != std::string::npos);
}

TEST_CASE("seventy sites over two weeks") {
  BenchmarkPlan plan;
  plan.tariff = std::make_shared<Tariff>(flat_tariff(0.2, 0.1));
  SynthSpec base;
  base.weeks = 2;
  for (const auto& spec : synth_fleet_specs(base, 70, 1)) {
    SiteRecord rec = synth_site(spec, fnv1a(spec.site_id));
    plan.sites.push_back({spec.site_id, rec.battery, weeks_of(rec, SplitRole::simulation)});
  }
  plan.controllers.push_back({"dummy", [](const std::string&) { return std::make_unique<DummyController>(); }});
  CHECK(run_benchmark(plan, 4).results.size() == 140);
}

TEST_CASE("weekly bounds bracket every controller") {
  std::mt19937_64 gen(42);
  Tariff tariff = random_tariff(gen);
  std::vector<SiteWeeks> sites{synth_site_weeks("b", 2, 7)};
  auto bounds = compute_bounds(sites, tariff, 2);
  REQUIRE(bounds.size() == 2);
  for (const auto& b : bounds) CHECK(b.anticipative_cost <= b.dummy_cost + 1e-9);
  auto shared = std::make_shared<Tariff>(tariff);
  MpcController mpc(sites[0].battery, shared);
  for (std::size_t w = 0; w < 2; ++w) {
    double c = simulate(mpc, sites[0].weeks[w], sites[0].battery, tariff).management_cost;
    CHECK(c >= bounds[w].anticipative_cost - 1e-6 * std::abs(bounds[w].anticipative_cost));
  }
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 8, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, 4, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("x");
  }));
}
