#include <doctest.h>

#include <cmath>
#include <random>

#include "emsx/controllers.hpp"
#include "emsx/error.hpp"
#include "emsx/scoring.hpp"
#include "emsx/synth.hpp"
#include "support/fixtures.hpp"

using namespace emsx;
using namespace emsx::testing;
using doctest::Approx;

namespace {

SimResult result(const std::string& controller, const std::string& site, const std::string& week,
                 double cost) {
  SimResult r;
  r.controller = controller;
  r.site_id = site;
  r.week_id = week;
  r.management_cost = cost;
  return r;
}

struct Benchmark {
  std::vector<SimResult> results;
  std::vector<WeekBound> bounds;
};

Benchmark run_small(const Tariff& tariff, const std::vector<SiteWeeks>& sites) {
  Benchmark b;
  b.bounds = compute_bounds(sites, tariff, 1);
  auto shared = std::make_shared<Tariff>(tariff);
  for (const auto& s : sites)
    for (const auto& w : s.weeks) {
      DummyController d;
      MpcController mpc(s.battery, shared, 16);
      b.results.push_back(simulate(d, w, s.battery, tariff));
      b.results.push_back(simulate(mpc, w, s.battery, tariff));
    }
  return b;
}

std::vector<SiteWeeks> small_fleet() {
  std::vector<SiteWeeks> out;
  for (int i = 0; i < 2; ++i) {
    SynthSpec spec;
    spec.site_id = "site_" + std::to_string(i);
    spec.weeks = 2;
    SiteRecord rec = synth_site(spec, 300 + i);
    out.push_back({spec.site_id, rec.battery, weeks_of(rec, SplitRole::simulation)});
  }
  return out;
}

const ControllerScore& controller_row(const ScoreReport& r, const std::string& name) {
  for (const auto& c : r.controllers)
    if (c.controller == name) return c;
  throw std::runtime_error("no row for " + name);
}

}  // namespace

TEST_CASE("gain") {
  CHECK(gain({{"w1", 7.0}}, {{"w1", 10.0}}) == 3.0);
  CHECK(gain({{"w1", 10.0}, {"w2", 4.0}}, {{"w1", 10.0}, {"w2", 4.0}}) == 0.0);
  CHECK(gain({{"w1", 7.0}, {"w2", 5.0}}, {{"w1", 10.0}, {"w2", 4.0}}) == Approx(1.0));
  CHECK_THROWS(gain({{"w1", 7.0}}, {{"w2", 10.0}}));
  CHECK_THROWS(gain({{"w1", 7.0}}, {{"w1", 10.0}, {"w2", 4.0}}));
  CHECK_THROWS(gain({}, {}));
}

TEST_CASE("site score") {
  CHECK(*site_score(3, 10) == Approx(0.3));
  CHECK(*site_score(-3.4, 10) == Approx(-0.34));
  CHECK(*site_score(10, 10) == 1.0);
  CHECK_FALSE(site_score(0, 1e-7).has_value());
  CHECK_FALSE(site_score(0, 0).has_value());
}

TEST_CASE("aggregate score") {
  CHECK(aggregate_score({0.5, 0.5}) == 0.5);
  CHECK(aggregate_score({1.0, 0.0}) == 0.5);
  CHECK(aggregate_score({1.0, 1.0, 1.0}) == 1.0);
  CHECK(aggregate_score({0.2, std::nullopt, 0.4}) == Approx(0.3));
  CHECK_THROWS_AS(aggregate_score({std::nullopt}), ValidationError);
  CHECK_THROWS_AS(aggregate_score({}), ValidationError);
}

TEST_CASE("RMSE closed forms") {
  auto obs = [](int r) { return Uncertainty{0, 4.0 + 3.0 * std::sin(0.05 * r)}; };
  const int rows = 96 + 672;
  double lo = INFINITY, hi = -INFINITY;
  for (int r = 0; r < rows; ++r) {
    lo = std::min(lo, obs(r).net_demand());
    hi = std::max(hi, obs(r).net_demand());
  }
  CHECK(rmse(make_site(rows, obs)) == 0.0);
  for (double c : {0.1, -0.7, 2.5}) {
    auto rec = make_site(rows, obs, [c](int, int) { return c; });
    CHECK(std::abs(rmse(rec) - std::abs(c) / (hi - lo)) <= 1e-9);
  }
  CHECK_THROWS(rmse(make_site(rows, [](int) { return Uncertainty{1, 3}; })));
}

TEST_CASE("score report on a small benchmark") {
  std::mt19937_64 gen(51);
  Tariff tariff = random_tariff(gen);
  auto fleet = small_fleet();
  Benchmark b = run_small(tariff, fleet);
  ScoreReport r = build_score_report(b.results, b.bounds);
  CHECK(*controller_row(r, "dummy").score == 0.0);
  CHECK(*controller_row(r, kAnticipativeName).score == 1.0);
  double mpc = *controller_row(r, "mpc").score;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : r.sites) {
    REQUIRE(s.gain <= s.gain_bound + 1e-9);
    REQUIRE(s.gain_bound >= 0.0);
    if (s.controller == "mpc") {
      lo = std::min(lo, *s.score);
      hi = std::max(hi, *s.score);
    }
    if (s.controller == "dummy") REQUIRE(*s.score == 0.0);
  }
  CHECK(mpc >= lo);
  CHECK(mpc <= hi);

  // Prices scaled by a positive constant leave every score unchanged.
  Benchmark scaled = run_small(tariff.scaled(4.0), fleet);
  ScoreReport r4 = build_score_report(scaled.results, scaled.bounds);
  REQUIRE(r4.sites.size() == r.sites.size());
  for (std::size_t i = 0; i < r.sites.size(); ++i) {
    CHECK(r4.sites[i].gain == Approx(4.0 * r.sites[i].gain).epsilon(1e-9));
    CHECK(std::abs(*r4.sites[i].score - *r.sites[i].score) <= 1e-9);
  }
}

TEST_CASE("faults and missing weeks invalidate a cell") {
  std::vector<WeekBound> bounds{{"s", "w1", 10, 4}, {"s", "w2", 12, 6}, {"t", "w1", 5, 5}};
  std::vector<SimResult> results{result("c", "s", "w1", 7), result("c", "s", "w2", 9),
                                 result("d", "s", "w1", 7), result("c", "t", "w1", 5)};
  SimResult faulted = result("e", "s", "w1", 7);
  faulted.fault = "control outside admissible interval";
  results.push_back(faulted);
  results.push_back(result("e", "s", "w2", 9));
  ScoreReport r = build_score_report(results, bounds);
  for (const auto& s : r.sites) {
    if (s.controller == "c" && s.site_id == "s") {
      CHECK(s.gain == 3.0);
      CHECK(s.gain_bound == 6.0);
      CHECK(*s.score == 0.5);
    }
    if (s.site_id == "t") {
      CHECK_FALSE(s.score.has_value());
      CHECK_FALSE(s.note.empty());
    }
    if (s.controller == "d" || s.controller == "e") {
      CHECK_FALSE(s.score.has_value());
      CHECK_FALSE(s.note.empty());
    }
  }
  CHECK(*controller_row(r, "c").score == 0.5);
  CHECK(controller_row(r, "c").sites_scored == 1);
  CHECK_FALSE(controller_row(r, "d").score.has_value());
}

TEST_CASE("report formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.34) == "-0.34");
  CHECK(format_number(1.0) == "1");
  std::vector<WeekBound> bounds{{"s", "w1", 10, 4}};
  ScoreReport r = build_score_report({result("c", "s", "w1", 7)}, bounds);
  std::string csv = scores_csv(r);
  CHECK(csv.rfind("controller,score,sites_scored\n", 0) == 0);
  CHECK(csv.find("c,0.5,1\n") != std::string::npos);
  CHECK(per_site_csv(r).rfind("controller,site_id,weeks,gain,gain_bound,score,rmse,note,provenance\n", 0) == 0);
  CHECK(report_json(r).dump() == report_json(r).dump());
}
