#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "emsx/controllers.hpp"
#include "emsx/synth.hpp"
#include "support/fixtures.hpp"

using namespace emsx;
using namespace emsx::testing;
using doctest::Approx;

namespace {

struct Fixture {
  SiteRecord rec;
  std::vector<Chronicle> weeks;
  std::shared_ptr<const Tariff> tariff;
  BatteryParams battery;

  Fixture() : rec(make_rec()), weeks(build_chronicles(rec).weeks), battery(rec.battery) {
    std::mt19937_64 gen(31);
    tariff = std::make_shared<Tariff>(random_tariff(gen));
  }

  static SiteRecord make_rec() {
    SynthSpec spec;
    spec.weeks = 3;
    return synth_site(spec, 5);
  }
};

std::shared_ptr<const NoiseModel> random_noise(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(-5, 5);
  auto m = std::make_shared<NoiseModel>();
  for (int s = 0; s < kCalendarKeys; ++s)
    m->slots.push_back({{U(gen), U(gen), U(gen)}, {0.2, 0.5, 0.3}});
  return m;
}

std::shared_ptr<const ArModel> ar_model(double alpha, double beta, DiscreteDistribution eps) {
  auto m = std::make_shared<ArModel>();
  m->order = 1;
  for (int s = 0; s < kCalendarKeys; ++s) m->slots.push_back({{alpha}, beta, eps});
  return m;
}

}  // namespace

TEST_CASE("dummy controller never acts") {
  Fixture f;
  DummyController d;
  for (int t : {0, 300, 671})
    for (double x : {0.0, 0.5, 1.0}) CHECK(d.decide(StateOfCharge(x), f.weeks[0].step(t)) == 0.0);
}

TEST_CASE("lookahead horizon truncation") {
  Fixture f;
  CHECK(lookahead_horizon(96, f.weeks[0].step(0)) == 96);
  CHECK(lookahead_horizon(96, f.weeks[0].step(600)) == 72);
  CHECK(lookahead_horizon(96, f.weeks[0].step(671)) == 1);
  CHECK(lookahead_horizon(10, f.weeks[0].step(100)) == 10);
  Chronicle perfect = f.weeks[0].with_perfect_forecasts(672);
  CHECK(lookahead_horizon(672, perfect.step(0)) == 672);
  CHECK(lookahead_horizon(672, perfect.step(500)) == 172);
}

TEST_CASE("MPC at the last step is myopic") {
  Fixture f;
  MpcController mpc(f.battery, f.tariff);
  StepInfo info = f.weeks[1].step(671);
  for (double x : {0.0, 0.4, 1.0}) {
    LookaheadSolution s = mpc.solve(x, info);
    double lo = admissible_interval(x, f.battery).lo;
    double z = info.forecast_net_demand(1);
    CHECK(s.value == Approx(stage_cost(lo, z, f.tariff->buy(671), f.tariff->sell(671))).epsilon(1e-12));
    CHECK(s.first_control == Approx(lo).epsilon(1e-12));
  }
}

TEST_CASE("MPC with a zero forecast from an empty battery idles") {
  auto rec = make_site(96 + 672, [](int) { return Uncertainty{2, 2}; });
  Chronicle week = build_chronicles(rec).weeks[0];
  std::mt19937_64 gen(32);
  auto tariff = std::make_shared<Tariff>(random_tariff(gen));
  MpcController mpc(rec.battery, tariff);
  for (int t : {0, 17, 400, 671}) CHECK(mpc.decide(StateOfCharge(0.0), week.step(t)) == 0.0);
}

TEST_CASE("OLFC with one zero-error scenario reduces to MPC") {
  Fixture f;
  auto model = std::make_shared<ScenarioModel>(zero_error_scenario_model());
  OlfcController olfc(f.battery, f.tariff, model, 1, 99);
  MpcController mpc(f.battery, f.tariff);
  std::mt19937_64 gen(33);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 100; ++i) {
    int t = static_cast<int>(gen() % 672);
    double x = U(gen);
    const Chronicle& week = f.weeks[gen() % f.weeks.size()];
    StepInfo info = week.step(t);
    LookaheadSolution a = olfc.solve(x, info), b = mpc.solve(x, info);
    REQUIRE(std::abs(a.value - b.value) <= 1e-9 * std::max(1.0, std::abs(b.value)));
    REQUIRE(std::abs(a.first_control - b.first_control) <= 1e-9);
  }
}

TEST_CASE("OLFC problems are well formed and reproducible") {
  Fixture f;
  CalibrationSet cal(weeks_of(f.rec, SplitRole::calibration));
  auto model = std::make_shared<ScenarioModel>(fit_scenario_model(cal));
  OlfcController a(f.battery, f.tariff, model, 10, 7), b(f.battery, f.tariff, model, 10, 7);
  for (int t : {0, 250, 640}) {
    StepInfo info = f.weeks[2].step(t);
    LookaheadProblem p = a.problem(0.3, info);
    CHECK(p.scenarios.size() == 10);
    CHECK(p.horizon == lookahead_horizon(96, info));
    double total = 0;
    for (double pi : p.probabilities) total += pi;
    CHECK(total == Approx(1.0).epsilon(1e-12));
    double u = a.decide(StateOfCharge(0.3), info);
    CHECK(b.decide(StateOfCharge(0.3), info) == u);
    CHECK(a.decide(StateOfCharge(0.3), info) == u);
  }
}

TEST_CASE("SDP controllers are admissible and myopic at the last step") {
  Fixture f;
  std::mt19937_64 gen(34);
  auto noise = random_noise(gen);
  auto vs = std::make_shared<ValueFunction>(compute_value_functions_sdp(*noise, f.battery, *f.tariff));
  SdpController sdp(f.battery, f.tariff, noise, vs);
  auto ar = ar_model(0.7, 1.0, {{-2, 0, 2}, {0.25, 0.5, 0.25}});
  auto va = std::make_shared<ValueFunction>(
      compute_value_functions_sdpar(*ar, f.battery, *f.tariff, -10, 20));
  SdpArController sdpar(f.battery, f.tariff, ar, va);
  for (int t : {0, 95, 96, 500, 671})
    for (double x : {0.0, 0.5, 1.0}) {
      StepInfo info = f.weeks[0].step(t);
      AdmissibleInterval iv = admissible_interval(x, f.battery);
      double u = sdp.decide(StateOfCharge(x), info);
      double w = sdpar.decide(StateOfCharge(x), info);
      CHECK(iv.contains(u));
      CHECK(iv.contains(w));
      if (t == 671) {
        // Stage cost strictly increases in u when every sell price is positive.
        CHECK(u == iv.lo);
        CHECK(w == iv.lo);
      }
    }
}

TEST_CASE("SDP-AR with zero coefficients decides like SDP") {
  Fixture f;
  DiscreteDistribution noise_d{{-3, 0, 1, 5}, {0.1, 0.4, 0.3, 0.2}};
  auto noise = std::make_shared<NoiseModel>();
  noise->slots.assign(kCalendarKeys, noise_d);
  DiscreteDistribution eps = noise_d;
  for (auto& e : eps.values) e -= 2.0;
  auto ar = ar_model(0.0, 2.0, eps);
  auto vs = std::make_shared<ValueFunction>(compute_value_functions_sdp(*noise, f.battery, *f.tariff));
  auto va = std::make_shared<ValueFunction>(
      compute_value_functions_sdpar(*ar, f.battery, *f.tariff, -10, 20));
  SdpController sdp(f.battery, f.tariff, noise, vs);
  SdpArController sdpar(f.battery, f.tariff, ar, va);
  std::mt19937_64 gen(35);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < 200; ++i) {
    int t = static_cast<int>(gen() % 672);
    double x = U(gen);
    StepInfo info = f.weeks[1].step(t);
    REQUIRE(sdpar.decide(StateOfCharge(x), info) == sdp.decide(StateOfCharge(x), info));
  }
}

TEST_CASE("projection onto the admissible interval") {
  BatteryParams b{10, 8, 0.9, 0.9};
  AdmissibleInterval iv = admissible_interval(0.0, b);
  CHECK(project_admissible(iv.lo - 5e-10, 0.0, b) == iv.lo);
  CHECK(project_admissible(1.0, 0.0, b) == 1.0);
  CHECK_THROWS(project_admissible(iv.lo - 1e-6, 0.0, b));
}
