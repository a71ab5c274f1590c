#pragma once

// Built-in controllers: Dummy, MPC, OLFC, SDP and SDP-AR, plus the
// anticipative weekly oracle.

#include <cstdint>
#include <memory>

#include "emsx/calibration.hpp"
#include "emsx/chronicle.hpp"
#include "emsx/controller.hpp"
#include "emsx/lookahead.hpp"
#include "emsx/scenario_model.hpp"
#include "emsx/value_function.hpp"

namespace emsx {

class DummyController final : public Controller {
 public:
  std::string name() const override { return "dummy"; }
  double decide(StateOfCharge, const StepInfo&) override { return 0.0; }
};

/// Horizon at step t: min(H, T - t, forecasts available).
int lookahead_horizon(int horizon, const StepInfo& info);

class MpcController final : public Controller {
 public:
  MpcController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                int horizon = kLookaheadSteps);
  std::string name() const override { return "mpc"; }
  double decide(StateOfCharge x, const StepInfo& info) override;
  LookaheadSolution solve(double x, const StepInfo& info) const;

 private:
  BatteryParams battery_;
  std::shared_ptr<const Tariff> tariff_;
  int horizon_;
};

/// Scenarios are drawn from a stream seeded by (seed, step, latest
/// observation), so a decision depends only on its inputs and the seed.
class OlfcController final : public Controller {
 public:
  OlfcController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                 std::shared_ptr<const ScenarioModel> model, int scenarios, std::uint64_t seed,
                 int horizon = kLookaheadSteps);
  std::string name() const override { return "olfc-" + std::to_string(scenarios_); }
  double decide(StateOfCharge x, const StepInfo& info) override;
  LookaheadSolution solve(double x, const StepInfo& info) const;
  LookaheadProblem problem(double x, const StepInfo& info) const;

 private:
  BatteryParams battery_;
  std::shared_ptr<const Tariff> tariff_;
  std::shared_ptr<const ScenarioModel> model_;
  int scenarios_;
  std::uint64_t seed_;
  int horizon_;
};

class SdpController final : public Controller {
 public:
  SdpController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                std::shared_ptr<const NoiseModel> noise, std::shared_ptr<const ValueFunction> v,
                int control_points = DpGrid{}.control_points);
  std::string name() const override { return "sdp"; }
  double decide(StateOfCharge x, const StepInfo& info) override;

 private:
  BatteryParams battery_;
  std::shared_ptr<const Tariff> tariff_;
  std::shared_ptr<const NoiseModel> noise_;
  std::shared_ptr<const ValueFunction> v_;
  int control_points_;
};

class SdpArController final : public Controller {
 public:
  SdpArController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                  std::shared_ptr<const ArModel> ar, std::shared_ptr<const ValueFunction> v,
                  int control_points = DpGrid{}.control_points);
  std::string name() const override { return "sdp-ar" + std::to_string(ar_->order); }
  double decide(StateOfCharge x, const StepInfo& info) override;

 private:
  BatteryParams battery_;
  std::shared_ptr<const Tariff> tariff_;
  std::shared_ptr<const ArModel> ar_;
  std::shared_ptr<const ValueFunction> v_;
  int control_points_;
};

/// Optimal weekly cost with the realized net demand known in advance,
/// starting from an empty battery.
double anticipative_cost(const Chronicle& chronicle, const BatteryParams& battery,
                         const Tariff& tariff);

/// Scenario model whose errors are identically zero; sampled scenarios equal
/// the point forecast.
ScenarioModel zero_error_scenario_model(int k = 1);

}  // namespace emsx
