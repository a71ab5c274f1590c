#include "emsx/controllers.hpp"

#include <algorithm>
#include <bit>

#include "emsx/error.hpp"
#include "emsx/rng.hpp"

namespace emsx {

double project_admissible(double u, double x, const BatteryParams& battery) {
  AdmissibleInterval iv = admissible_interval(std::clamp(x, 0.0, 1.0), battery);
  if (iv.contains(u)) return u;
  if (!iv.contains(u, kControllerClampTol))
    throw ControllerFault("control " + std::to_string(u) + " outside [" + std::to_string(iv.lo) +
                          ", " + std::to_string(iv.hi) + "]");
  return iv.clamp(u);
}

int lookahead_horizon(int horizon, const StepInfo& info) {
  int h = std::min({horizon, kStepsPerWeek - info.step_index(), info.forecast_size()});
  if (h < 1) throw DomainError("no forecast available for the lookahead");
  return h;
}

MpcController::MpcController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                             int horizon)
    : battery_(battery), tariff_(std::move(tariff)), horizon_(horizon) {
  battery_.validate();
  if (horizon_ < 1) throw DomainError("MPC horizon must be >= 1");
}

LookaheadSolution MpcController::solve(double x, const StepInfo& info) const {
  LookaheadProblem p;
  p.start_step = info.step_index();
  p.horizon = lookahead_horizon(horizon_, info);
  p.initial_soc = x;
  p.scenarios.assign(1, std::vector<double>(static_cast<std::size_t>(p.horizon)));
  for (int j = 1; j <= p.horizon; ++j)
    p.scenarios[0][static_cast<std::size_t>(j - 1)] = info.forecast_net_demand(j);
  p.probabilities = {1.0};
  p.tariff = tariff_.get();
  p.battery = battery_;
  return solve_lookahead(p);
}

double MpcController::decide(StateOfCharge x, const StepInfo& info) {
  return project_admissible(solve(x.value(), info).first_control, x.value(), battery_);
}

OlfcController::OlfcController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                               std::shared_ptr<const ScenarioModel> model, int scenarios,
                               std::uint64_t seed, int horizon)
    : battery_(battery),
      tariff_(std::move(tariff)),
      model_(std::move(model)),
      scenarios_(scenarios),
      seed_(seed),
      horizon_(horizon) {
  battery_.validate();
  if (!model_) throw ArtifactMissing("OLFC needs a scenario model");
  if (scenarios_ < 1) throw DomainError("OLFC scenario count must be >= 1");
  if (horizon_ < 1) throw DomainError("OLFC horizon must be >= 1");
}

LookaheadProblem OlfcController::problem(double x, const StepInfo& info) const {
  std::uint64_t key = derive_seed(seed_, static_cast<std::uint64_t>(info.step_index()));
  key = derive_seed(key, std::bit_cast<std::uint64_t>(info.past_net_demand(0)));
  RandomStream rng(key);
  auto scenarios = sample_scenarios(*model_, info, scenarios_, rng);

  LookaheadProblem p;
  p.start_step = info.step_index();
  p.horizon = lookahead_horizon(horizon_, info);
  p.initial_soc = x;
  for (auto& s : scenarios) {
    s.net_demand.resize(static_cast<std::size_t>(p.horizon));
    p.scenarios.push_back(std::move(s.net_demand));
    p.probabilities.push_back(s.probability);
  }
  p.tariff = tariff_.get();
  p.battery = battery_;
  return p;
}

LookaheadSolution OlfcController::solve(double x, const StepInfo& info) const {
  return solve_lookahead(problem(x, info));
}

double OlfcController::decide(StateOfCharge x, const StepInfo& info) {
  return project_admissible(solve(x.value(), info).first_control, x.value(), battery_);
}

SdpController::SdpController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                             std::shared_ptr<const NoiseModel> noise,
                             std::shared_ptr<const ValueFunction> v, int control_points)
    : battery_(battery),
      tariff_(std::move(tariff)),
      noise_(std::move(noise)),
      v_(std::move(v)),
      control_points_(control_points) {
  if (!noise_ || !v_) throw ArtifactMissing("SDP needs a noise model and value function");
  if (v_->order() != 0) throw ValidationError("SDP value function has lag axes");
}

double SdpController::decide(StateOfCharge x, const StepInfo& info) {
  double u = sdp_control(info.step_index(), x.value(), *v_, *noise_, battery_, *tariff_,
                         control_points_);
  return project_admissible(u, x.value(), battery_);
}

SdpArController::SdpArController(BatteryParams battery, std::shared_ptr<const Tariff> tariff,
                                 std::shared_ptr<const ArModel> ar,
                                 std::shared_ptr<const ValueFunction> v, int control_points)
    : battery_(battery),
      tariff_(std::move(tariff)),
      ar_(std::move(ar)),
      v_(std::move(v)),
      control_points_(control_points) {
  if (!ar_ || !v_) throw ArtifactMissing("SDP-AR needs an AR model and value function");
  if (v_->order() != ar_->order)
    throw ValidationError("SDP-AR value function order does not match the AR model");
}

double SdpArController::decide(StateOfCharge x, const StepInfo& info) {
  std::vector<double> lags(static_cast<std::size_t>(ar_->order));
  for (int j = 0; j < ar_->order; ++j) lags[static_cast<std::size_t>(j)] = info.past_net_demand(j);
  double u = sdpar_control(info.step_index(), x.value(), lags, *v_, *ar_, battery_, *tariff_,
                           control_points_);
  return project_admissible(u, x.value(), battery_);
}

double anticipative_cost(const Chronicle& chronicle, const BatteryParams& battery,
                         const Tariff& tariff) {
  LookaheadProblem p;
  p.start_step = 0;
  p.horizon = Chronicle::kSteps;
  p.initial_soc = 0.0;
  p.scenarios.assign(1, std::vector<double>(Chronicle::kSteps));
  for (int i = 1; i <= Chronicle::kSteps; ++i)
    p.scenarios[0][static_cast<std::size_t>(i - 1)] = chronicle.realized_net_demand(i);
  p.probabilities = {1.0};
  p.tariff = &tariff;
  p.battery = battery;
  return solve_lookahead(p).value;
}

ScenarioModel zero_error_scenario_model(int k) {
  ScenarioModel m;
  m.k = k;
  const std::size_t kk = static_cast<std::size_t>(k);
  std::vector<double> uniform(kk, 1.0 / static_cast<double>(k));
  for (auto& d : m.day_types) {
    d.centers.assign(kSeparatorCount, std::vector<double>(kk, 0.0));
    std::vector<double> matrix;
    for (std::size_t a = 0; a < kk; ++a) matrix.insert(matrix.end(), uniform.begin(), uniform.end());
    d.transitions.assign(kSeparatorCount - 1, matrix);
  }
  m.initial.assign(kCalendarKeys, uniform);
  m.validate();
  return m;
}

}  // namespace emsx
