#pragma once

#include <span>
#include <vector>

#include "emsx/model.hpp"
#include "emsx/pwl.hpp"

namespace emsx {

/// Open-loop multistage problem over h steps starting at week step t:
///   min over u_0..u_{h-1} of sum_s pi_s sum_tau L_{t+tau}(u_tau, z^s_tau)
/// subject to the SoC recursion and admissibility. A single scenario with
/// probability 1 is the deterministic case.
struct LookaheadProblem {
  int start_step = 0;
  int horizon = 1;
  double initial_soc = 0.0;
  std::vector<std::vector<double>> scenarios;  // net demand, length >= horizon
  std::vector<double> probabilities;
  const Tariff* tariff = nullptr;
  BatteryParams battery{};

  void validate() const;
};

struct LookaheadSolution {
  double first_control;
  double value;
};

/// Exact solution. The controls are shared by all scenarios, so the state
/// path is deterministic and each stage cost is convex piecewise-linear in
/// the state increment; value functions are built backward by infimal
/// convolution. Among optimal first controls, the one of smallest |u| is
/// returned.
LookaheadSolution solve_lookahead(const LookaheadProblem& problem);

/// Expected stage cost as a function of the SoC increment d = f(x, u) - x
/// over the battery's power box.
ConvexPwl stage_cost_in_increment(std::span<const double> net_demands,
                                  std::span<const double> probabilities, double buy,
                                  double sell, const BatteryParams& battery);

}  // namespace emsx
