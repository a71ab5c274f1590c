#include "emsx/lookahead.hpp"

#include <limits>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "emsx/error.hpp"

namespace emsx {

namespace {

// Control realising an SoC increment d.
double control_of_increment(double d, const BatteryParams& b) {
  return d >= 0.0 ? d * b.capacity_kwh / b.rho_c : d * b.rho_d * b.capacity_kwh;
}

double increment_of_control(double u, const BatteryParams& b) {
  return u >= 0.0 ? u * b.rho_c / b.capacity_kwh : u / (b.rho_d * b.capacity_kwh);
}

}  // namespace

void LookaheadProblem::validate() const {
  if (tariff == nullptr) throw DomainError("lookahead problem without tariff");
  if (horizon < 1) throw DomainError("lookahead horizon must be >= 1");
  if (!(initial_soc >= 0.0 && initial_soc <= 1.0)) throw DomainError("initial SoC outside [0, 1]");
  if (scenarios.empty() || scenarios.size() != probabilities.size())
    throw DomainError("lookahead needs one probability per scenario");
  double sum = 0.0;
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    if (scenarios[s].size() < static_cast<std::size_t>(horizon))
      throw DomainError("scenario shorter than the horizon");
    if (!(probabilities[s] >= 0.0)) throw DomainError("negative scenario probability");
    sum += probabilities[s];
  }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("scenario probabilities do not sum to 1");
  battery.validate();
}

ConvexPwl stage_cost_in_increment(std::span<const double> net_demands,
                                  std::span<const double> probabilities, double buy, double sell,
                                  const BatteryParams& battery) {
  const double d_lo = increment_of_control(battery.max_discharge(), battery);
  const double d_hi = increment_of_control(battery.max_charge(), battery);

  // Scenario s buys from the grid once u > -z_s.
  struct Kink {
    double d;
    double weight;  // probability switching from sell to buy price
  };
  std::vector<Kink> kinks;
  kinks.reserve(net_demands.size() + 1);
  double buy_weight = 0.0;  // probability mass buying at the start of the domain
  const double u_lo = battery.max_discharge();
  double start_value = 0.0;
  for (std::size_t s = 0; s < net_demands.size(); ++s) {
    double z = net_demands[s];
    start_value += probabilities[s] * stage_cost(u_lo, z, buy, sell);
    if (z + u_lo > 0.0) {
      buy_weight += probabilities[s];
      continue;
    }
    double d = increment_of_control(-z, battery);
    if (d < d_hi) kinks.push_back({d, probabilities[s]});
  }
  if (d_lo < 0.0 && 0.0 < d_hi) kinks.push_back({0.0, 0.0});
  std::sort(kinks.begin(), kinks.end(), [](const Kink& a, const Kink& b) { return a.d < b.d; });

  std::vector<ConvexPwl::Segment> segs;
  segs.reserve(kinks.size() + 1);
  double pos = d_lo;
  auto emit = [&](double to) {
    if (to <= pos) return;
    double mid = 0.5 * (pos + to);
    double du = mid >= 0.0 ? battery.capacity_kwh / battery.rho_c
                           : battery.rho_d * battery.capacity_kwh;
    double price = buy_weight * buy + (1.0 - buy_weight) * sell;
    segs.push_back({to - pos, du * price});
    pos = to;
  };
  for (const auto& k : kinks) {
    emit(k.d);
    buy_weight = std::min(1.0, buy_weight + k.weight);
  }
  emit(d_hi);
  return ConvexPwl(d_lo, start_value, std::move(segs));
}

LookaheadSolution solve_lookahead(const LookaheadProblem& p) {
  p.validate();
  const std::size_t n = p.scenarios.size();
  std::vector<double> column(n);
  auto stage = [&](int tau) {
    for (std::size_t s = 0; s < n; ++s) column[s] = p.scenarios[s][static_cast<std::size_t>(tau)];
    int slot = p.start_step + tau;
    return stage_cost_in_increment(column, p.probabilities, p.tariff->buy(slot),
                                   p.tariff->sell(slot), p.battery);
  };

  // V(y): optimal cost-to-go from SoC y at step tau, on [0, 1].
  ConvexPwl value = ConvexPwl::constant(0.0, 1.0, 0.0);
  for (int tau = p.horizon - 1; tau >= 1; --tau) {
    ConvexPwl g = stage(tau);
    value = inf_convolution(value, g.reflected()).restricted(0.0, 1.0);
  }

  // First step: minimise g_0(d) + V(x0 + d) over feasible increments.
  const double x0 = p.initial_soc;
  ConvexPwl g0 = stage(0);
  const double lo = std::max(g0.start(), -x0);
  const double hi = std::min(g0.end(), 1.0 - x0);
  std::vector<double> candidates{lo, hi};
  if (lo <= 0.0 && 0.0 <= hi) candidates.push_back(0.0);
  for (double k : g0.knots())
    if (k > lo && k < hi) candidates.push_back(k);
  for (double k : value.knots())
    if (k - x0 > lo && k - x0 < hi) candidates.push_back(k - x0);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::vector<double> phi(candidates.size());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double y = std::clamp(x0 + candidates[i], 0.0, 1.0);
    phi[i] = g0(candidates[i]) + value(y);
    best = std::min(best, phi[i]);
  }
  const double tol = 1e-12 * (1.0 + std::abs(best));
  double arg_lo = std::numeric_limits<double>::infinity();
  double arg_hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (phi[i] <= best + tol) {
      arg_lo = std::min(arg_lo, candidates[i]);
      arg_hi = std::max(arg_hi, candidates[i]);
    }
  // Argmin set is [arg_lo, arg_hi]; take the point closest to zero.
  double d_star = arg_lo > 0.0 ? arg_lo : (arg_hi < 0.0 ? arg_hi : 0.0);
  double u = control_of_increment(d_star, p.battery);
  return {u, best};
}

}  // namespace emsx
