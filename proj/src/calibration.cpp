#include "emsx/calibration.hpp"

#include <cstdio>
#include <cmath>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "emsx/error.hpp"
#include "emsx/kmeans.hpp"
#include "emsx/rng.hpp"

namespace emsx {

namespace {

DiscreteDistribution cluster_distribution(std::span<const double> samples, int k,
                                          std::uint64_t seed) {
  KMeansOptions ko;
  ko.k = k;
  ko.seed = seed;
  KMeansResult km = kmeans_1d(samples, ko);
  DiscreteDistribution d;
  d.values = km.centers;
  for (std::size_t c : km.counts)
    d.probabilities.push_back(static_cast<double>(c) / static_cast<double>(samples.size()));
  return d;
}

void check_distribution(const DiscreteDistribution& d, const std::string& what) {
  if (d.values.empty() || d.values.size() != d.probabilities.size())
    throw ValidationError(what + ": malformed distribution");
  double sum = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (!std::isfinite(d.values[i]) || !(d.probabilities[i] >= 0.0))
      throw ValidationError(what + ": invalid support point");
    sum += d.probabilities[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError(what + ": probabilities sum to " + std::to_string(sum));
}

nlohmann::json distribution_json(const DiscreteDistribution& d) {
  return {{"values", d.values}, {"probabilities", d.probabilities}};
}

DiscreteDistribution distribution_from_json(const nlohmann::json& j) {
  return {j.at("values").get<std::vector<double>>(),
          j.at("probabilities").get<std::vector<double>>()};
}

std::string slot_name(std::size_t key) {
  Calendar c{static_cast<int>(key % kStepsPerDay),
             key >= static_cast<std::size_t>(kStepsPerDay) ? DayType::weekend : DayType::weekday};
  int minutes = c.quarter_hour_of_day * 15;
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%s %02d:%02d",
                c.day_type == DayType::weekend ? "weekend" : "weekday", minutes / 60, minutes % 60);
  return buf;
}

template <typename Model>
void save_json(const Model& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << m.to_json().dump() << '\n';
}

nlohmann::json load_json(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ArtifactMissing(std::string("missing ") + what + " " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return j;
}

}  // namespace

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += values[i] * probabilities[i];
  return m;
}

void NoiseModel::validate() const {
  if (slots.size() != static_cast<std::size_t>(kCalendarKeys))
    throw ValidationError("noise model needs 192 slots");
  for (std::size_t s = 0; s < slots.size(); ++s)
    check_distribution(slots[s], "noise model slot " + slot_name(s));
}

nlohmann::json NoiseModel::to_json() const {
  nlohmann::json j;
  j["format"] = "emsx.noise_model";
  j["version"] = 1;
  j["slots"] = nlohmann::json::array();
  for (const auto& d : slots) j["slots"].push_back(distribution_json(d));
  return j;
}

NoiseModel NoiseModel::from_json(const nlohmann::json& j) {
  NoiseModel m;
  try {
    if (j.at("format") != "emsx.noise_model" || j.at("version") != 1)
      throw ValidationError("not a version 1 noise model");
    for (const auto& s : j.at("slots")) m.slots.push_back(distribution_from_json(s));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("noise model: ") + e.what());
  }
  m.validate();
  return m;
}

void NoiseModel::save(const std::filesystem::path& path) const { save_json(*this, path); }
NoiseModel NoiseModel::load(const std::filesystem::path& path) {
  return from_json(load_json(path, "noise model"));
}

NoiseModel fit_noise_model(const CalibrationSet& calibration, const CalibrationOptions& options) {
  std::vector<std::vector<double>> samples(kCalendarKeys);
  for (const auto& week : calibration.weeks())
    for (int t = 0; t < Chronicle::kSteps; ++t)
      samples[static_cast<std::size_t>(calendar_key(calendar_of_slot(t)))].push_back(
          week.realized_net_demand(t + 1));
  NoiseModel m;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    if (samples[s].empty())
      throw ValidationError("noise model: insufficient data for slot " + slot_name(s));
    m.slots.push_back(cluster_distribution(samples[s], options.k, derive_seed(options.seed, static_cast<std::uint64_t>(s))));
  }
  m.validate();
  return m;
}

double ArModel::predict(int t, std::span<const double> lags) const {
  const ArSlot& s = at_step(t);
  double z = s.intercept;
  for (std::size_t j = 0; j < s.coefficients.size(); ++j) z += s.coefficients[j] * lags[j];
  return z;
}

void ArModel::validate() const {
  if (order < 1) throw ValidationError("AR model order must be >= 1");
  if (slots.size() != static_cast<std::size_t>(kCalendarKeys))
    throw ValidationError("AR model needs 192 slots");
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].coefficients.size() != static_cast<std::size_t>(order))
      throw ValidationError("AR model slot " + slot_name(s) + ": wrong coefficient count");
    for (double a : slots[s].coefficients)
      if (!std::isfinite(a)) throw ValidationError("AR model: non-finite coefficient");
    if (!std::isfinite(slots[s].intercept)) throw ValidationError("AR model: non-finite intercept");
    check_distribution(slots[s].residuals, "AR model residuals " + slot_name(s));
  }
}

nlohmann::json ArModel::to_json() const {
  nlohmann::json j;
  j["format"] = "emsx.ar_model";
  j["version"] = 1;
  j["order"] = order;
  j["slots"] = nlohmann::json::array();
  for (const auto& s : slots)
    j["slots"].push_back({{"coefficients", s.coefficients},
                          {"intercept", s.intercept},
                          {"residuals", distribution_json(s.residuals)}});
  return j;
}

ArModel ArModel::from_json(const nlohmann::json& j) {
  ArModel m;
  try {
    if (j.at("format") != "emsx.ar_model" || j.at("version") != 1)
      throw ValidationError("not a version 1 AR model");
    m.order = j.at("order").get<int>();
    for (const auto& s : j.at("slots"))
      m.slots.push_back({s.at("coefficients").get<std::vector<double>>(),
                         s.at("intercept").get<double>(),
                         distribution_from_json(s.at("residuals"))});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("AR model: ") + e.what());
  }
  m.validate();
  return m;
}

void ArModel::save(const std::filesystem::path& path) const { save_json(*this, path); }
ArModel ArModel::load(const std::filesystem::path& path) {
  return from_json(load_json(path, "AR model"));
}

OlsFit ordinary_least_squares(const std::vector<std::vector<double>>& regressors,
                              std::span<const double> y, double ridge) {
  if (regressors.size() != y.size() || y.empty())
    throw DomainError("least squares: regressor and target sizes differ");
  const Eigen::Index p = static_cast<Eigen::Index>(regressors.front().size());
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd row(p + 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (Eigen::Index c = 0; c < p; ++c) row(c) = regressors[i][static_cast<std::size_t>(c)];
    row(p) = 1.0;
    normal.noalias() += row * row.transpose();
    rhs += row * y[i];
  }
  OlsFit fit;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  Eigen::VectorXd beta;
  if (lu.rank() == p + 1) {
    beta = lu.solve(rhs);
  } else {
    fit.used_ridge = true;
    normal.diagonal().array() += ridge;
    beta = normal.ldlt().solve(rhs);
  }
  for (Eigen::Index c = 0; c < p; ++c) fit.coefficients.push_back(beta(c));
  fit.intercept = beta(p);
  return fit;
}

ArModel fit_ar_model(const CalibrationSet& calibration, const ArFitOptions& options) {
  if (options.order < 1 || options.order > kStepsPerDay - 1)
    throw ValidationError("AR order must lie in [1, 95]");
  const std::size_t k = static_cast<std::size_t>(options.order);
  std::vector<std::vector<std::vector<double>>> regressors(kCalendarKeys);
  std::vector<std::vector<double>> targets(kCalendarKeys);
  for (const auto& week : calibration.weeks()) {
    for (int t = 0; t < Chronicle::kSteps; ++t) {
      std::size_t key = static_cast<std::size_t>(calendar_key(calendar_of_slot(t)));
      std::vector<double> lags(k);
      for (std::size_t j = 0; j < k; ++j)
        lags[j] = week.realized_net_demand(t - static_cast<int>(j));
      regressors[key].push_back(std::move(lags));
      targets[key].push_back(week.realized_net_demand(t + 1));
    }
  }

  ArModel m;
  m.order = options.order;
  const std::size_t min_samples = static_cast<std::size_t>(options.min_samples_per_parameter) * (k + 1);
  bool warned = false;
  for (std::size_t s = 0; s < static_cast<std::size_t>(kCalendarKeys); ++s) {
    if (targets[s].size() < min_samples)
      throw ValidationError("AR model: slot " + slot_name(s) + " has " +
                            std::to_string(targets[s].size()) + " samples, need " +
                            std::to_string(min_samples));
    OlsFit fit = ordinary_least_squares(regressors[s], targets[s], options.ridge);
    if (fit.used_ridge && !warned) {
      log_warning("AR model: singular normal equations (first at slot " + slot_name(s) +
                  "), using ridge " + std::to_string(options.ridge));
      warned = true;
    }
    std::vector<double> residuals(targets[s].size());
    for (std::size_t i = 0; i < residuals.size(); ++i) {
      double pred = fit.intercept;
      for (std::size_t j = 0; j < k; ++j) pred += fit.coefficients[j] * regressors[s][i][j];
      residuals[i] = targets[s][i] - pred;
    }
    m.slots.push_back({fit.coefficients, fit.intercept,
                       cluster_distribution(residuals, options.k, derive_seed(options.seed, static_cast<std::uint64_t>(s)))});
  }
  m.validate();
  return m;
}

}  // namespace emsx
