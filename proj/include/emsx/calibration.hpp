#pragma once

// Offline calibration for the cost-to-go controllers: discrete net-demand
// distributions (SDP) and slot-wise autoregressive models with discrete
// residuals (SDP-AR). Both are keyed by (quarter-hour-of-day, day type) of
// the interval on which the net demand materialises.

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "emsx/chronicle.hpp"

namespace emsx {

struct DiscreteDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;

  double mean() const;
};

struct CalibrationOptions {
  int k = 10;  // support size
  std::uint64_t seed = 0;
};

struct NoiseModel {
  std::vector<DiscreteDistribution> slots;  // [calendar_key]

  /// Distribution of the net demand realised over interval [t, t+1).
  const DiscreteDistribution& at_step(int t) const {
    return slots[static_cast<std::size_t>(calendar_key(calendar_of_slot(t)))];
  }

  void validate() const;
  nlohmann::json to_json() const;
  static NoiseModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static NoiseModel load(const std::filesystem::path& path);
};

/// K-means on the net demand observed at each slot; probabilities are the
/// cluster shares. Throws ValidationError naming a slot without data.
NoiseModel fit_noise_model(const CalibrationSet& calibration,
                           const CalibrationOptions& options = {});

struct ArSlot {
  std::vector<double> coefficients;  // alpha^0 .. alpha^{k-1}, applied to z_t .. z_{t-k+1}
  double intercept = 0.0;
  DiscreteDistribution residuals;
};

struct ArModel {
  int order = 1;
  std::vector<ArSlot> slots;  // [calendar_key]

  /// Model of z_{t+1} given z_t, ..., z_{t-k+1}.
  const ArSlot& at_step(int t) const {
    return slots[static_cast<std::size_t>(calendar_key(calendar_of_slot(t)))];
  }
  double predict(int t, std::span<const double> lags) const;

  void validate() const;
  nlohmann::json to_json() const;
  static ArModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static ArModel load(const std::filesystem::path& path);
};

struct ArFitOptions {
  int order = 1;
  int k = 10;
  std::uint64_t seed = 0;
  /// Minimum samples per slot, as a multiple of (order + 1).
  int min_samples_per_parameter = 10;
  double ridge = 1e-8;
};

struct OlsFit {
  std::vector<double> coefficients;  // one per regressor column
  double intercept = 0.0;
  bool used_ridge = false;
};

/// Least squares of y on (x_1 .. x_p, 1) via the normal equations. Falls back
/// to ridge regularisation `ridge` when the system is singular.
OlsFit ordinary_least_squares(const std::vector<std::vector<double>>& regressors,
                              std::span<const double> y, double ridge = 1e-8);

ArModel fit_ar_model(const CalibrationSet& calibration, const ArFitOptions& options = {});

}  // namespace emsx
