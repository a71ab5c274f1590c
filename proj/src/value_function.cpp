#include "emsx/value_function.hpp"

#include <cstdio>
#include <limits>
#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "emsx/error.hpp"
#include "emsx/rng.hpp"

namespace emsx {

namespace {

constexpr char kMagic[8] = {'E', 'M', 'S', 'X', 'V', 'F', '0', '1'};
constexpr std::size_t kMaxOrder = 6;

struct AxisCell {
  std::size_t i;
  double w;  // weight of i + 1
};

AxisCell locate(const std::vector<double>& axis, double v) {
  if (axis.size() == 1 || v <= axis.front()) return {0, 0.0};
  if (v >= axis.back()) return {axis.size() - 2, 1.0};
  std::size_t i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), v) -
                                           axis.begin()) - 1;
  return {i, (v - axis[i]) / (axis[i + 1] - axis[i])};
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        i == n - 1 ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

std::vector<double> control_candidates(double x, const BatteryParams& battery, int points) {
  AdmissibleInterval iv = admissible_interval(x, battery);
  std::vector<double> out{iv.lo, iv.hi, 0.0};
  for (double u : linspace(battery.max_discharge(), battery.max_charge(), points))
    if (u > iv.lo && u < iv.hi) out.push_back(u);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t tie_broken_argmin(std::span<const double> controls, std::span<const double> values) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) best = std::min(best, v);
  const double tol = 1e-12 * (1.0 + std::abs(best));
  std::size_t pick = values.size();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > best + tol) continue;
    if (pick == values.size()) {
      pick = i;
      continue;
    }
    double a = std::abs(controls[i]), b = std::abs(controls[pick]);
    if (a < b || (a == b && controls[i] < controls[pick])) pick = i;
  }
  return pick;
}

ValueFunction::ValueFunction(std::string kind, int steps, std::vector<double> soc_axis,
                             std::vector<std::vector<double>> lag_axes)
    : kind_(std::move(kind)),
      steps_(steps),
      soc_axis_(std::move(soc_axis)),
      lag_axes_(std::move(lag_axes)) {
  if (steps_ < 1) throw DomainError("value function needs at least one step");
  if (soc_axis_.size() < 2) throw DomainError("SoC axis needs at least 2 points");
  if (lag_axes_.size() > kMaxOrder) throw DomainError("too many lag axes");
  slice_size_ = soc_axis_.size();
  for (const auto& a : lag_axes_) {
    if (a.empty()) throw DomainError("empty lag axis");
    slice_size_ *= a.size();
  }
  values_.assign(slice_size_ * static_cast<std::size_t>(steps_ + 1), 0.0);
}

std::size_t ValueFunction::index(std::size_t soc_i, std::span<const std::size_t> lag_i) const {
  std::size_t flat = 0;
  for (std::size_t d = lag_axes_.size(); d-- > 0;) flat = flat * lag_axes_[d].size() + lag_i[d];
  return flat * soc_axis_.size() + soc_i;
}

double ValueFunction::operator()(int t, double x, std::span<const double> lags) const {
  const std::size_t dims = 1 + lag_axes_.size();
  std::array<AxisCell, kMaxOrder + 1> cells{};
  std::array<std::size_t, kMaxOrder + 1> strides{};
  cells[0] = locate(soc_axis_, x);
  strides[0] = 1;
  std::size_t stride = soc_axis_.size();
  for (std::size_t d = 0; d < lag_axes_.size(); ++d) {
    cells[d + 1] = locate(lag_axes_[d], lags[d]);
    strides[d + 1] = stride;
    stride *= lag_axes_[d].size();
  }
  const double* slice = values_.data() + static_cast<std::size_t>(t) * slice_size_;
  double out = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      bool upper = (corner >> d) & 1U;
      double w = upper ? cells[d].w : 1.0 - cells[d].w;
      if (w == 0.0) {
        weight = 0.0;
        break;
      }
      weight *= w;
      flat += (cells[d].i + (upper ? 1 : 0)) * strides[d];
    }
    if (weight != 0.0) out += weight * slice[flat];
  }
  return out;
}

void ValueFunction::save(const std::filesystem::path& path) const {
  static_assert(std::endian::native == std::endian::little, "value-function files are little-endian");
  nlohmann::ordered_json header;
  header["format"] = "emsx.value_function";
  header["version"] = 1;
  header["kind"] = kind_;
  header["t_range"] = {0, steps_};
  header["soc_axis"] = soc_axis_;
  header["lag_axes"] = lag_axes_;
  header["provenance"] = provenance_;
  std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(values_.size() * sizeof(double)));
}

ValueFunction ValueFunction::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactMissing("missing value function " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || len > (1u << 30))
    throw ValidationError(path.string() + ": not a value-function file");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  ValueFunction v;
  try {
    auto header = nlohmann::json::parse(text);
    if (header.at("version") != 1) throw ValidationError(path.string() + ": unsupported version");
    v = ValueFunction(header.at("kind").get<std::string>(), header.at("t_range").at(1).get<int>(),
                      header.at("soc_axis").get<std::vector<double>>(),
                      header.at("lag_axes").get<std::vector<std::vector<double>>>());
    v.provenance_ = header.at("provenance");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  in.read(reinterpret_cast<char*>(v.values_.data()),
          static_cast<std::streamsize>(v.values_.size() * sizeof(double)));
  if (!in) throw ValidationError(path.string() + ": truncated value table");
  return v;
}

std::string economics_fingerprint(const BatteryParams& battery, const Tariff& tariff) {
  std::string bytes;
  char buf[64];
  auto add = [&](double v) {
    auto r = std::to_chars(buf, buf + sizeof(buf), v);
    bytes.append(buf, r.ptr);
    bytes += ';';
  };
  add(battery.capacity_kwh);
  add(battery.max_power_kw);
  add(battery.rho_c);
  add(battery.rho_d);
  for (double v : tariff.buy_prices()) add(v);
  for (double v : tariff.sell_prices()) add(v);
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

namespace {

double expected_stage_cost(double u, const DiscreteDistribution& d, double buy, double sell,
                           double shift = 0.0) {
  double c = 0.0;
  for (std::size_t s = 0; s < d.values.size(); ++s)
    c += d.probabilities[s] * stage_cost(u, d.values[s] + shift, buy, sell);
  return c;
}

}  // namespace

double sdp_control(int t, double x, const ValueFunction& v, const NoiseModel& noise,
                   const BatteryParams& battery, const Tariff& tariff, int control_points) {
  const auto controls = control_candidates(x, battery, control_points);
  const auto& dist = noise.at_step(t);
  std::vector<double> q(controls.size());
  for (std::size_t i = 0; i < controls.size(); ++i)
    q[i] = expected_stage_cost(controls[i], dist, tariff.buy(t), tariff.sell(t)) +
           v(t + 1, dynamics(x, controls[i], battery));
  return controls[tie_broken_argmin(controls, q)];
}

ValueFunction compute_value_functions_sdp(const NoiseModel& noise, const BatteryParams& battery,
                                          const Tariff& tariff, const DpOptions& options) {
  battery.validate();
  ValueFunction v("sdp", options.steps, linspace(0.0, 1.0, options.grid.soc_points), {});
  for (int t = options.steps - 1; t >= 0; --t) {
    for (std::size_t i = 0; i < v.soc_axis().size(); ++i) {
      const double x = v.soc_axis()[i];
      const auto controls = control_candidates(x, battery, options.grid.control_points);
      const auto& dist = noise.at_step(t);
      double best = std::numeric_limits<double>::infinity();
      for (double u : controls) {
        double q = expected_stage_cost(u, dist, tariff.buy(t), tariff.sell(t)) +
                   v(t + 1, dynamics(x, u, battery));
        best = std::min(best, q);
      }
      v.at(t, i) = i > 0 ? std::min(best, v.at(t, i - 1)) : best;
    }
  }
  v.provenance()["economics"] = economics_fingerprint(battery, tariff);
  return v;
}

double sdpar_control(int t, double x, std::span<const double> lags, const ValueFunction& v,
                     const ArModel& ar, const BatteryParams& battery, const Tariff& tariff,
                     int control_points) {
  const std::size_t k = static_cast<std::size_t>(ar.order);
  const auto& slot = ar.at_step(t);
  const double predicted = ar.predict(t, lags);
  const auto controls = control_candidates(x, battery, control_points);
  std::array<double, kMaxOrder> next_lags{};
  for (std::size_t j = 1; j < k; ++j) next_lags[j] = lags[j - 1];
  std::vector<double> q(controls.size());
  for (std::size_t i = 0; i < controls.size(); ++i) {
    const double u = controls[i];
    const double y = dynamics(x, u, battery);
    double total = 0.0;
    for (std::size_t s = 0; s < slot.residuals.values.size(); ++s) {
      const double z = predicted + slot.residuals.values[s];
      next_lags[0] = z;
      total += slot.residuals.probabilities[s] *
               (stage_cost(u, z, tariff.buy(t), tariff.sell(t)) +
                v(t + 1, y, std::span<const double>(next_lags.data(), k)));
    }
    q[i] = total;
  }
  return controls[tie_broken_argmin(controls, q)];
}

ValueFunction compute_value_functions_sdpar(const ArModel& ar, const BatteryParams& battery,
                                            const Tariff& tariff, double lag_min, double lag_max,
                                            const DpOptions& options) {
  battery.validate();
  if (!(lag_max >= lag_min)) throw DomainError("lag range is empty");
  if (static_cast<std::size_t>(ar.order) > kMaxOrder) throw DomainError("AR order too large");
  const std::size_t k = static_cast<std::size_t>(ar.order);
  std::vector<double> lag_axis = lag_max > lag_min
                                     ? linspace(lag_min, lag_max, options.grid.lag_points)
                                     : std::vector<double>{lag_min};
  ValueFunction v("sdp-ar", options.steps, linspace(0.0, 1.0, options.grid.soc_points),
                  std::vector<std::vector<double>>(k, lag_axis));
  const std::size_t nx = v.soc_axis().size();
  const std::size_t nz = lag_axis.size();
  std::size_t lag_states = 1;
  for (std::size_t j = 0; j < k; ++j) lag_states *= nz;

  std::vector<double> lags(k);
  std::array<double, kMaxOrder> next_lags{};
  for (int t = options.steps - 1; t >= 0; --t) {
    const auto& slot = ar.at_step(t);
    const double buy = tariff.buy(t), sell = tariff.sell(t);
    for (std::size_t ls = 0; ls < lag_states; ++ls) {
      std::size_t rem = ls;
      for (std::size_t j = 0; j < k; ++j) {
        lags[j] = lag_axis[rem % nz];
        rem /= nz;
      }
      const double predicted = ar.predict(t, lags);
      for (std::size_t j = 1; j < k; ++j) next_lags[j] = lags[j - 1];
      for (std::size_t i = 0; i < nx; ++i) {
        const double x = v.soc_axis()[i];
        const auto controls = control_candidates(x, battery, options.grid.control_points);
        double best = std::numeric_limits<double>::infinity();
        for (double u : controls) {
          const double y = dynamics(x, u, battery);
          double total = 0.0;
          for (std::size_t s = 0; s < slot.residuals.values.size(); ++s) {
            const double z = predicted + slot.residuals.values[s];
            next_lags[0] = z;
            total += slot.residuals.probabilities[s] *
                     (stage_cost(u, z, buy, sell) +
                      v(t + 1, y, std::span<const double>(next_lags.data(), k)));
          }
          best = std::min(best, total);
        }
        v.at(t, ls * nx + i) = i > 0 ? std::min(best, v.at(t, ls * nx + i - 1)) : best;
      }
    }
  }
  v.provenance()["economics"] = economics_fingerprint(battery, tariff);
  return v;
}

}  // namespace emsx
