#include "emsx/scenario_model.hpp"

#include <span>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "emsx/error.hpp"
#include "emsx/kmeans.hpp"

namespace emsx {

namespace {

const char* day_name(std::size_t d) { return d == 0 ? "weekday" : "weekend"; }

void check_distribution(const std::vector<double>& p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(what + ": invalid probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError(what + ": probabilities sum to " +
                                                        std::to_string(sum));
}

}  // namespace

void ScenarioModel::validate() const {
  if (k < 1) throw ValidationError("scenario model: k must be >= 1");
  const std::size_t kk = static_cast<std::size_t>(k);
  for (std::size_t d = 0; d < 2; ++d) {
    const auto& m = day_types[d];
    if (m.centers.size() != kSeparatorCount || m.transitions.size() != kSeparatorCount - 1)
      throw ValidationError("scenario model: wrong number of separators");
    for (const auto& c : m.centers)
      if (c.size() != kk) throw ValidationError("scenario model: wrong number of centers");
    for (std::size_t p = 0; p < m.transitions.size(); ++p) {
      if (m.transitions[p].size() != kk * kk)
        throw ValidationError("scenario model: wrong transition matrix size");
      for (std::size_t a = 0; a < kk; ++a)
        check_distribution(std::vector<double>(m.transitions[p].begin() + static_cast<std::ptrdiff_t>(a * kk),
                                               m.transitions[p].begin() + static_cast<std::ptrdiff_t>((a + 1) * kk)),
                           std::string("scenario model ") + day_name(d) + " transition " +
                               std::to_string(p) + " row " + std::to_string(a));
    }
  }
  if (initial.size() != static_cast<std::size_t>(kCalendarKeys))
    throw ValidationError("scenario model: expected 192 initial distributions");
  for (std::size_t s = 0; s < initial.size(); ++s) {
    if (initial[s].size() != kk) throw ValidationError("scenario model: bad initial distribution");
    check_distribution(initial[s], "scenario model initial distribution " + std::to_string(s));
  }
}

nlohmann::json ScenarioModel::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "emsx.scenario_model";
  j["version"] = 1;
  j["k"] = k;
  j["separators"] = kSeparators;
  for (std::size_t d = 0; d < 2; ++d) {
    j["day_types"][day_name(d)]["centers"] = day_types[d].centers;
    j["day_types"][day_name(d)]["transitions"] = day_types[d].transitions;
  }
  j["initial"] = initial;
  return nlohmann::json(j);
}

ScenarioModel ScenarioModel::from_json(const nlohmann::json& j) {
  ScenarioModel m;
  try {
    if (j.at("format") != "emsx.scenario_model" || j.at("version") != 1)
      throw ValidationError("not a version 1 scenario model");
    m.k = j.at("k").get<int>();
    if (j.at("separators").get<std::vector<int>>() !=
        std::vector<int>(kSeparators.begin(), kSeparators.end()))
      throw ValidationError("scenario model uses different separators");
    for (std::size_t d = 0; d < 2; ++d) {
      const auto& dj = j.at("day_types").at(day_name(d));
      m.day_types[d].centers = dj.at("centers").get<std::vector<std::vector<double>>>();
      m.day_types[d].transitions = dj.at("transitions").get<std::vector<std::vector<double>>>();
    }
    m.initial = j.at("initial").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("scenario model: ") + e.what());
  }
  m.validate();
  return m;
}

void ScenarioModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

ScenarioModel ScenarioModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArtifactMissing("missing scenario model " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

ScenarioModel fit_scenario_model(const CalibrationSet& calibration,
                                 const ScenarioFitOptions& options) {
  if (calibration.size() < 2)
    throw ValidationError("scenario model needs at least 2 calibration weeks");
  const std::size_t k = static_cast<std::size_t>(options.k);
  constexpr int T = Chronicle::kSteps;
  constexpr int max_lead = kSeparators.back();

  // errors[day][sep] for every t with the separator inside the week; the
  // chained samples (all separators available) come first in the same order.
  std::array<std::array<std::vector<double>, kSeparatorCount>, 2> errors;
  struct Chain {
    std::size_t day;
    int key;
    std::array<double, kSeparatorCount> e;
  };
  std::vector<Chain> chains;
  for (const auto& week : calibration.weeks()) {
    for (int t = 0; t < T; ++t) {
      StepInfo info = week.step(t);
      Calendar cal = info.calendar();
      std::size_t day = cal.day_type == DayType::weekend ? 1 : 0;
      Chain chain{day, calendar_key(cal), {}};
      bool complete = true;
      for (std::size_t s = 0; s < kSeparatorCount; ++s) {
        int j = kSeparators[s];
        if (t + j > T || j > info.forecast_size()) {
          complete = false;
          continue;
        }
        double e = week.realized_net_demand(t + j) - info.forecast_net_demand(j);
        errors[day][s].push_back(e);
        chain.e[s] = e;
      }
      if (complete && t + max_lead <= T) chains.push_back(chain);
    }
  }

  ScenarioModel model;
  model.k = options.k;
  for (std::size_t d = 0; d < 2; ++d) {
    auto& dm = model.day_types[d];
    for (std::size_t s = 0; s < kSeparatorCount; ++s) {
      if (errors[d][s].empty())
        throw ValidationError(std::string("scenario model: no ") + day_name(d) +
                              " calibration data");
      KMeansOptions ko;
      ko.k = options.k;
      ko.seed = derive_seed(options.seed, d * 16 + s);
      KMeansResult km = kmeans_1d(errors[d][s], ko);
      if (km.centers.size() == 1) {
        dm.centers.push_back(std::vector<double>(k, km.centers[0]));
      } else if (km.centers.size() < k) {
        throw DegenerateClusterError(
            std::string("scenario model: only ") + std::to_string(km.centers.size()) +
            " distinct " + day_name(d) + " errors at lead " + std::to_string(kSeparators[s]) +
            " for k = " + std::to_string(k) + "; reduce k");
      } else {
        dm.centers.push_back(km.centers);
      }
    }
    dm.transitions.assign(kSeparatorCount - 1,
                          std::vector<double>(k * k, options.transition_pseudo_count));
  }

  std::vector<std::vector<double>> initial_counts(kCalendarKeys, std::vector<double>(k, 0.0));
  for (const auto& c : chains) {
    auto& dm = model.day_types[c.day];
    std::size_t prev = nearest_center(dm.centers[0], c.e[0]);
    initial_counts[static_cast<std::size_t>(c.key)][prev] += 1.0;
    for (std::size_t s = 1; s < kSeparatorCount; ++s) {
      std::size_t next = nearest_center(dm.centers[s], c.e[s]);
      dm.transitions[s - 1][prev * k + next] += 1.0;
      prev = next;
    }
  }
  for (auto& dm : model.day_types)
    for (auto& m : dm.transitions)
      for (std::size_t a = 0; a < k; ++a) {
        double row = 0.0;
        for (std::size_t b = 0; b < k; ++b) row += m[a * k + b];
        for (std::size_t b = 0; b < k; ++b) m[a * k + b] /= row;
      }
  for (auto& counts : initial_counts) {
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    if (total == 0.0) {
      counts.assign(k, 1.0 / static_cast<double>(k));
    } else {
      for (auto& v : counts) v /= total;
    }
  }
  model.initial = std::move(initial_counts);
  model.validate();
  return model;
}

std::vector<double> interpolate_separator_errors(const std::array<double, kSeparatorCount>& at_sep,
                                                 int leads) {
  std::vector<double> out(static_cast<std::size_t>(leads));
  for (int j = 1; j <= leads; ++j) {
    double v;
    if (j <= kSeparators.front()) {
      v = at_sep.front();
    } else if (j >= kSeparators.back()) {
      v = at_sep.back();
    } else {
      std::size_t s = 1;
      while (kSeparators[s] < j) ++s;
      int a = kSeparators[s - 1], b = kSeparators[s];
      double w = static_cast<double>(j - a) / static_cast<double>(b - a);
      v = (1.0 - w) * at_sep[s - 1] + w * at_sep[s];
    }
    out[static_cast<std::size_t>(j - 1)] = v;
  }
  return out;
}

std::vector<Scenario> sample_scenarios(const ScenarioModel& model, const StepInfo& info, int n,
                                       RandomStream& rng) {
  if (n < 1) throw DomainError("scenario count must be >= 1");
  const Calendar cal = info.calendar();
  const auto& dm = model.for_day(cal.day_type);
  const auto& init = model.initial[static_cast<std::size_t>(calendar_key(cal))];
  const std::size_t k = static_cast<std::size_t>(model.k);
  const int leads = info.forecast_size();

  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(n));
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::array<double, kSeparatorCount> err{};
    std::size_t cluster = rng.categorical(init);
    double prob = init[cluster];
    err[0] = dm.centers[0][cluster];
    for (std::size_t s = 1; s < kSeparatorCount; ++s) {
      std::span<const double> row(dm.transitions[s - 1].data() + cluster * k, k);
      std::size_t next = rng.categorical(row);
      prob *= row[next];
      cluster = next;
      err[s] = dm.centers[s][cluster];
    }
    auto errors = interpolate_separator_errors(err, leads);
    Scenario sc{std::vector<double>(static_cast<std::size_t>(leads)), prob};
    for (int j = 1; j <= leads; ++j)
      sc.net_demand[static_cast<std::size_t>(j - 1)] =
          info.forecast_net_demand(j) + errors[static_cast<std::size_t>(j - 1)];
    total += prob;
    out.push_back(std::move(sc));
  }
  for (auto& sc : out) sc.probability /= total;
  return out;
}

}  // namespace emsx
