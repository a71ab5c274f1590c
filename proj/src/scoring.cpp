#include "emsx/scoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "emsx/error.hpp"

namespace emsx {

double gain(const std::map<std::string, double>& controller_costs,
            const std::map<std::string, double>& dummy_costs) {
  if (controller_costs.empty()) throw ValidationError("gain over an empty week set");
  if (controller_costs.size() != dummy_costs.size())
    throw ValidationError("gain: controller and dummy week sets differ");
  double sum = 0.0;
  for (const auto& [week, cost] : controller_costs) {
    auto it = dummy_costs.find(week);
    if (it == dummy_costs.end()) throw ValidationError("gain: no dummy cost for week " + week);
    sum += it->second - cost;
  }
  return sum / static_cast<double>(controller_costs.size());
}

std::optional<double> site_score(double gain, double upper) {
  if (!(upper > kMinimumGainBound)) return std::nullopt;
  return gain / upper;
}

double aggregate_score(const std::vector<std::optional<double>>& site_scores) {
  double sum = 0.0;
  int n = 0;
  for (const auto& s : site_scores)
    if (s) {
      sum += *s;
      ++n;
    }
  if (n == 0) throw ValidationError("no site has a defined score");
  return sum / n;
}

double rmse(const SiteRecord& rec) {
  const SeriesStore& s = *rec.series;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& w : s.observed) {
    lo = std::min(lo, w.net_demand());
    hi = std::max(hi, w.net_demand());
  }
  if (!(hi > lo)) throw DomainError("RMSE undefined for constant net demand");
  const double range = hi - lo;
  const std::size_t rows = s.rows();
  const std::size_t width = static_cast<std::size_t>(s.width);
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    const Uncertainty* fc = s.forecast_row(r);
    for (std::size_t j = 0; j < width && r + j < rows; ++j) {
      double e = (fc[j].net_demand() - s.observed[r + j].net_demand()) / range;
      sum += e * e;
      ++pairs;
    }
  }
  return std::sqrt(sum / static_cast<double>(pairs));
}

ScoreReport build_score_report(const std::vector<SimResult>& results,
                               const std::vector<WeekBound>& bounds) {
  std::map<std::string, std::map<std::string, double>> dummy, lower;
  for (const auto& b : bounds) {
    dummy[b.site_id][b.week_id] = b.dummy_cost;
    lower[b.site_id][b.week_id] = b.anticipative_cost;
  }
  std::map<std::string, double> bound_of_site;
  for (const auto& [site, weeks] : dummy) bound_of_site[site] = gain(lower[site], weeks);

  struct Cell {
    std::map<std::string, double> costs;
    std::vector<std::string> faults;
    std::string provenance;
    double seconds = 0.0;
    int runs = 0;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;
  std::set<std::string> names;
  for (const auto& r : results) {
    Cell& c = cells[{r.controller, r.site_id}];
    names.insert(r.controller);
    if (c.provenance.empty()) c.provenance = r.provenance;
    if (r.faulted()) c.faults.push_back(r.week_id + ": " + *r.fault);
    else c.costs[r.week_id] = r.management_cost;
    c.seconds += r.mean_online_seconds;
    ++c.runs;
  }

  ScoreReport report;
  auto score_cell = [&](const std::string& name, const std::string& site,
                        const std::map<std::string, double>* costs,
                        const std::vector<std::string>& faults, const std::string& provenance) {
    SiteScore row;
    row.controller = name;
    row.site_id = site;
    row.provenance = provenance;
    auto bit = bound_of_site.find(site);
    if (bit == bound_of_site.end()) {
      row.note = "no bounds for site";
    } else if (!faults.empty()) {
      row.note = "faulted: " + faults.front();
    } else if (costs->size() != dummy[site].size()) {
      row.note = "incomplete week set";
    } else {
      row.weeks = static_cast<int>(costs->size());
      row.gain = gain(*costs, dummy[site]);
      row.gain_bound = bit->second;
      row.score = name == kAnticipativeName && row.gain_bound > kMinimumGainBound
                      ? std::optional<double>(1.0)
                      : site_score(row.gain, row.gain_bound);
      if (!row.score) row.note = "gain bound below threshold";
    }
    if (!row.score) log_warning(name + " on " + site + " excluded: " + row.note);
    report.sites.push_back(row);
  };

  for (const auto& name : names) {
    ControllerScore cs{name, std::nullopt, 0, 0.0, 0.0};
    std::vector<std::optional<double>> scores;
    double seconds = 0.0;
    int runs = 0;
    for (const auto& [site, weeks] : dummy) {
      auto it = cells.find({name, site});
      static const std::map<std::string, double> none;
      static const std::vector<std::string> no_faults;
      if (it == cells.end()) {
        score_cell(name, site, &none, no_faults, "");
      } else {
        score_cell(name, site, &it->second.costs, it->second.faults, it->second.provenance);
        seconds += it->second.seconds;
        runs += it->second.runs;
      }
      scores.push_back(report.sites.back().score);
    }
    cs.sites_scored = static_cast<int>(std::count_if(scores.begin(), scores.end(),
                                                     [](const auto& s) { return s.has_value(); }));
    if (cs.sites_scored > 0) cs.score = aggregate_score(scores);
    if (runs > 0) cs.mean_online_seconds = seconds / runs;
    report.controllers.push_back(cs);
  }

  // The anticipative oracle, for reference.
  std::vector<std::optional<double>> oracle;
  for (const auto& [site, weeks] : dummy) {
    score_cell(kAnticipativeName, site, &lower[site], {}, "");
    oracle.push_back(report.sites.back().score);
  }
  ControllerScore cs{kAnticipativeName, std::nullopt, 0, 0.0, 0.0};
  cs.sites_scored = static_cast<int>(std::count_if(oracle.begin(), oracle.end(),
                                                   [](const auto& s) { return s.has_value(); }));
  if (cs.sites_scored > 0) cs.score = aggregate_score(oracle);
  report.controllers.push_back(cs);
  return report;
}

std::string format_number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

namespace {

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string scores_csv(const ScoreReport& report) {
  std::ostringstream os;
  os << "controller,score,sites_scored\n";
  for (const auto& c : report.controllers)
    os << csv_field(c.controller) << ',' << opt(c.score) << ',' << c.sites_scored << '\n';
  return os.str();
}

std::string per_site_csv(const ScoreReport& report) {
  std::ostringstream os;
  os << "controller,site_id,weeks,gain,gain_bound,score,rmse,note,provenance\n";
  for (const auto& s : report.sites) {
    auto r = report.site_rmse.find(s.site_id);
    os << csv_field(s.controller) << ',' << csv_field(s.site_id) << ',' << s.weeks << ','
       << format_number(s.gain) << ',' << format_number(s.gain_bound) << ',' << opt(s.score)
       << ',' << (r == report.site_rmse.end() ? "" : format_number(r->second)) << ','
       << csv_field(s.note) << ',' << csv_field(s.provenance) << '\n';
  }
  return os.str();
}

std::string timing_csv(const ScoreReport& report) {
  std::ostringstream os;
  os << "controller,offline_seconds,mean_online_seconds\n";
  for (const auto& c : report.controllers)
    os << csv_field(c.controller) << ',' << format_number(c.offline_seconds) << ','
       << format_number(c.mean_online_seconds) << '\n';
  return os.str();
}

nlohmann::ordered_json report_json(const ScoreReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "emsx.score_report";
  j["version"] = 1;
  j["metadata"] = report.metadata;
  j["controllers"] = nlohmann::ordered_json::array();
  for (const auto& c : report.controllers) {
    nlohmann::ordered_json row;
    row["controller"] = c.controller;
    row["score"] = c.score ? nlohmann::ordered_json(*c.score) : nlohmann::ordered_json();
    row["sites_scored"] = c.sites_scored;
    j["controllers"].push_back(row);
  }
  j["sites"] = nlohmann::ordered_json::array();
  for (const auto& s : report.sites) {
    nlohmann::ordered_json row;
    row["controller"] = s.controller;
    row["site_id"] = s.site_id;
    row["weeks"] = s.weeks;
    row["gain"] = s.gain;
    row["gain_bound"] = s.gain_bound;
    row["score"] = s.score ? nlohmann::ordered_json(*s.score) : nlohmann::ordered_json();
    auto r = report.site_rmse.find(s.site_id);
    row["rmse"] = r == report.site_rmse.end() ? nlohmann::ordered_json() : nlohmann::ordered_json(r->second);
    if (!s.note.empty()) row["note"] = s.note;
    row["provenance"] = s.provenance;
    j["sites"].push_back(row);
  }
  return j;
}

}  // namespace emsx
