#include "emsx/site.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "emsx/error.hpp"

namespace emsx {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size() && std::isfinite(out);
}

void append_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string two_digits(int k) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02d", k);
  return buf;
}

std::vector<std::string> canonical_header() {
  std::vector<std::string> h{"timestamp", "pv_kwh", "demand_kwh"};
  for (int k = 1; k <= kLookaheadSteps; ++k) h.push_back("pv_fc_" + two_digits(k));
  for (int k = 1; k <= kLookaheadSteps; ++k) h.push_back("demand_fc_" + two_digits(k));
  return h;
}

// Column positions of each quantity inside a row.
struct Layout {
  std::size_t pv = 0, demand = 0;
  std::vector<std::size_t> pv_fc, demand_fc;
  std::size_t columns = 0;
};

Layout canonical_layout(const std::vector<std::string_view>& header,
                        const std::string& where) {
  auto expected = canonical_header();
  if (header.size() != expected.size())
    throw IngestError(where + ": header has " + std::to_string(header.size()) +
                      " columns, expected " + std::to_string(expected.size()));
  for (std::size_t c = 0; c < expected.size(); ++c)
    if (header[c] != expected[c])
      throw IngestError(where + ": header column " + std::to_string(c + 1) + " is '" +
                        std::string(header[c]) + "', expected '" + expected[c] + "'");
  Layout l;
  l.pv = 1;
  l.demand = 2;
  for (int k = 0; k < kLookaheadSteps; ++k) {
    l.pv_fc.push_back(3 + static_cast<std::size_t>(k));
    l.demand_fc.push_back(3 + kLookaheadSteps + static_cast<std::size_t>(k));
  }
  l.columns = expected.size();
  return l;
}

// Published benchmark files: timestamp, actual_consumption, actual_pv,
// load_00..load_95, pv_00..pv_95 (any column order).
Layout upstream_layout(const std::vector<std::string_view>& header,
                       const std::string& where) {
  auto find = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (header[c] == name) return c;
    throw IngestError(where + ": upstream header lacks column '" + name + "'");
  };
  if (header.empty() || header[0] != "timestamp")
    throw IngestError(where + ": first column must be 'timestamp'");
  Layout l;
  l.demand = find("actual_consumption");
  l.pv = find("actual_pv");
  for (int k = 0; k < kLookaheadSteps; ++k) {
    l.demand_fc.push_back(find("load_" + two_digits(k)));
    l.pv_fc.push_back(find("pv_" + two_digits(k)));
  }
  l.columns = header.size();
  return l;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

Minutes parse_timestamp(const std::string& text) {
  int y, mo, d, h, mi, s = 0;
  char sep;
  int n = std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s);
  if (n < 6 || (sep != 'T' && sep != ' ') || mo < 1 || mo > 12 || d < 1 || d > 31 ||
      h < 0 || h > 23 || mi < 0 || mi > 59 || s != 0)
    throw IngestError("malformed timestamp '" + text + "'");
  using namespace std::chrono;
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw IngestError("invalid date '" + text + "'");
  auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Minutes>(days) * 1440 + h * 60 + mi;
}

std::string format_timestamp(Minutes t) {
  using namespace std::chrono;
  Minutes days = t >= 0 ? t / 1440 : -((-t + 1439) / 1440);
  Minutes rem = t - days * 1440;
  year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:00", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(rem / 60), static_cast<int>(rem % 60));
  return buf;
}

int weekday_of(Minutes t) {
  Minutes days = t >= 0 ? t / 1440 : -((-t + 1439) / 1440);
  // 1970-01-01 was a Thursday (index 3 when Monday is 0).
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

SiteRecord make_site_record(std::string site_id, BatteryParams battery, Minutes start,
                            std::vector<Uncertainty> observed,
                            std::vector<Uncertainty> forecast) {
  battery.validate();
  if (observed.size() < static_cast<std::size_t>(kMinimumRows))
    throw IngestError("site " + site_id + ": insufficient history (" +
                      std::to_string(observed.size()) + " rows, need at least " +
                      std::to_string(kMinimumRows) + ")");
  if (forecast.size() != observed.size() * kLookaheadSteps)
    throw IngestError("site " + site_id + ": forecast block has wrong size");
  for (std::size_t r = 0; r < observed.size(); ++r) {
    const auto& w = observed[r];
    if (!std::isfinite(w.pv) || !std::isfinite(w.demand))
      throw IngestError("site " + site_id + ": non-finite observation at row " +
                        std::to_string(r));
    if (w.pv < 0.0 || w.demand < 0.0)
      throw IngestError("site " + site_id + ": negative observation at row " +
                        std::to_string(r));
  }
  for (std::size_t i = 0; i < forecast.size(); ++i)
    if (!std::isfinite(forecast[i].pv) || !std::isfinite(forecast[i].demand))
      throw IngestError("site " + site_id + ": non-finite forecast at row " +
                        std::to_string(i / kLookaheadSteps));
  auto store = std::make_shared<SeriesStore>();
  store->observed = std::move(observed);
  store->forecast = std::move(forecast);
  store->width = kLookaheadSteps;
  return SiteRecord{std::move(site_id), battery, start, std::move(store)};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

SiteRecord ingest_site(const std::filesystem::path& csv_path, SiteSchema schema) {
  const std::string where = csv_path.string();
  auto meta_path = sidecar_path(csv_path);
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw IngestError(where + ": missing sidecar " + meta_path.string());
  nlohmann::json meta;
  std::string site_id;
  BatteryParams battery{};
  try {
    meta_in >> meta;
    site_id = meta.at("site_id").get<std::string>();
    battery = {meta.at("capacity_kwh").get<double>(), meta.at("max_power_kw").get<double>(),
               meta.at("rho_c").get<double>(), meta.at("rho_d").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw IngestError(meta_path.string() + ": " + e.what());
  }
  try {
    battery.validate();
  } catch (const DomainError& e) {
    throw IngestError(meta_path.string() + ": " + e.what());
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IngestError("cannot open " + where);
  std::string line;
  if (!std::getline(in, line)) throw IngestError(where + ": empty file");
  line = strip_cr(line);
  auto header = split_commas(line);
  std::vector<std::string> header_copy(header.begin(), header.end());
  std::vector<std::string_view> header_views(header_copy.begin(), header_copy.end());
  Layout layout = schema == SiteSchema::canonical ? canonical_layout(header_views, where)
                                                  : upstream_layout(header_views, where);

  std::vector<Uncertainty> observed;
  std::vector<Uncertainty> forecast;
  Minutes start = 0, previous = 0;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const std::string row_name = where + ": data row " + std::to_string(row + 1);
    auto cells = split_commas(line);
    if (cells.size() != layout.columns)
      throw IngestError(row_name + " has " + std::to_string(cells.size()) +
                        " columns, expected " + std::to_string(layout.columns));
    Minutes ts = parse_timestamp(std::string(cells[0]));
    if (row == 0) {
      start = ts;
    } else if (ts <= previous) {
      throw IngestError(row_name + ": non-monotone timestamp " + std::string(cells[0]));
    } else if (ts != previous + 15) {
      throw IngestError(row_name + ": timestamp " + std::string(cells[0]) +
                        " breaks the 15-minute cadence");
    }
    previous = ts;
    auto cell = [&](std::size_t c) {
      double v;
      if (!parse_double(cells[c], v))
        throw IngestError(row_name + ", column '" + header_copy[c] +
                          "': missing or non-numeric value '" + std::string(cells[c]) + "'");
      return v;
    };
    Uncertainty w{cell(layout.pv), cell(layout.demand)};
    if (w.pv < 0.0)
      throw IngestError(row_name + ", column '" + header_copy[layout.pv] + "': negative value");
    if (w.demand < 0.0)
      throw IngestError(row_name + ", column '" + header_copy[layout.demand] +
                        "': negative value");
    observed.push_back(w);
    for (int k = 0; k < kLookaheadSteps; ++k)
      forecast.push_back({cell(layout.pv_fc[static_cast<std::size_t>(k)]),
                          cell(layout.demand_fc[static_cast<std::size_t>(k)])});
    ++row;
  }
  if (observed.size() < static_cast<std::size_t>(kMinimumRows))
    throw IngestError(where + ": insufficient history (" + std::to_string(observed.size()) +
                      " rows, need at least " + std::to_string(kMinimumRows) + ")");
  return make_site_record(site_id, battery, start, std::move(observed), std::move(forecast));
}

void write_site(const SiteRecord& rec, const std::filesystem::path& csv_path) {
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + csv_path.string());
  auto header = canonical_header();
  std::string buf;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) buf += ',';
    buf += header[c];
  }
  buf += '\n';
  const auto& s = *rec.series;
  for (std::size_t r = 0; r < s.rows(); ++r) {
    buf += format_timestamp(rec.timestamp(r));
    buf += ',';
    append_double(buf, s.observed[r].pv);
    buf += ',';
    append_double(buf, s.observed[r].demand);
    const Uncertainty* fc = s.forecast_row(r);
    for (int k = 0; k < kLookaheadSteps; ++k) {
      buf += ',';
      append_double(buf, fc[k].pv);
    }
    for (int k = 0; k < kLookaheadSteps; ++k) {
      buf += ',';
      append_double(buf, fc[k].demand);
    }
    buf += '\n';
    if (buf.size() > (1u << 20)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;

  nlohmann::ordered_json meta;
  meta["site_id"] = rec.site_id;
  meta["capacity_kwh"] = rec.battery.capacity_kwh;
  meta["max_power_kw"] = rec.battery.max_power_kw;
  meta["rho_c"] = rec.battery.rho_c;
  meta["rho_d"] = rec.battery.rho_d;
  std::ofstream mout(sidecar_path(csv_path));
  mout << meta.dump(2) << '\n';
}

}  // namespace emsx
