#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "emsx/error.hpp"
#include "emsx/synth.hpp"
#include "support/fixtures.hpp"

using namespace emsx;
using namespace emsx::testing;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("emsx_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Uncertainty ramp(int r) { return {0.0, 1.0 + 0.01 * r}; }

}  // namespace

TEST_CASE("timestamps") {
  CHECK(parse_timestamp("2019-01-06T00:00") == kSunday);
  CHECK(parse_timestamp("2019-01-06 00:15:00") == kSunday + 15);
  CHECK(weekday_of(kSunday) == 6);
  CHECK(weekday_of(kSunday + 1440) == 0);
  CHECK(format_timestamp(kSunday + 15) == "2019-01-06T00:15:00");
  CHECK_THROWS_AS(parse_timestamp("2019-13-06T00:00"), IngestError);
}

TEST_CASE("chronicle construction") {
  SUBCASE("8 days from Sunday give one week") {
    auto rec = make_site(8 * 96, ramp);
    auto set = build_chronicles(rec);
    REQUIRE(set.weeks.size() == 1);
    CHECK(set.weeks[0].week_id() == "2019-01-07");
  }
  SUBCASE("15 days from Sunday give two weeks") {
    auto rec = make_site(15 * 96, ramp);
    CHECK(build_chronicles(rec).weeks.size() == 2);
  }
  SUBCASE("6 days are too short for a record") {
    CHECK_THROWS_AS(make_site(6 * 96, ramp), IngestError);
  }
  SUBCASE("8 days from Tuesday give none") {
    auto rec = make_site(8 * 96, ramp, [](int, int) { return 0.0; }, {100, 40, .95, .95},
                         kSunday + 2 * 1440);
    CHECK(build_chronicles(rec).weeks.empty());
  }
  SUBCASE("start on Wednesday drops both partial weeks") {
    auto rec = make_site(16 * 96, ramp, [](int, int) { return 0.0; }, {100, 40, .95, .95},
                         kSunday + 3 * 1440);
    auto set = build_chronicles(rec);
    CHECK(set.weeks.size() == 1);
    CHECK(set.dropped_partial_weeks == 2);  // Wed-Sun head and Mon-Thu tail
  }
}

TEST_CASE("step information is aligned with realized values") {
  auto rec = make_site(15 * 96, ramp, [](int r, int k) { return 0.001 * r + k; });
  for (const auto& week : build_chronicles(rec).weeks)
    for (int t = 0; t < Chronicle::kSteps; ++t) {
      StepInfo info = week.step(t);
      REQUIRE(info.past_size() == 96);
      REQUIRE(info.forecast_size() == 96);
      CHECK(info.past(0).demand == week.realized(t).demand);
      CHECK(info.past(95).demand == week.realized(t - 95).demand);
      CHECK(info.calendar().quarter_hour_of_day == t % 96);
      CHECK((info.calendar().day_type == DayType::weekend) == (t >= 5 * 96));
      // Lead 1 predicts w_{t+1}, the interval [t, t+1).
      CHECK(info.forecast(1).demand - week.realized(t + 1).demand ==
            doctest::Approx(1.0 + 0.001 * (96 + (week.week_id() == "2019-01-07" ? 0 : 672) + t)));
    }
}

TEST_CASE("perfect forecasts are truncated at the week end") {
  auto rec = make_site(8 * 96, ramp, [](int, int) { return 5.0; });
  auto week = build_chronicles(rec).weeks[0].with_perfect_forecasts(672);
  for (int t : {0, 100, 671}) {
    StepInfo info = week.step(t);
    CHECK(info.forecast_size() == 672 - t);
    for (int j = 1; j <= info.forecast_size(); ++j)
      REQUIRE(info.forecast(j).demand == week.realized(t + j).demand);
    CHECK(info.past(0).demand == week.realized(t).demand);
  }
}

TEST_CASE("split") {
  auto rec10 = make_site(96 + 10 * 672, ramp);
  auto weeks = build_chronicles(rec10).weeks;
  REQUIRE(weeks.size() == 10);
  Split s = split_weeks(weeks, 42);
  CHECK(s.simulation.size() == 4);
  CHECK(s.calibration.size() == 6);
  for (const auto& w : s.simulation) CHECK(s.calibration.count(w) == 0);
  Split again = split_weeks(weeks, 42);
  CHECK(again.simulation == s.simulation);
  CHECK(again.calibration == s.calibration);

  auto rec5 = make_site(96 + 5 * 672, ramp);
  Split s5 = split_weeks(build_chronicles(rec5).weeks, 1);
  CHECK(s5.simulation.size() == 2);
  CHECK(s5.calibration.size() == 3);

  auto rec1 = make_site(96 + 672, ramp);
  CHECK_THROWS_AS(split_weeks(build_chronicles(rec1).weeks, 1), ValidationError);

  PartitionedSite part = apply_split(weeks, s);
  CHECK(part.calibration.size() == 6);
  CHECK(part.simulation.size() == 4);
  for (const auto& c : part.simulation) CHECK(c.role() == SplitRole::simulation);
  CHECK_THROWS_AS(CalibrationSet(part.simulation), ValidationError);
}

TEST_CASE("site record validation") {
  CHECK_THROWS_AS(make_site(700, ramp), IngestError);
  CHECK_THROWS_AS(make_site(800, [](int r) { return Uncertainty{0, r == 5 ? -1.0 : 1.0}; }),
                  IngestError);
  CHECK_THROWS_AS(
      make_site(800, [](int r) {
        return Uncertainty{0, r == 5 ? std::numeric_limits<double>::quiet_NaN() : 1.0};
      }),
      IngestError);
}

TEST_CASE("canonical files round trip bit-exactly") {
  fs::path dir = temp_dir("roundtrip");
  SynthSpec spec;
  spec.weeks = 2;
  SiteRecord rec = synth_site(spec, 11);
  CHECK(rec.theta() == 1344 + 96);
  write_site(rec, dir / "a.csv");
  SiteRecord back = ingest_site(dir / "a.csv");
  CHECK(back.site_id == rec.site_id);
  CHECK(back.theta() == rec.theta());
  write_site(back, dir / "b.csv");
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("ingest errors name row and column") {
  fs::path dir = temp_dir("ingest");
  SynthSpec spec;
  spec.weeks = 1;
  write_site(synth_site(spec, 3), dir / "s.csv");
  std::string text = slurp(dir / "s.csv");

  auto corrupt = [&](std::size_t line_no, std::size_t field, const std::string& value) {
    std::istringstream in(text);
    std::ostringstream out;
    std::string line;
    for (std::size_t i = 0; std::getline(in, line); ++i) {
      if (i == line_no) {
        std::size_t pos = 0;
        for (std::size_t f = 0; f < field; ++f) pos = line.find(',', pos) + 1;
        std::size_t end = line.find(',', pos);
        line = line.substr(0, pos) + value + line.substr(end);
      }
      out << line << '\n';
    }
    std::ofstream(dir / "bad.csv") << out.str();
    fs::copy_file(dir / "s.json", dir / "bad.json", fs::copy_options::overwrite_existing);
  };

  corrupt(10, 2, "nan");
  try {
    ingest_site(dir / "bad.csv");
    FAIL("expected an ingest error");
  } catch (const IngestError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 10") != std::string::npos);
    CHECK(msg.find("demand_kwh") != std::string::npos);
  }
  corrupt(20, 1, "-1");
  CHECK_THROWS_AS(ingest_site(dir / "bad.csv"), IngestError);
  corrupt(30, 0, "2019-01-06T07:00:00");
  CHECK_THROWS_AS(ingest_site(dir / "bad.csv"), IngestError);
  CHECK_THROWS_AS(ingest_site(dir / "missing.csv"), IngestError);
}

TEST_CASE("synthetic generator") {
  SynthSpec spec;
  spec.weeks = 1;
  SiteRecord a = synth_site(spec, 5), b = synth_site(spec, 5);
  for (std::size_t r = 0; r < a.series->rows(); ++r) {
    REQUIRE(a.series->observed[r].demand == b.series->observed[r].demand);
    REQUIRE(a.series->observed[r].demand >= 0.0);
    REQUIRE(a.series->observed[r].pv >= 0.0);
  }

  SUBCASE("zero noise gives exact forecasts") {
    spec.noise_scale = 0.0;
    spec.forecast_error_scale = 0.0;
    SiteRecord s = synth_site(spec, 9);
    const auto& st = *s.series;
    for (std::size_t r = 0; r < st.rows(); ++r)
      for (std::size_t k = 0; k < 96 && r + k < st.rows(); ++k) {
        REQUIRE(st.forecast_row(r)[k].demand == st.observed[r + k].demand);
        REQUIRE(st.forecast_row(r)[k].pv == st.observed[r + k].pv);
      }
  }
  SUBCASE("no PV") {
    spec.pv_amplitude = 0.0;
    SiteRecord s = synth_site(spec, 9);
    for (const auto& w : s.series->observed) REQUIRE(w.pv == 0.0);
  }
  SUBCASE("night PV is zero") {
    SiteRecord s = synth_site(spec, 9);
    for (std::size_t r = 0; r < s.series->rows(); ++r)
      if (r % 96 < 20) REQUIRE(s.series->observed[r].pv == 0.0);
  }
  SUBCASE("invalid parameters") {
    spec.demand_amplitude = 0.0;
    CHECK_THROWS_AS(synth_site(spec, 1), ValidationError);
  }
}
