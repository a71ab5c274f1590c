#include <doctest.h>

#include <filesystem>
#include <map>

#include "emsx/cli.hpp"
#include "emsx/pipeline.hpp"

using namespace emsx;
using doctest::Approx;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const fs::path& ws, std::vector<std::string> args) {
  args.insert(args.begin(), {"-w", ws.string()});
  return run_cli(args);
}

}  // namespace

TEST_CASE("synth, split and simulate dummy end to end") {
  fs::path dir = fresh_dir("emsx_cli_dummy");
  REQUIRE(cli(dir, {"synth", "--sites", "4", "--weeks", "6", "--seed", "7"}) == 0);
  REQUIRE(cli(dir, {"split", "--seed", "42"}) == 0);
  REQUIRE(cli(dir, {"simulate", "--controller", "dummy"}) == 0);

  Workspace ws{dir};
  auto rows = read_results(ws.results_dir() / "dummy.csv");
  CHECK(rows.size() == 12);

  // Forward loop by hand with the default tariff.
  Tariff tariff = Tariff::default_schedule();
  SplitTable split = read_split(ws.split_path());
  std::map<std::pair<std::string, std::string>, double> expected;
  for (const auto& rec : load_sites(ws)) {
    for (const auto& week : partition(rec, split).simulation) {
      double cost = 0;
      for (int t = 0; t < 672; ++t) cost += stage_cost(0.0, week.realized(t + 1), tariff, t);
      expected[{rec.site_id, week.week_id()}] = cost;
    }
  }
  REQUIRE(expected.size() == 12);
  for (const auto& r : rows) CHECK(r.management_cost == Approx(expected.at({r.site_id, r.week_id})).epsilon(1e-12));

  REQUIRE(cli(dir, {"score"}) == 0);
  ScoreReport report = score_workspace(ws);
  for (const auto& s : report.sites)
    if (s.controller == "dummy") CHECK(*s.score == 0.0);
}

TEST_CASE("calibrate without a split is a validation error") {
  fs::path dir = fresh_dir("emsx_cli_nosplit");
  REQUIRE(cli(dir, {"synth", "--sites", "1", "--weeks", "3", "--seed", "1"}) == 0);
  CHECK(cli(dir, {"calibrate", "--controller", "sdp"}) == 1);
  CHECK(cli(dir, {"simulate", "--controller", "sdp"}) == 1);
}

TEST_CASE("simulating an uncalibrated controller reports missing artifacts") {
  fs::path dir = fresh_dir("emsx_cli_missing");
  REQUIRE(cli(dir, {"synth", "--sites", "1", "--weeks", "3", "--seed", "1"}) == 0);
  REQUIRE(cli(dir, {"split", "--seed", "1"}) == 0);
  CHECK(cli(dir, {"simulate", "--controller", "sdp"}) == 1);
}

TEST_CASE("usage errors") {
  fs::path dir = fresh_dir("emsx_cli_usage");
  CHECK(cli(dir, {"simulate", "--controller", "nonsense"}) == 1);
  CHECK(cli(dir, {"frobnicate"}) != 0);
  CHECK(cli(dir, {"synth", "--sites", "0"}) == 1);
}
