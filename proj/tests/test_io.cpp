#include <chrono>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "dragonking/dragonking.hpp"

using namespace dragonking;
using namespace dragonking::io;
using namespace std::chrono;
using Catch::Matchers::ContainsSubstring;

namespace {

// Zeller's congruence, 0 = Monday.
int zeller_weekday(int y, int m, int d) {
  if (m < 3) {
    m += 12;
    y -= 1;
  }
  const int k = y % 100, j = y / 100;
  const int h = (d + 13 * (m + 1) / 5 + k + k / 4 + j / 4 + 5 * j) % 7;  // 0 = Saturday
  return (h + 5) % 7;
}

std::string io_message(auto&& f) {
  try {
    f();
  } catch (const io_error& e) {
    return e.what();
  }
  return {};
}

json small_report(std::uint64_t seed = 4) {
  const auto s = sample(Pareto{2, 1}, 1000, Seed{seed});
  ReportSettings settings;
  settings.window = {0.10, 0.01};
  settings.config = {{0.10, 0.05, 0.01}, {1, 4}};
  return report_to_json(run_report(s, settings), settings);
}

}  // namespace

TEST_CASE("sample csv", "[io]") {
  std::istringstream ok("\xEF\xBB\xBFvalue\n1.5\n\n-2\n3e2\n");
  const auto s = read_sample_csv(ok);
  REQUIRE(s.size() == 3);
  CHECK(s.values()[1] == -2.0);
  CHECK(s.values()[2] == 300.0);

  std::istringstream bad("value\n1\nabc\n");
  CHECK_THAT(io_message([&] { read_sample_csv(bad, "x.csv"); }), ContainsSubstring("x.csv:3:"));
  std::istringstream header("price\n1\n");
  CHECK_THAT(io_message([&] { read_sample_csv(header, "h.csv"); }), ContainsSubstring("h.csv:1:"));
  std::istringstream wide("value\n1,2\n");
  CHECK_THROWS_AS(read_sample_csv(wide), io_error);
  std::istringstream nan("value\nnan\n");
  CHECK_THROWS_AS(read_sample_csv(nan), io_error);
  std::istringstream empty("value\n");
  CHECK_THROWS_AS(read_sample_csv(empty), io_error);

  const std::vector<double> v{0.1, 1e-300, 12345.678};
  std::istringstream round(sample_csv(v));
  const auto back = read_sample_csv(round);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.values()[i] == v[i]);
}

TEST_CASE("time series csv", "[io]") {
  std::istringstream daily("date,value\n2007-01-01,10\n2007-01-02,11.5\n");
  const auto one = read_timeseries_csv(daily);
  REQUIRE(one.size() == 1);
  CHECK_FALSE(one[0].hour.has_value());
  CHECK(one[0].values[1] == 11.5);
  CHECK(format_date(one[0].dates[1]) == "2007-01-02");

  std::istringstream hourly("date,value,hour\n2007-01-01,1,2\n2007-01-01,5,1\n2007-01-02,2,2\n");
  const auto two = read_timeseries_csv(hourly);
  REQUIRE(two.size() == 2);
  CHECK(two[0].hour == 1);
  CHECK(two[1].hour == 2);
  CHECK(two[1].size() == 2);

  std::istringstream dup("date,value\n2007-01-01,1\n2007-01-01,2\n");
  const auto msg = io_message([&] { read_timeseries_csv(dup, "d.csv"); });
  CHECK_THAT(msg, ContainsSubstring("d.csv:3:"));
  CHECK_THAT(msg, ContainsSubstring("duplicate date 2007-01-01"));

  std::istringstream bad_date("date,value\n2007-02-30,1\n");
  CHECK_THAT(io_message([&] { read_timeseries_csv(bad_date, "b.csv"); }), ContainsSubstring("b.csv:2:"));
  std::istringstream bad_hour("date,value,hour\n2007-01-01,1,25\n");
  CHECK_THROWS_AS(read_timeseries_csv(bad_hour), io_error);
  std::istringstream backwards("date,value\n2007-01-02,1\n2007-01-01,2\n");
  CHECK_THROWS_AS(read_timeseries_csv(backwards), io_error);
}

TEST_CASE("date parsing and weekday classes", "[io]") {
  CHECK_FALSE(parse_date("2007-1-01"));
  CHECK_FALSE(parse_date("2007/01/01"));
  CHECK_FALSE(parse_date("2007-13-01"));
  CHECK(parse_date("2008-02-29"));
  CHECK_FALSE(parse_date("2007-02-29"));
  for (const char* text : {"2007-01-01", "2008-02-29", "2010-12-25", "2011-07-14", "1999-12-31"}) {
    const auto d = parse_date(text);
    REQUIRE(d);
    const year_month_day ymd{*d};
    CHECK(day_class(*d, nullptr) == zeller_weekday(static_cast<int>(ymd.year()), static_cast<int>(unsigned(ymd.month())),
                                                   static_cast<int>(unsigned(ymd.day()))));
    CHECK(format_date(*d) == text);
  }
  CHECK(day_class(*parse_date("2007-01-01"), nullptr) == 0);
}

TEST_CASE("holiday files", "[io]") {
  std::istringstream in("# holidays\n2007-01-01\n\n2007-12-25  # xmas\n");
  const auto cal = read_holidays(in);
  CHECK(cal.size() == 2);
  CHECK(cal.contains(*parse_date("2007-12-25")));
  std::istringstream bad("2007-01-01\nnope\n");
  CHECK_THAT(io_message([&] { read_holidays(bad, "hol.txt"); }), ContainsSubstring("hol.txt:2:"));
}

TEST_CASE("canonical json", "[io]") {
  json j = {{"b", 0.1}, {"a", {1, 2, 3}}, {"c", {{"z", nullptr}, {"y", "s"}}}, {"d", json::array()}};
  const auto text = canonical_json(j);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"a\": [1, 2, 3]") != std::string::npos);
  CHECK(text.find("0.10000000000000001") != std::string::npos);
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  CHECK(canonical_json(parse_json(text)) == text);
  CHECK_THROWS_AS(parse_json("{oops"), io_error);

  const auto report = canonical_json(small_report());
  CHECK(canonical_json(parse_json(report)) == report);
}

TEST_CASE("value grammars", "[io]") {
  const auto w = parse_window("0.25:0.025", Side::left);
  CHECK(w.upper_frac == 0.25);
  CHECK(w.cut_frac == 0.025);
  CHECK(w.side == Side::left);
  CHECK_THROWS_AS(parse_window("0.25"), config_error);
  CHECK_THROWS_AS(parse_side("up"), config_error);
  CHECK_THROWS_AS(parse_family("gamma"), config_error);
  CHECK(parse_reference("true") == Reference::truth);

  CHECK(std::holds_alternative<Cauchy>(parse_model("cauchy:0,1")));
  CHECK(std::get<Hyperbolic>(parse_model("hyp:2,1")).alpha == 2.0);
  CHECK(std::get<Weibull>(parse_model("weib:1,0.5")).tau == 0.5);
  CHECK_THROWS_AS(parse_model("cauchy:0"), config_error);
  CHECK_THROWS_AS(parse_model("cauchy:0,-1"), validation_error);
  CHECK_THROWS_AS(parse_model("normal:0,1"), config_error);
  for (const char* spec : {"cauchy:0,1", "pareto:2,1", "weibull:1,0.5", "hyp:2,1,0"})
    CHECK(model_spec(parse_model(spec)) == spec);
}

TEST_CASE("report json contents", "[io]") {
  const auto j = small_report();
  CHECK(j.at("interval") == "pointwise");
  CHECK(j.at("input").at("n") == 1000);
  CHECK(j.at("results").size() == 6);
  CHECK(j.at("model").at("law") == "power");
  CHECK(j.at("model").at("ranks").at("first") == 901);
  CHECK(j.at("preprocessing").is_null());
  for (const auto& r : j.at("results")) {
    const double t = r.at("edf_tail");
    const bool outside = t < r.at("lower").get<double>() || t > r.at("upper").get<double>();
    CHECK((r.at("verdict") == "dragon_king") == outside);
  }
}

TEST_CASE("report reruns from its own settings", "[io]") {
  const auto s = sample(Weibull{1, 0.5}, 1000, Seed{12});
  ReportSettings settings;
  settings.family = TailFamily::weibull;
  settings.window = {0.25, 0.025};
  settings.config = {{0.05, 0.01}, {4}};
  settings.grid_points = 32;
  const auto first = canonical_json(report_to_json(run_report(s, settings), settings));
  const auto again = settings_from_json(parse_json(first));
  const auto second = canonical_json(report_to_json(run_report(s, again), again));
  CHECK(first == second);
  CHECK_THROWS_AS(settings_from_json(json::object()), io_error);
}

TEST_CASE("text rendering", "[io]") {
  const auto s0 = sample(Pareto{2, 1}, 1000, Seed{7});
  std::vector<double> v(s0.values().begin(), s0.values().end());
  std::sort(v.begin(), v.end());
  for (std::size_t i = 0; i < 4; ++i) v[v.size() - 1 - i] *= 1e4;
  ReportSettings settings;
  settings.config = {{0.01}, {4}};
  const auto planted = render_text(report_to_json(run_report(Sample(v), settings), settings));
  CHECK_THAT(planted, ContainsSubstring("DRAGON KING (above)"));
  CHECK_THAT(planted, ContainsSubstring("pointwise"));

  const auto calm = render_text(small_report());
  CHECK_THAT(calm, ContainsSubstring("black swan"));
  CHECK_THROWS_AS(render_text(json::object()), io_error);
}

TEST_CASE("plot csv", "[io]") {
  const auto j = small_report();
  const auto csv = plot_csv(j);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,edf_tail,center,lo95,hi95,lo99,hi99");
  std::size_t rows = 0;
  double prev_x = -1e300;
  while (std::getline(in, line)) {
    const auto f = split(line);
    REQUIRE(f.size() == 7);
    std::vector<double> v;
    for (const auto& s : f) v.push_back(*parse_double(s));
    CHECK(v[0] >= prev_x);
    prev_x = v[0];
    CHECK(v[5] <= v[3]);
    CHECK(v[3] <= v[2]);
    CHECK(v[2] <= v[4]);
    CHECK(v[4] <= v[6]);
    ++rows;
  }
  CHECK(rows == 64 + 90);
  json broken = j;
  broken["plot"]["bands"] = json::array();
  CHECK_THROWS_AS(plot_csv(broken), io_error);
}

TEST_CASE("study serialization", "[io]") {
  GridOptions opt;
  opt.replications = 40;
  opt.master_seed = Seed{5};
  std::vector<StudyConfig> grid{
      dragonking::detail::grid_cell(opt, Cauchy{0, 1}, TailFamily::power, Reference::truth, 1000, {0.10, 0.01}),
      dragonking::detail::grid_cell(opt, Cauchy{0, 1}, TailFamily::power, Reference::fitted, 1000, {0.10, 0.01})};
  const auto results = study_grid(grid);
  const auto j = study_to_json(results);
  REQUIRE(j.at("studies").size() == 2);
  for (const auto& st : j.at("studies")) {
    CHECK(st.at("cells").size() == 3);
    for (const auto& c : st.at("cells")) CHECK(c.contains("std_error"));
  }
  CHECK(canonical_json(study_to_json(study_grid(grid))) == canonical_json(j));

  const auto csv = study_csv(results);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 6);
  const auto text = study_text(results);
  CHECK_THAT(text, ContainsSubstring("Cauchy"));
  CHECK_THAT(text, ContainsSubstring("90%"));
}

TEST_CASE("study files", "[io]") {
  const auto preset = study_configs_from_json(parse_json(R"({"preset": "table2", "replications": 10})"));
  CHECK(preset.size() == 9);
  for (const auto& c : preset) CHECK(c.replications == 10);

  const auto cells = study_configs_from_json(parse_json(
      R"({"master_seed": 3, "cells": [{"model": "weibull:1,0.5", "family": "weibull", "reference": "true",
          "n": 500, "window": "0.25:0.025", "rank": 2, "alphas": [0.2]}]})"));
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].n == 500);
  CHECK(cells[0].rank == 2);
  CHECK(cells[0].master_seed == Seed{3});
  CHECK(cells[0].window.cut_frac == 0.025);
  CHECK(cells[0].alphas == std::vector<double>{0.2});

  CHECK_THROWS_AS(study_configs_from_json(parse_json("{}")), config_error);
  CHECK_THROWS_AS(study_configs_from_json(parse_json(R"({"preset": "table9"})")), config_error);
  CHECK_THROWS_AS(study_configs_from_json(parse_json(R"({"cells": [{"n": 5}]})")), config_error);
}

TEST_CASE("preprocessing outputs", "[io]") {
  const std::vector<double> p{1, 2, 5, 4, 3, 3, 1, 3, 4, 3, 2, 3};
  TimeSeries s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    s.dates.push_back(sys_days{year{2007} / January / 1} + days{static_cast<int>(i)});
    s.values.push_back(p[i]);
  }
  const auto dd = drawdowns(s);
  CHECK(drawdown_csv(dd) == "start_index,end_index,magnitude\n2,6,-0.80000000000000004\n8,10,-0.5\n");
  CHECK(drawdown_csv(dd, &s) == "start,end,magnitude\n2007-01-03,2007-01-07,-0.80000000000000004\n2007-01-09,2007-01-11,-0.5\n");

  std::vector<double> week;
  for (int i = 0; i < 70; ++i) week.push_back(10.0 + (i % 7));
  TimeSeries w;
  for (std::size_t i = 0; i < week.size(); ++i) {
    w.dates.push_back(sys_days{year{2007} / January / 1} + days{static_cast<int>(i)});
    w.values.push_back(week[i]);
  }
  w.hour = 3;
  DeseasonalizeOptions opt;
  opt.method = LtscMethod::kernel;
  const std::vector<SeasonalDecomposition> parts{deseasonalize(w, opt)};
  const auto csv = decomposition_csv(parts);
  CHECK(csv.rfind("date,hour,price,trend,weekly,stochastic\n2007-01-01,3,10,", 0) == 0);
  const auto meta = decomposition_metadata_json(parts);
  CHECK(meta.at("series")[0].at("hour") == 3);
  CHECK(meta.at("series")[0].at("ltsc") == "kernel");
  CHECK(meta.at("series")[0].at("observations") == 70);
}
