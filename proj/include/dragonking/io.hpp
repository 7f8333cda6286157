#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dragonking/distributions.hpp"
#include "dragonking/dragon_king.hpp"
#include "dragonking/error.hpp"
#include "dragonking/monte_carlo.hpp"
#include "dragonking/preprocessing.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/tail_fit.hpp"
#include "dragonking/tail_model.hpp"

namespace dragonking {

inline constexpr const char* tool_name = "dragonking";
inline constexpr const char* tool_version = "1.0.0";

using json = nlohmann::json;

namespace io {

// ---------------------------------------------------------------------------
// Text parsing helpers
// ---------------------------------------------------------------------------

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    out.emplace_back(trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view text) {
  const std::string s(trim(text));
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Strict ISO-8601 calendar date, YYYY-MM-DD.
inline std::optional<Date> parse_date(std::string_view text) {
  const auto s = trim(text);
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  int parts[3] = {0, 0, 0};
  const std::size_t starts[3] = {0, 5, 8};
  const std::size_t lens[3] = {4, 2, 2};
  for (int p = 0; p < 3; ++p) {
    for (std::size_t i = 0; i < lens[p]; ++i) {
      const char c = s[starts[p] + i];
      if (c < '0' || c > '9') return std::nullopt;
      parts[p] = parts[p] * 10 + (c - '0');
    }
  }
  const std::chrono::year_month_day ymd{std::chrono::year{parts[0]},
                                        std::chrono::month{static_cast<unsigned>(parts[1])},
                                        std::chrono::day{static_cast<unsigned>(parts[2])}};
  if (!ymd.ok()) return std::nullopt;
  return Date{ymd};
}

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  return in;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw io_error("write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace detail {

struct CsvLine {
  std::size_t number;
  std::vector<std::string> fields;
};

// Non-blank lines after the header, which must equal one of `headers`.
// Returns the index of the header that matched.
inline std::size_t read_csv(std::istream& in, const std::string& source,
                            const std::vector<std::vector<std::string>>& headers, std::vector<CsvLine>& rows) {
  std::string line;
  std::size_t number = 0;
  std::optional<std::size_t> matched;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!matched) {
      if (number == 1 && !fields.empty() && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) fields[0].erase(0, 3);
      for (std::size_t h = 0; h < headers.size(); ++h)
        if (fields == headers[h]) matched = h;
      if (!matched) {
        std::ostringstream msg;
        msg << source << ":" << number << ": unexpected header '" << std::string(trim(line)) << "', expected '";
        for (std::size_t h = 0; h < headers.size(); ++h) {
          if (h) msg << "' or '";
          for (std::size_t i = 0; i < headers[h].size(); ++i) msg << (i ? "," : "") << headers[h][i];
        }
        msg << "'";
        throw io_error(msg.str());
      }
      continue;
    }
    if (fields.size() != headers[*matched].size()) {
      std::ostringstream msg;
      msg << source << ":" << number << ": expected " << headers[*matched].size() << " fields, found " << fields.size();
      throw io_error(msg.str());
    }
    rows.push_back({number, std::move(fields)});
  }
  if (!matched) throw io_error(source + ": empty file, no header row");
  return *matched;
}

[[noreturn]] inline void row_error(const std::string& source, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << source << ":" << line << ": " << what;
  throw io_error(msg.str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV ingest
// ---------------------------------------------------------------------------

// Schema: header `value`, one observation per row.
inline Sample read_sample_csv(std::istream& in, const std::string& source = "<input>") {
  std::vector<detail::CsvLine> rows;
  detail::read_csv(in, source, {{"value"}}, rows);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& r : rows) {
    const auto v = parse_double(r.fields[0]);
    if (!v) detail::row_error(source, r.number, "value '" + r.fields[0] + "' is not a finite number");
    values.push_back(*v);
  }
  if (values.empty()) throw io_error(source + ": no observations");
  return Sample(std::move(values));
}

inline Sample read_sample_csv(const std::string& path) {
  auto in = open_input(path);
  return read_sample_csv(in, path);
}

inline std::string sample_csv(std::span<const double> values) {
  std::string out = "value\n";
  for (double v : values) out += format_double(v) + "\n";
  return out;
}

// Schema: `date,value` or `date,value,hour`. With an hour column the rows are
// split into one series per hour label, ascending by hour; dates must be
// strictly increasing within each hour.
inline std::vector<TimeSeries> read_timeseries_csv(std::istream& in, const std::string& source = "<input>") {
  std::vector<detail::CsvLine> rows;
  const std::size_t schema = detail::read_csv(in, source, {{"date", "value"}, {"date", "value", "hour"}}, rows);
  const bool hourly = schema == 1;
  std::map<int, TimeSeries> by_hour;
  for (const auto& r : rows) {
    const auto d = parse_date(r.fields[0]);
    if (!d) detail::row_error(source, r.number, "date '" + r.fields[0] + "' is not an ISO-8601 date (YYYY-MM-DD)");
    const auto v = parse_double(r.fields[1]);
    if (!v) detail::row_error(source, r.number, "value '" + r.fields[1] + "' is not a finite number");
    int hour = 0;
    if (hourly) {
      const auto h = parse_double(r.fields[2]);
      if (!h || *h != std::floor(*h) || *h < 1 || *h > 24)
        detail::row_error(source, r.number, "hour '" + r.fields[2] + "' is not an integer in 1..24");
      hour = static_cast<int>(*h);
    }
    auto& s = by_hour[hour];
    if (hourly) s.hour = hour;
    if (!s.dates.empty() && !(s.dates.back() < *d)) {
      detail::row_error(source, r.number,
                        (s.dates.back() == *d ? "duplicate date " : "date out of order ") + format_date(*d) +
                            (hourly ? " for hour " + std::to_string(hour) : std::string{}));
    }
    s.dates.push_back(*d);
    s.values.push_back(*v);
  }
  if (by_hour.empty()) throw io_error(source + ": no observations");
  std::vector<TimeSeries> out;
  for (auto& [h, s] : by_hour) out.push_back(std::move(s));
  return out;
}

inline std::vector<TimeSeries> read_timeseries_csv(const std::string& path) {
  auto in = open_input(path);
  return read_timeseries_csv(in, path);
}

// One ISO date per line; blank lines and '#' comments are ignored.
inline HolidayCalendar read_holidays(std::istream& in, const std::string& source = "<holidays>") {
  std::vector<Date> dates;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto t = trim(line);
    if (const auto hash = t.find('#'); hash != std::string_view::npos) t = trim(t.substr(0, hash));
    if (t.empty()) continue;
    const auto d = parse_date(t);
    if (!d) detail::row_error(source, number, "'" + std::string(t) + "' is not an ISO-8601 date");
    dates.push_back(*d);
  }
  return HolidayCalendar(std::move(dates));
}

inline HolidayCalendar read_holidays(const std::string& path) {
  auto in = open_input(path);
  return read_holidays(in, path);
}

// ---------------------------------------------------------------------------
// Canonical JSON: sorted keys, %.17g numbers, 2-space indent, scalar arrays
// on one line, trailing newline.
// ---------------------------------------------------------------------------

namespace detail {

inline void write_json(const json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map order: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += inner + json(it.key()).dump() + ": ";
        write_json(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case json::value_t::array: {
      const bool scalar = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      if (j.empty()) {
        out += "[]";
      } else if (scalar) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          write_json(j[i], out, indent + 1);
        }
        out += "]";
      } else {
        out += "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ",\n";
          out += inner;
          write_json(j[i], out, indent + 1);
        }
        out += "\n" + pad + "]";
      }
      return;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string canonical_json(const json& j) {
  std::string out;
  detail::write_json(j, out, 0);
  out += "\n";
  return out;
}

inline json parse_json(const std::string& text, const std::string& source = "<json>") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw io_error(source + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Command-line value grammars
// ---------------------------------------------------------------------------

// "0.10:0.01" -> {upper_frac, cut_frac}
inline TailWindow parse_window(std::string_view text, Side side = Side::right) {
  const auto parts = split(text, ':');
  std::optional<double> upper, cut;
  if (parts.size() == 2) {
    upper = parse_double(parts[0]);
    cut = parse_double(parts[1]);
  }
  if (!upper || !cut) throw config_error("window '" + std::string(text) + "' is not of the form UPPER:CUT, e.g. 0.10:0.01");
  return {*upper, *cut, side};
}

inline std::string format_window(const TailWindow& w) {
  std::ostringstream s;
  s << w.upper_frac * 100 << "%-" << w.cut_frac * 100 << "%";
  return s.str();
}

inline Side parse_side(std::string_view s) {
  if (s == "right") return Side::right;
  if (s == "left") return Side::left;
  throw config_error("side '" + std::string(s) + "' is not left or right");
}

inline TailFamily parse_family(std::string_view s) {
  if (s == "power") return TailFamily::power;
  if (s == "weibull") return TailFamily::weibull;
  throw config_error("family '" + std::string(s) + "' is not power or weibull");
}

inline Reference parse_reference(std::string_view s) {
  if (s == "fitted") return Reference::fitted;
  if (s == "true") return Reference::truth;
  throw config_error("reference '" + std::string(s) + "' is not fitted or true");
}

inline WeibullFitMethod parse_weibull_method(std::string_view s) {
  if (s == "probability_space") return WeibullFitMethod::probability_space;
  if (s == "double_log") return WeibullFitMethod::double_log;
  throw config_error("weibull method '" + std::string(s) + "' is not probability_space or double_log");
}

inline const char* to_string(WeibullFitMethod m) {
  return m == WeibullFitMethod::probability_space ? "probability_space" : "double_log";
}

// "cauchy:0,1", "pareto:2,1", "hyp:2,1", "weibull:1,0.5"
inline DistributionModel parse_model(std::string_view text) {
  const auto colon = text.find(':');
  const std::string name(trim(text.substr(0, colon)));
  std::vector<double> args;
  if (colon != std::string_view::npos) {
    for (const auto& f : split(text.substr(colon + 1))) {
      const auto v = parse_double(f);
      if (!v) throw config_error("model '" + std::string(text) + "': parameter '" + f + "' is not a number");
      args.push_back(*v);
    }
  }
  auto need = [&](std::size_t k) {
    if (args.size() != k)
      throw config_error("model '" + std::string(text) + "' needs " + std::to_string(k) + " parameters");
  };
  DistributionModel m;
  if (name == "cauchy") {
    need(2);
    m = Cauchy{args[0], args[1]};
  } else if (name == "pareto") {
    need(2);
    m = Pareto{args[0], args[1]};
  } else if (name == "hyp" || name == "hyperbolic") {
    if (args.size() == 3) {
      m = Hyperbolic{args[0], args[1], args[2]};
    } else {
      need(2);
      m = Hyperbolic{args[0], args[1]};
    }
  } else if (name == "weibull" || name == "weib") {
    need(2);
    m = Weibull{args[0], args[1]};
  } else {
    throw config_error("unknown model '" + name + "'; expected cauchy, pareto, hyp or weibull");
  }
  validate(m);
  return m;
}

inline std::string model_spec(const DistributionModel& m) {
  return std::visit(
      [](const auto& d) -> std::string {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Cauchy>) return "cauchy:" + format_double(d.mu) + "," + format_double(d.sigma);
        else if constexpr (std::is_same_v<T, Pareto>) return "pareto:" + format_double(d.lambda) + "," + format_double(d.alpha);
        else if constexpr (std::is_same_v<T, Hyperbolic>)
          return "hyp:" + format_double(d.alpha) + "," + format_double(d.delta) + "," + format_double(d.beta);
        else return "weibull:" + format_double(d.beta) + "," + format_double(d.tau);
      },
      m);
}

// ---------------------------------------------------------------------------
// Tail models and reports
// ---------------------------------------------------------------------------

inline json to_json(const TailWindow& w) {
  return {{"upper_frac", w.upper_frac}, {"cut_frac", w.cut_frac}, {"side", to_string(w.side)}};
}

inline TailWindow window_from_json(const json& j) {
  return {j.at("upper_frac").get<double>(), j.at("cut_frac").get<double>(),
          parse_side(j.at("side").get<std::string>())};
}

inline json law_parameters(const TailLaw& law) {
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PowerTail>) return {{"b", t.b}, {"p", t.p}};
        else if constexpr (std::is_same_v<T, WeibullTail>) return {{"beta", t.beta}, {"tau", t.tau}};
        else return {{"lambda", t.lambda}, {"alpha", t.alpha}};
      },
      law);
}

inline json to_json(const TailModel& m) {
  return {{"law", law_name(m.law)},
          {"parameters", law_parameters(m.law)},
          {"side", to_string(m.side)},
          {"window", to_json(m.window)},
          {"ranks", {{"first", m.ranks.first}, {"last", m.ranks.last}, {"count", m.ranks.count()}}},
          {"diagnostics", {{"method", m.diagnostics.method}, {"points", m.diagnostics.points}, {"rss", m.diagnostics.rss}}}};
}

// Settings that, with the same input sample, regenerate a report.
struct ReportSettings {
  TailWindow window{};
  TailFamily family = TailFamily::power;
  TestConfig config{};
  std::size_t grid_points = 64;
  WeibullFitMethod weibull_method = WeibullFitMethod::probability_space;
};

inline json to_json(const DecompositionMetadata& m) {
  return {{"ltsc", m.ltsc},
          {"ltsc_detail", m.ltsc_detail},
          {"weekly_stat", m.weekly_stat},
          {"weekly_basis", m.weekly_basis},
          {"centering", m.centering},
          {"holidays", m.holidays},
          {"shift", m.shift}};
}

inline json report_to_json(const TestReport& r, const ReportSettings& settings,
                           const std::optional<json>& preprocessing = std::nullopt) {
  json results = json::array();
  for (const auto& t : r.results) {
    results.push_back({{"rank", t.rank},
                       {"alpha", t.alpha},
                       {"confidence", 1.0 - t.alpha},
                       {"x", t.x},
                       {"abscissa", t.abscissa},
                       {"edf_tail", t.tail_value},
                       {"center", t.center},
                       {"lower", t.lower},
                       {"upper", t.upper},
                       {"z_score", t.z_score},
                       {"verdict", to_string(t.verdict)},
                       {"direction", to_string(t.direction)}});
  }
  json bands = json::array();
  for (const auto& b : r.bands) {
    bands.push_back({{"alpha", b.alpha},
                     {"center", b.center},
                     {"half_width", b.half_width},
                     {"lower", b.lower},
                     {"upper", b.upper}});
  }
  json j;
  j["tool"] = {{"name", tool_name}, {"version", tool_version}};
  j["input"] = {{"digest", r.input_digest}, {"n", r.n}};
  j["config"] = {{"family", to_string(settings.family)},
                 {"window", to_json(settings.window)},
                 {"alphas", settings.config.alphas},
                 {"ranks", settings.config.ranks},
                 {"grid_points", settings.grid_points},
                 {"weibull_method", to_string(settings.weibull_method)}};
  j["interval"] = "pointwise";
  j["model"] = to_json(r.model);
  j["results"] = std::move(results);
  j["plot"] = {{"x", r.plot_x},
               {"edf_tail", r.plot_tail},
               {"grid_points", r.grid_points},
               {"window_points", r.window_points},
               {"bands", std::move(bands)}};
  j["preprocessing"] = preprocessing ? *preprocessing : json(nullptr);
  return j;
}

inline ReportSettings settings_from_json(const json& report) {
  try {
    const auto& c = report.at("config");
    ReportSettings s;
    s.family = parse_family(c.at("family").get<std::string>());
    s.window = window_from_json(c.at("window"));
    s.config.alphas = c.at("alphas").get<std::vector<double>>();
    s.config.ranks = c.at("ranks").get<std::vector<std::size_t>>();
    s.grid_points = c.at("grid_points").get<std::size_t>();
    s.weibull_method = parse_weibull_method(c.at("weibull_method").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw io_error(std::string("report config is incomplete: ") + e.what());
  }
}

inline TestReport run_report(const Sample& sample, const ReportSettings& s) {
  return full_report(sample, s.window, s.family, s.config, s.grid_points, s.weibull_method);
}

inline std::string percent(double v, int digits = 1) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << 100.0 * v << "%";
  return s.str();
}

// Human-readable rendering of a serialized report.
inline std::string render_text(const json& j) {
  try {
    std::ostringstream out;
    const auto& model = j.at("model");
    const auto& win = model.at("window");
    const TailWindow window = window_from_json(win);
    out << "Dragon king test, " << to_string(window.side) << " tail, n = " << j.at("input").at("n").get<std::size_t>() << "\n";
    out << "input " << j.at("input").at("digest").get<std::string>() << "\n";
    out << "fitted " << model.at("law").get<std::string>() << " tail on the " << format_window(window)
        << " most extreme observations (" << model.at("diagnostics").at("points").get<std::size_t>()
        << " points, " << model.at("diagnostics").at("method").get<std::string>() << "):";
    for (auto it = model.at("parameters").begin(); it != model.at("parameters").end(); ++it)
      out << " " << it.key() << " = " << std::setprecision(6) << it.value().get<double>();
    out << "\n";
    if (j.contains("preprocessing") && !j.at("preprocessing").is_null()) {
      const auto& p = j.at("preprocessing");
      out << "preprocessing:";
      for (auto it = p.begin(); it != p.end(); ++it) {
        out << " " << it.key() << "=";
        if (it.value().is_string()) out << it.value().get<std::string>();
        else out << it.value().dump();
      }
      out << "\n";
    }
    out << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "%5s  %14s  %10s  %10s  %21s  %5s  %s\n", "rank", "x", "edf tail", "model",
                  "pointwise CI", "level", "verdict");
    out << line;
    for (const auto& r : j.at("results")) {
      const bool dk = r.at("verdict").get<std::string>() == "dragon_king";
      std::string verdict = dk ? "DRAGON KING" : "black swan";
      if (dk) verdict += " (" + r.at("direction").get<std::string>() + ")";
      char ci[64];
      std::snprintf(ci, sizeof ci, "[%.6f, %.6f]", r.at("lower").get<double>(), r.at("upper").get<double>());
      std::snprintf(line, sizeof line, "%5zu  %14.6g  %10.6f  %10.6f  %21s  %5s  %s\n", r.at("rank").get<std::size_t>(),
                    r.at("x").get<double>(), r.at("edf_tail").get<double>(), r.at("center").get<double>(), ci,
                    percent(r.at("confidence").get<double>(), 0).c_str(), verdict.c_str());
      out << line;
    }
    out << "\nintervals are pointwise, not a simultaneous band\n";
    return out.str();
  } catch (const json::exception& e) {
    throw io_error(std::string("malformed report: ") + e.what());
  }
}

// Columns x, edf_tail, center, lo95, hi95, lo99, hi99 on the plot grid.
inline std::string plot_csv(const json& j) {
  try {
    const auto& plot = j.at("plot");
    const auto xs = plot.at("x").get<std::vector<double>>();
    const auto tail = plot.at("edf_tail").get<std::vector<double>>();
    const json* b95 = nullptr;
    const json* b99 = nullptr;
    for (const auto& b : plot.at("bands")) {
      const double a = b.at("alpha").get<double>();
      if (std::abs(a - 0.05) < 1e-12) b95 = &b;
      if (std::abs(a - 0.01) < 1e-12) b99 = &b;
    }
    if (b95 == nullptr || b99 == nullptr) throw io_error("report has no 95% and 99% band curves");
    const auto center = b95->at("center").get<std::vector<double>>();
    const auto lo95 = b95->at("lower").get<std::vector<double>>();
    const auto hi95 = b95->at("upper").get<std::vector<double>>();
    const auto lo99 = b99->at("lower").get<std::vector<double>>();
    const auto hi99 = b99->at("upper").get<std::vector<double>>();
    for (const auto* v : {&tail, &center, &lo95, &hi95, &lo99, &hi99})
      if (v->size() != xs.size()) throw io_error("report plot columns have different lengths");
    std::string out = "x,edf_tail,center,lo95,hi95,lo99,hi99\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
      out += format_double(xs[i]) + "," + format_double(tail[i]) + "," + format_double(center[i]) + "," +
             format_double(lo95[i]) + "," + format_double(hi95[i]) + "," + format_double(lo99[i]) + "," +
             format_double(hi99[i]) + "\n";
    }
    return out;
  } catch (const json::exception& e) {
    throw io_error(std::string("malformed report: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Monte Carlo study grids
// ---------------------------------------------------------------------------

inline json to_json(const StudyConfig& c) {
  return {{"model", model_spec(c.model)},
          {"label", label(c.model)},
          {"family", to_string(c.family)},
          {"reference", to_string(c.reference)},
          {"window", to_json(c.window)},
          {"n", c.n},
          {"replications", c.replications},
          {"alphas", c.alphas},
          {"rank", c.rank},
          {"master_seed", c.master_seed.value},
          {"weibull_method", to_string(c.weibull_method)}};
}

inline json to_json(const StudyResult& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"alpha", c.alpha},
                     {"confidence", 1.0 - c.alpha},
                     {"rejections", c.rejections},
                     {"rate", c.rate},
                     {"std_error", c.std_error}});
  }
  return {{"config", to_json(r.config)},
          {"completed", r.completed},
          {"failed", r.failed},
          {"first_failure", r.first_failure},
          {"cells", std::move(cells)}};
}

inline json study_to_json(std::span<const StudyResult> results) {
  json studies = json::array();
  for (const auto& r : results) studies.push_back(to_json(r));
  return {{"tool", {{"name", tool_name}, {"version", tool_version}}},
          {"interval", "pointwise"},
          {"studies", std::move(studies)}};
}

inline std::string study_csv(std::span<const StudyResult> results) {
  std::string out =
      "model,family,reference,n,upper_frac,cut_frac,rank,alpha,confidence,replications,completed,failed,"
      "rejections,rate,std_error\n";
  for (const auto& r : results) {
    const auto& c = r.config;
    for (const auto& cell : r.cells) {
      out += label(c.model) + "," + to_string(c.family) + "," + to_string(c.reference) + "," + std::to_string(c.n) +
             "," + format_double(c.window.upper_frac) + "," + format_double(c.window.cut_frac) + "," +
             std::to_string(c.rank) + "," + format_double(cell.alpha) + "," + format_double(1.0 - cell.alpha) + "," +
             std::to_string(c.replications) + "," + std::to_string(r.completed) + "," + std::to_string(r.failed) +
             "," + std::to_string(cell.rejections) + "," + format_double(cell.rate) + "," +
             format_double(cell.std_error) + "\n";
    }
  }
  return out;
}

// Table layout: rows = (n, window) blocks x confidence level, columns = model
// x reference. Each cell is "rate (se)". A true-reference cell missing from a
// block but present in an earlier block with the same n is shown as ditto.
inline std::string study_text(std::span<const StudyResult> results) {
  struct Column {
    std::string name;
    std::string model;
    Reference ref;
  };
  std::vector<Column> columns;
  struct Block {
    std::size_t n;
    TailWindow window;
    std::vector<double> alphas;
  };
  std::vector<Block> blocks;
  auto same_window = [](const TailWindow& a, const TailWindow& b) {
    return a.upper_frac == b.upper_frac && a.cut_frac == b.cut_frac && a.side == b.side;
  };
  for (const auto& r : results) {
    const std::string model = label(r.config.model);
    const bool known = std::any_of(columns.begin(), columns.end(), [&](const Column& c) {
      return c.model == model && c.ref == r.config.reference;
    });
    if (!known) {
      columns.push_back({model + (r.config.reference == Reference::truth ? " true" : " fitted"), model,
                         r.config.reference});
    }
    auto it = std::find_if(blocks.begin(), blocks.end(), [&](const Block& b) {
      return b.n == r.config.n && same_window(b.window, r.config.window);
    });
    if (it == blocks.end()) {
      blocks.push_back({r.config.n, r.config.window, {}});
      it = blocks.end() - 1;
    }
    for (double a : r.config.alphas)
      if (std::find(it->alphas.begin(), it->alphas.end(), a) == it->alphas.end()) it->alphas.push_back(a);
  }
  for (auto& b : blocks) std::sort(b.alphas.begin(), b.alphas.end(), std::greater<>());

  auto find = [&](const Block& b, const Column& col, double alpha) -> const CellResult* {
    for (const auto& r : results) {
      if (r.config.n != b.n || label(r.config.model) != col.model || r.config.reference != col.ref) continue;
      if (!same_window(r.config.window, b.window)) continue;
      for (const auto& c : r.cells)
        if (c.alpha == alpha) return &c;
    }
    return nullptr;
  };
  auto true_elsewhere = [&](const Block& b, const Column& col) {
    return col.ref == Reference::truth && std::any_of(results.begin(), results.end(), [&](const StudyResult& r) {
             return r.config.n == b.n && label(r.config.model) == col.model && r.config.reference == Reference::truth;
           });
  };

  std::ostringstream out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-6s %-6s %-13s", "CI", "n", "window");
  out << buf;
  for (const auto& c : columns) {
    std::snprintf(buf, sizeof buf, " %20s", c.name.c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& b : blocks) {
    for (double a : b.alphas) {
      std::snprintf(buf, sizeof buf, "%-6s %-6zu %-13s", percent(1.0 - a, 0).c_str(), b.n, format_window(b.window).c_str());
      out << buf;
      for (const auto& col : columns) {
        std::string cell;
        if (const auto* c = find(b, col, a)) {
          cell = percent(c->rate) + " (" + percent(c->std_error, 2) + ")";
        } else if (true_elsewhere(b, col)) {
          cell = "\"";
        } else {
          cell = "-";
        }
        std::snprintf(buf, sizeof buf, " %20s", cell.c_str());
        out << buf;
      }
      out << "\n";
    }
  }
  out << "rate (Monte Carlo standard error); rejection of the rank-" << (results.empty() ? 4 : results.front().config.rank)
      << " observation at each pointwise CI level\n";
  return out.str();
}

// Declarative study file:
//   {"master_seed": 1, "replications": 2000, "threads": 0,
//    "cells": [{"model": "cauchy:0,1", "family": "power", "reference": "true",
//               "n": 1000, "window": "0.10:0.01", "alphas": [0.1, 0.05, 0.01],
//               "rank": 4}]}
// or {"preset": "table1" | "table2", ...} for the published grid layouts.
// Top-level replications / master_seed / threads / rank / alphas act as
// defaults for every cell.
inline std::vector<StudyConfig> study_configs_from_json(const json& j) {
  try {
    GridOptions opt;
    if (j.contains("replications")) opt.replications = j.at("replications").get<std::size_t>();
    if (j.contains("master_seed")) opt.master_seed = Seed{j.at("master_seed").get<std::uint64_t>()};
    if (j.contains("threads")) opt.threads = j.at("threads").get<unsigned>();
    if (j.contains("rank")) opt.rank = j.at("rank").get<std::size_t>();
    if (j.contains("alphas")) opt.alphas = j.at("alphas").get<std::vector<double>>();
    std::vector<StudyConfig> grid;
    if (j.contains("preset")) {
      const auto preset = j.at("preset").get<std::string>();
      if (preset == "table1") grid = power_table_grid(opt);
      else if (preset == "table2") grid = weibull_table_grid(opt);
      else throw config_error("unknown preset '" + preset + "'; expected table1 or table2");
    }
    if (j.contains("cells")) {
      for (const auto& cell : j.at("cells")) {
        StudyConfig c = dragonking::detail::grid_cell(opt, parse_model(cell.at("model").get<std::string>()),
                                          parse_family(cell.value("family", std::string("power"))),
                                          parse_reference(cell.value("reference", std::string("fitted"))),
                                          cell.value("n", std::size_t{1000}),
                                          parse_window(cell.value("window", std::string("0.10:0.01")),
                                                       parse_side(cell.value("side", std::string("right")))));
        if (cell.contains("alphas")) c.alphas = cell.at("alphas").get<std::vector<double>>();
        if (cell.contains("rank")) c.rank = cell.at("rank").get<std::size_t>();
        if (cell.contains("replications")) c.replications = cell.at("replications").get<std::size_t>();
        if (cell.contains("weibull_method"))
          c.weibull_method = parse_weibull_method(cell.at("weibull_method").get<std::string>());
        grid.push_back(std::move(c));
      }
    }
    if (grid.empty()) throw config_error("study file defines no cells (need \"preset\" or \"cells\")");
    return grid;
  } catch (const json::exception& e) {
    throw config_error(std::string("study file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Preprocessing outputs
// ---------------------------------------------------------------------------

inline std::string decomposition_csv(std::span<const SeasonalDecomposition> parts) {
  const bool hourly = std::any_of(parts.begin(), parts.end(), [](const auto& d) { return d.series.hour.has_value(); });
  std::string out = hourly ? "date,hour,price,trend,weekly,stochastic\n" : "date,price,trend,weekly,stochastic\n";
  for (const auto& d : parts) {
    for (std::size_t i = 0; i < d.series.size(); ++i) {
      out += format_date(d.series.dates[i]) + ",";
      if (hourly) out += std::to_string(d.series.hour.value_or(0)) + ",";
      out += format_double(d.series.values[i]) + "," + format_double(d.trend[i]) + "," + format_double(d.weekly[i]) +
             "," + format_double(d.stochastic[i]) + "\n";
    }
  }
  return out;
}

inline json decomposition_metadata_json(std::span<const SeasonalDecomposition> parts) {
  json per_series = json::array();
  for (const auto& d : parts) {
    json m = to_json(d.metadata);
    m["hour"] = d.series.hour ? json(*d.series.hour) : json(nullptr);
    m["observations"] = d.series.size();
    per_series.push_back(std::move(m));
  }
  return {{"tool", {{"name", tool_name}, {"version", tool_version}}}, {"series", std::move(per_series)}};
}

inline std::string drawdown_csv(std::span<const Drawdown> dd, const TimeSeries* series = nullptr) {
  std::string out = series ? "start,end,magnitude\n" : "start_index,end_index,magnitude\n";
  for (const auto& d : dd) {
    if (series) out += format_date(series->dates[d.start]) + "," + format_date(series->dates[d.end]) + ",";
    else out += std::to_string(d.start) + "," + std::to_string(d.end) + ",";
    out += format_double(d.magnitude) + "\n";
  }
  return out;
}

}  // namespace io
}  // namespace dragonking
