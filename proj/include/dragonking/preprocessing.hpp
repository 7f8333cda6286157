#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dragonking/error.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/wavelet.hpp"

namespace dragonking {

using Date = std::chrono::sys_days;

// Daily series with strictly increasing dates. An hour label (1..24) marks
// one of the per-hour series of an hourly market.
struct TimeSeries {
  std::vector<Date> dates;
  std::vector<double> values;
  std::optional<int> hour;

  std::size_t size() const noexcept { return values.size(); }
};

inline std::string format_date(Date d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline void validate(const TimeSeries& s) {
  if (s.values.empty()) throw domain_error("time series: no observations");
  if (s.dates.size() != s.values.size()) {
    std::ostringstream msg;
    msg << "time series: " << s.dates.size() << " dates but " << s.values.size() << " values";
    throw domain_error(msg.str());
  }
  if (s.hour && (*s.hour < 1 || *s.hour > 24)) throw domain_error("time series: hour label outside 1..24");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s.values[i])) {
      std::ostringstream msg;
      msg << "time series: value at " << format_date(s.dates[i]) << " is not finite";
      throw domain_error(msg.str());
    }
    if (i > 0 && !(s.dates[i - 1] < s.dates[i])) {
      std::ostringstream msg;
      msg << "time series: dates not strictly increasing at " << format_date(s.dates[i]);
      throw domain_error(msg.str());
    }
  }
}

// ---------------------------------------------------------------------------
// Drawdowns
// ---------------------------------------------------------------------------

struct Drawdown {
  std::size_t start = 0;  // local maximum
  std::size_t end = 0;    // following local minimum
  double magnitude = 0.0; // (low - high) / high, <= 0
};

// Decline periods from a local maximum to the following local minimum. Equal
// consecutive prices neither end a rise nor a decline. A decline still in
// progress at the end is closed at the last value.
inline std::vector<Drawdown> drawdowns(std::span<const double> prices) {
  if (prices.size() < 2) throw domain_error("drawdowns: at least 2 prices are required");
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      std::ostringstream msg;
      msg << "drawdowns: price " << prices[i] << " at index " << i << " is not positive";
      throw domain_error(msg.str());
    }
  }
  std::vector<Drawdown> out;
  const std::size_t n = prices.size();
  std::size_t i = 0;
  while (i + 1 < n) {
    while (i + 1 < n && prices[i + 1] >= prices[i]) ++i;
    if (i + 1 >= n) break;
    const std::size_t peak = i;
    while (i + 1 < n && prices[i + 1] <= prices[i]) ++i;
    out.push_back({peak, i, (prices[i] - prices[peak]) / prices[peak]});
  }
  return out;
}

inline std::vector<Drawdown> drawdowns(const TimeSeries& series) {
  validate(series);
  return drawdowns(std::span<const double>(series.values));
}

inline Sample drawdown_sample(std::span<const Drawdown> dd) {
  std::vector<double> v;
  v.reserve(dd.size());
  for (const auto& d : dd) v.push_back(d.magnitude);
  return Sample(std::move(v));
}

// ---------------------------------------------------------------------------
// Long-term seasonal component
// ---------------------------------------------------------------------------

// Nadaraya-Watson smoother with a Gaussian kernel in calendar days, all
// observations contributing.
inline std::vector<double> ltsc_kernel(const TimeSeries& series, double bandwidth = 64.0) {
  validate(series);
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw config_error("ltsc_kernel: bandwidth must be positive");
  const std::size_t n = series.size();
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(series.dates[i].time_since_epoch().count());
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  std::vector<double> trend(n);
  for (std::size_t i = 0; i < n; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double u = t[i] - t[j];
      const double w = std::exp(-u * u * inv);
      if (w < 1e-300) continue;
      num += w * series.values[j];
      den += w;
    }
    trend[i] = num / den;
  }
  return trend;
}

// Wavelet smooth: approximation at `level` scales of a sym4 decomposition on
// a symmetrically extended copy of the series.
inline std::vector<double> ltsc_wavelet(const TimeSeries& series, std::size_t level = 6) {
  validate(series);
  return wavelet::multiresolution(series.values, level).smooth;
}

// ---------------------------------------------------------------------------
// Weekly component
// ---------------------------------------------------------------------------

enum class WeeklyStat { mean, median };

inline const char* to_string(WeeklyStat s) { return s == WeeklyStat::mean ? "mean" : "median"; }

class HolidayCalendar {
 public:
  HolidayCalendar() = default;
  explicit HolidayCalendar(std::vector<Date> dates) : dates_(dates.begin(), dates.end()) {}
  bool contains(Date d) const { return dates_.count(d) > 0; }
  std::size_t size() const noexcept { return dates_.size(); }

 private:
  std::set<Date> dates_;
};

// Day classes 0..6 = Monday..Sunday, 7 = holiday.
inline int day_class(Date d, const HolidayCalendar* holidays) {
  if (holidays != nullptr && holidays->contains(d)) return 7;
  return static_cast<int>(std::chrono::weekday(d).iso_encoding()) - 1;
}

inline double median_of(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  const double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m));
  return 0.5 * (lo + hi);
}

// "Average week" of a detrended series: the class statistic at each date,
// centered by subtracting the count-weighted mean of the class statistics so
// the component carries no level. With a calendar, holidays form an eighth
// class; a holiday class with no observations is simply unused.
inline std::vector<double> weekly_component(const TimeSeries& detrended, WeeklyStat stat,
                                            const HolidayCalendar* holidays = nullptr) {
  validate(detrended);
  std::vector<std::vector<double>> members(8);
  std::vector<int> cls(detrended.size());
  for (std::size_t i = 0; i < detrended.size(); ++i) {
    cls[i] = day_class(detrended.dates[i], holidays);
    members[static_cast<std::size_t>(cls[i])].push_back(detrended.values[i]);
  }
  static const char* names[] = {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"};
  for (int c = 0; c < 7; ++c) {
    if (members[static_cast<std::size_t>(c)].empty()) {
      std::ostringstream msg;
      msg << "weekly_component: no observations fall on a " << names[c];
      if (holidays != nullptr) msg << " outside the holiday calendar";
      throw domain_error(msg.str());
    }
  }
  std::vector<double> value(8, 0.0);
  double weighted = 0.0;
  for (std::size_t c = 0; c < 8; ++c) {
    const auto& m = members[c];
    if (m.empty()) continue;
    if (stat == WeeklyStat::mean) {
      double s = 0.0;
      for (double v : m) s += v;
      value[c] = s / static_cast<double>(m.size());
    } else {
      value[c] = median_of(m);
    }
    weighted += value[c] * static_cast<double>(m.size());
  }
  const double center = weighted / static_cast<double>(detrended.size());
  std::vector<double> out(detrended.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = value[static_cast<std::size_t>(cls[i])] - center;
  return out;
}

// ---------------------------------------------------------------------------
// Deseasonalization
// ---------------------------------------------------------------------------

enum class LtscMethod { kernel, wavelet };

inline const char* to_string(LtscMethod m) { return m == LtscMethod::kernel ? "kernel" : "wavelet"; }

struct DeseasonalizeOptions {
  LtscMethod method = LtscMethod::wavelet;
  double bandwidth = 64.0;  // days, kernel only
  std::size_t level = 6;    // wavelet only
  WeeklyStat stat = WeeklyStat::mean;
  std::optional<HolidayCalendar> holidays;
};

struct DecompositionMetadata {
  std::string ltsc;          // e.g. "wavelet" or "kernel"
  std::string ltsc_detail;   // "sym4 level 6, half-sample symmetric extension" / "gaussian bandwidth 64 days"
  std::string weekly_stat;
  std::string weekly_basis = "P-T";
  std::string centering = "count-weighted class mean removed";
  bool holidays = false;
  double shift = 0.0;
};

// P = T + s + X - shift at every date, min(X) = min(P).
struct SeasonalDecomposition {
  TimeSeries series;
  std::vector<double> trend;
  std::vector<double> weekly;
  std::vector<double> residual;    // P - T - s before the shift
  std::vector<double> stochastic;  // X
  double shift = 0.0;
  DecompositionMetadata metadata;
};

inline SeasonalDecomposition deseasonalize(const TimeSeries& series, const DeseasonalizeOptions& opt = {}) {
  validate(series);
  SeasonalDecomposition d;
  d.series = series;
  d.metadata.weekly_stat = to_string(opt.stat);
  d.metadata.holidays = opt.holidays.has_value();
  d.metadata.ltsc = to_string(opt.method);
  std::ostringstream detail;
  if (opt.method == LtscMethod::kernel) {
    d.trend = ltsc_kernel(series, opt.bandwidth);
    detail << "gaussian bandwidth " << opt.bandwidth << " days";
  } else {
    d.trend = ltsc_wavelet(series, opt.level);
    detail << wavelet::family_name << " level " << opt.level << ", half-sample symmetric extension";
  }
  d.metadata.ltsc_detail = detail.str();

  const std::size_t n = series.size();
  TimeSeries detrended{series.dates, std::vector<double>(n), series.hour};
  for (std::size_t i = 0; i < n; ++i) detrended.values[i] = series.values[i] - d.trend[i];
  d.weekly = weekly_component(detrended, opt.stat, opt.holidays ? &*opt.holidays : nullptr);

  d.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.residual[i] = detrended.values[i] - d.weekly[i];
  const auto raw_min = std::min_element(d.residual.begin(), d.residual.end());
  const std::size_t argmin = static_cast<std::size_t>(raw_min - d.residual.begin());
  const double p_min = *std::min_element(series.values.begin(), series.values.end());
  d.shift = p_min - *raw_min;
  d.stochastic.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.stochastic[i] = std::max(d.residual[i] + d.shift, p_min);
  // Rounding in x + shift could miss p_min by an ulp; pin the minimum.
  d.stochastic[argmin] = p_min;
  d.metadata.shift = d.shift;
  return d;
}

// First differences of the stochastic component. Taken on the unshifted
// residual so the shift constant cannot leak in through rounding.
inline Sample price_changes(const SeasonalDecomposition& d) {
  if (d.residual.size() < 2) throw domain_error("price_changes: at least 2 observations are required");
  std::vector<double> delta(d.residual.size() - 1);
  for (std::size_t i = 1; i < d.residual.size(); ++i) delta[i - 1] = d.residual[i] - d.residual[i - 1];
  return Sample(std::move(delta));
}

}  // namespace dragonking
