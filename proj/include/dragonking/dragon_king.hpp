#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "dragonking/edf.hpp"
#include "dragonking/error.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/tail_fit.hpp"
#include "dragonking/tail_model.hpp"

namespace dragonking {

struct TestConfig {
  // 95% and 99% pointwise CI by default.
  std::vector<double> alphas{0.05, 0.01};
  // k-th largest (or smallest, for a left tail) observations to test.
  std::vector<std::size_t> ranks{4, 8, 12};
};

enum class Verdict { black_swan, dragon_king };
enum class Direction { inside, above, below };

inline const char* to_string(Verdict v) { return v == Verdict::dragon_king ? "dragon_king" : "black_swan"; }

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::above: return "above";
    case Direction::below: return "below";
    default: return "inside";
  }
}

struct TestResult {
  std::size_t rank = 0;
  double alpha = 0.0;
  double x = 0.0;           // observation in original units
  double abscissa = 0.0;    // tail abscissa (x for right tails, -x for left)
  double tail_value = 0.0;  // empirical tail at the abscissa, (k-1)/n without ties
  double center = 0.0;      // M(abscissa)
  double lower = 0.0;
  double upper = 0.0;
  // (tail_value - center) / sqrt(center (1 - center) / n); a distance-to-edge
  // diagnostic only, no verdict is drawn from it.
  double z_score = 0.0;
  Verdict verdict = Verdict::black_swan;
  Direction direction = Direction::inside;
};

inline void validate(const TestConfig& config, std::size_t n) {
  if (config.alphas.empty()) throw config_error("test config: at least one alpha is required");
  if (config.ranks.empty()) throw config_error("test config: at least one rank is required");
  for (double a : config.alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      std::ostringstream msg;
      msg << "test config: alpha " << a << " is outside (0,1)";
      throw config_error(msg.str());
    }
  }
  for (std::size_t k : config.ranks) {
    if (k < 1 || k > n) {
      std::ostringstream msg;
      msg << "test config: rank " << k << " is outside 1.." << n;
      throw config_error(msg.str());
    }
  }
}

// Classifies the k-th most extreme observations against the pointwise CI of
// the tail model: outside the interval is a dragon king, inside a black swan.
// Results are ordered by rank, then by alpha as given.
inline std::vector<TestResult> classify(const Sample& sample, const TailModel& model,
                                        const TestConfig& config) {
  const std::size_t n = sample.size();
  validate(config, n);
  const Edf edf(sample);
  std::vector<ConfidenceSpec> specs;
  specs.reserve(config.alphas.size());
  for (double a : config.alphas) specs.emplace_back(a);

  std::vector<TestResult> results;
  results.reserve(config.ranks.size() * specs.size());
  for (std::size_t k : config.ranks) {
    const double x = model.side == Side::right ? sample.kth_largest(k) : sample.order_statistic(k);
    const double abscissa = model.side == Side::right ? x : -x;
    const double tail_value = edf.tail(x, model.side);
    for (const auto& spec : specs) {
      const double one[] = {abscissa};
      const Band band = tail_band(model, one, n, spec);
      TestResult r;
      r.rank = k;
      r.alpha = spec.alpha();
      r.x = x;
      r.abscissa = abscissa;
      r.tail_value = tail_value;
      r.center = band.center[0];
      r.lower = band.lower[0];
      r.upper = band.upper[0];
      r.z_score = (tail_value - r.center) /
                  std::sqrt(r.center * (1.0 - r.center) / static_cast<double>(n));
      if (tail_value > r.upper) {
        r.verdict = Verdict::dragon_king;
        r.direction = Direction::above;
      } else if (tail_value < r.lower) {
        r.verdict = Verdict::dragon_king;
        r.direction = Direction::below;
      }
      results.push_back(r);
    }
  }
  return results;
}

// FNV-1a over the IEEE-754 bit patterns of the observations in input order.
inline std::string digest(const Sample& sample) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : sample.values()) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (bits >> (8 * byte)) & 0xFFU;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream out;
  out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

struct TestReport {
  std::size_t n = 0;
  std::string input_digest;
  TailFamily family = TailFamily::power;
  TailModel model;
  TestConfig config;
  std::vector<TestResult> results;
  // Plot rows: log-spaced grid merged with the window's order statistics,
  // ascending in the tail abscissa.
  std::size_t grid_points = 0;
  std::size_t window_points = 0;
  std::vector<double> plot_x;
  std::vector<double> plot_tail;
  std::vector<Band> bands;  // descending alpha; always includes 0.05 and 0.01
};

// The alphas for which plot bands are produced: the figure levels plus any
// configured alpha, in descending order.
inline std::vector<double> plot_alphas(const TestConfig& config) {
  std::vector<double> alphas{0.05, 0.01};
  alphas.insert(alphas.end(), config.alphas.begin(), config.alphas.end());
  std::sort(alphas.begin(), alphas.end(), std::greater<>());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  return alphas;
}

// select window -> fit -> classify -> bands on the plot grid.
inline TestReport full_report(const Sample& sample, const TailWindow& window, TailFamily family,
                              const TestConfig& config, std::size_t grid_points = 64,
                              WeibullFitMethod weibull_method = WeibullFitMethod::probability_space) {
  if (grid_points < 2) throw config_error("full_report: the plot grid needs at least 2 points");
  TestReport report;
  report.n = sample.size();
  report.input_digest = digest(sample);
  report.family = family;
  report.config = config;
  report.model = fit_tail(sample, window, family, weibull_method);
  report.results = classify(sample, report.model, config);

  const auto points = select_tail_window(sample, window);
  const double lo = std::min_element(points.begin(), points.end(), [](auto& a, auto& b) { return a.x < b.x; })->x;
  const double hi = std::max(lo, window.side == Side::right ? sample.max() : -sample.min());
  report.grid_points = grid_points;
  report.window_points = points.size();
  report.plot_x.reserve(grid_points + points.size());
  const double log_lo = std::log(lo);
  const double log_hi = std::log(hi);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    report.plot_x.push_back(i + 1 == grid_points ? hi : std::exp(log_lo + t * (log_hi - log_lo)));
  }
  for (const auto& pt : points) report.plot_x.push_back(pt.x);
  std::sort(report.plot_x.begin(), report.plot_x.end());

  const Edf edf(sample);
  report.plot_tail.reserve(report.plot_x.size());
  for (double a : report.plot_x)
    report.plot_tail.push_back(edf.tail(window.side == Side::right ? a : -a, window.side));

  for (double alpha : plot_alphas(config))
    report.bands.push_back(
        tail_band(report.model, report.plot_x, report.n, ConfidenceSpec(alpha), OutOfRange::saturate));
  return report;
}

}  // namespace dragonking
