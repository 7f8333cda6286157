// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dragonking/dragonking.hpp"

using namespace dragonking;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what;
    if (!ok) {
      pass = false;
      detail += " [x]";
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s  %2d  %-44s  %s  (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

GridOptions options(std::size_t reps) {
  GridOptions g;
  g.replications = reps;
  return g;
}

// Rates in percent against targets with symmetric tolerances.
void within(Outcome& o, const StudyResult& r, const std::vector<double>& target, const std::vector<double>& tol) {
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double pct = 100.0 * r.cells[i].rate;
    o.require(std::abs(pct - target[i]) <= tol[i],
              fmt("%g%%: %.2f vs %.1f+-%.1f", 100.0 * (1.0 - r.cells[i].alpha), pct, target[i], tol[i]));
  }
}

StudyResult study(DistributionModel m, TailFamily f, Reference ref, std::size_t n, std::size_t reps) {
  return run_study(detail::grid_cell(options(reps), m, f, ref, n, {0.10, 0.01}));
}

// Structural invariants of a serialized report.
void check_report(Outcome& o, const std::string& tag, const json& j, std::size_t expect_results) {
  bool ok = true;
  for (const char* key : {"tool", "input", "config", "interval", "model", "results", "plot", "preprocessing"})
    ok = ok && j.contains(key);
  if (!ok) {
    o.require(false, tag + " keys");
    return;
  }
  const auto& results = j.at("results");
  ok = ok && results.size() == expect_results;
  for (const auto& r : results) {
    const double t = r.at("edf_tail"), lo = r.at("lower"), hi = r.at("upper"), c = r.at("center");
    ok = ok && lo <= c && c <= hi;
    ok = ok && ((r.at("verdict") == "dragon_king") == (t < lo || t > hi));
  }
  const auto& plot = j.at("plot");
  const auto xs = plot.at("x").get<std::vector<double>>();
  const std::size_t rows = plot.at("grid_points").get<std::size_t>() + plot.at("window_points").get<std::size_t>();
  ok = ok && xs.size() == rows && std::is_sorted(xs.begin(), xs.end());

  // Figure data: header + one row per plot point, bands nested.
  std::istringstream csv(io::plot_csv(j));
  std::string line;
  std::getline(csv, line);
  ok = ok && line == "x,edf_tail,center,lo95,hi95,lo99,hi99";
  std::size_t count = 0;
  while (std::getline(csv, line)) {
    const auto f = io::split(line);
    if (f.size() != 7) {
      ok = false;
      break;
    }
    std::vector<double> v;
    for (const auto& s : f) v.push_back(io::parse_double(s).value_or(NAN));
    ok = ok && v[5] <= v[3] && v[3] <= v[2] && v[2] <= v[4] && v[4] <= v[6];
    ++count;
  }
  ok = ok && count == rows;
  ok = ok && io::canonical_json(io::parse_json(io::canonical_json(j))) == io::canonical_json(j);
  o.require(ok, fmt("%s n=%zu rows=%zu", tag.c_str(), j.at("input").at("n").get<std::size_t>(), count));
}

// Random-walk-with-spikes price series in the shape of a daily power market.
TimeSeries spiky_series(std::size_t n, std::uint64_t seed) {
  const CounterStream u(Seed{seed});
  const double week[7] = {4, 5, 5, 5, 4, -6, -11};
  TimeSeries s;
  const Date start = std::chrono::sys_days{std::chrono::year{2005} / std::chrono::January / 3};
  double level = 45.0;
  for (std::size_t t = 0; t < n; ++t) {
    level += 0.8 * (u.uniform(3 * t) - 0.5);
    const double spike = u.uniform(3 * t + 1) > 0.985 ? 200.0 * u.uniform(3 * t + 2) : 0.0;
    s.dates.push_back(start + std::chrono::days{static_cast<int>(t)});
    s.values.push_back(level + 10.0 * std::sin(2 * std::numbers::pi * t / 365.25) + week[t % 7] + spike);
  }
  return s;
}

double range_of(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

void check_decomposition(Outcome& o, const std::string& tag, const TimeSeries& s, const DeseasonalizeOptions& opt) {
  const auto d = deseasonalize(s, opt);
  const double tol = 1e-9 * range_of(s.values);
  double worst = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    worst = std::max(worst, std::abs(s.values[i] - (d.trend[i] + d.weekly[i] + d.stochastic[i] - d.shift)));
  const bool min_exact = *std::min_element(d.stochastic.begin(), d.stochastic.end()) ==
                         *std::min_element(s.values.begin(), s.values.end());
  const auto base = price_changes(d);
  bool shift_exact = true;
  for (double c : {0.0, -3.5, 250.0}) {
    SeasonalDecomposition moved = d;
    moved.shift = c;
    for (std::size_t i = 0; i < s.size(); ++i) moved.stochastic[i] = moved.residual[i] + c;
    const auto delta = price_changes(moved);
    shift_exact = shift_exact && std::equal(delta.values().begin(), delta.values().end(), base.values().begin());
  }
  o.require(worst <= tol && min_exact && shift_exact,
            fmt("%s rec=%.1e min=%s dX=%s", tag.c_str(), worst, min_exact ? "exact" : "off",
                shift_exact ? "exact" : "off"));
}

}  // namespace

int main() {
  std::printf("dragonking acceptance suite\n");

  criterion(1, "Cauchy vs true tail, n=1000, R=2000", [] {
    Outcome o;
    within(o, study(Cauchy{0, 1}, TailFamily::power, Reference::truth, 1000, 2000), {9.6, 4.8, 1.1}, {2.0, 1.5, 0.8});
    return o;
  });

  criterion(2, "Pareto(2,1) vs true tail, n=1000, R=2000", [] {
    Outcome o;
    within(o, study(Pareto{2, 1}, TailFamily::power, Reference::truth, 1000, 2000), {9.1, 4.1, 0.9}, {2.0, 1.5, 0.8});
    return o;
  });

  criterion(3, "Cauchy fitted power tail is conservative", [] {
    Outcome o;
    const auto r = study(Cauchy{0, 1}, TailFamily::power, Reference::fitted, 1000, 2000);
    o.require(r.cells[0].rate < 0.07, fmt("90%%: %.2f%% < 7%%", 100.0 * r.cells[0].rate));
    return o;
  });

  criterion(4, "power fit rejects Hyp and Weibull at n=5000", [] {
    Outcome o;
    const auto hyp = study(Hyperbolic{2, 1}, TailFamily::power, Reference::fitted, 5000, 500);
    const auto wei = study(Weibull{1, 0.5}, TailFamily::power, Reference::fitted, 5000, 500);
    o.require(hyp.cells[0].rate >= 0.97, fmt("Hyp(2,1) 90%%: %.1f%% >= 97%%", 100.0 * hyp.cells[0].rate));
    o.require(wei.cells[0].rate >= 0.95, fmt("Weib(1,1/2) 90%%: %.1f%% >= 95%%", 100.0 * wei.cells[0].rate));
    return o;
  });

  criterion(5, "Weibull family: size and power, n=1000", [] {
    Outcome o;
    const auto wei = study(Weibull{1, 0.5}, TailFamily::weibull, Reference::fitted, 1000, 2000);
    within(o, wei, {10.6, 5.8, 2.4}, {2.5, 2.5, 2.5});
    const auto cau = study(Cauchy{0, 1}, TailFamily::weibull, Reference::fitted, 1000, 2000);
    o.require(cau.cells[0].rate >= 0.55, fmt("Cauchy 90%%: %.1f%% >= 55%%", 100.0 * cau.cells[0].rate));
    return o;
  });

  criterion(6, "drawdown worked example", [] {
    Outcome o;
    const auto dd = drawdowns(std::vector<double>{1, 2, 5, 4, 3, 3, 1, 3, 4, 3, 2, 3});
    std::vector<double> got;
    for (const auto& d : dd) got.push_back(d.magnitude);
    o.require(got == std::vector<double>{-0.8, -0.5},
              got.size() == 2 ? fmt("{%.17g, %.17g}", got[0], got[1]) : fmt("%zu drawdowns", got.size()));
    return o;
  });

  criterion(7, "pointwise CI arithmetic", [] {
    Outcome o;
    const auto ci = pointwise_ci(0.5, 100, ConfidenceSpec(0.05));
    o.require(std::abs(ci.lower - 0.402) <= 1e-5 && std::abs(ci.upper - 0.598) <= 1e-5,
              fmt("(%.5f, %.5f)", ci.lower, ci.upper));
    double worst = 0.0;
    for (double f : {0.001, 0.05, 0.3, 0.5, 0.77, 0.999})
      for (std::size_t n : {25u, 100u, 1000u, 12345u}) {
        const auto a = pointwise_ci(f, n, ConfidenceSpec(0.05));
        const auto b = pointwise_ci(f, 4 * n, ConfidenceSpec(0.05));
        worst = std::max(worst, std::abs((b.upper - b.lower) / (a.upper - a.lower) - 0.5));
      }
    o.require(worst <= 1e-12, fmt("halving err %.1e", worst));
    return o;
  });

  criterion(8, "95% CI coverage at the Weibull(1,1) median", [] {
    Outcome o;
    const double median = std::numbers::ln2;
    const auto ci = pointwise_ci(0.5, 1000, ConfidenceSpec(0.05));
    const Sampler draw(Weibull{1, 1});
    const Seed master{20110101};
    std::size_t covered = 0;
    for (std::uint64_t r = 0; r < 2000; ++r) {
      const Sample s(draw.draw(1000, derive_seed(master, r)));
      covered += ci.contains(edf_value(s, median));
    }
    const double pct = 100.0 * static_cast<double>(covered) / 2000.0;
    o.require(std::abs(pct - 95.0) <= 2.0, fmt("coverage %.2f%% vs 95+-2", pct));
    return o;
  });

  criterion(9, "exact-recovery fits and Weibull MLE", [] {
    Outcome o;
    std::vector<TailPoint> power, stretched;
    for (double x = 1.2; x < 60.0; x *= 1.1) {
      power.push_back({x, 0.2 * std::pow(x, -1.3)});
      stretched.push_back({x, std::exp(-1.7 * std::pow(x, 0.45))});
    }
    const auto p = std::get<PowerTail>(fit_power_tail(power).law);
    o.require(std::abs(p.b - 0.2) <= 1e-10 * 0.2 && std::abs(p.p + 1.3) <= 1e-10, fmt("power b=%.12g p=%.12g", p.b, p.p));
    const auto w = std::get<WeibullTail>(fit_weibull_tail(stretched).law);
    o.require(std::abs(w.beta - 1.7) <= 1e-10 * 1.7 && std::abs(w.tau - 0.45) <= 1e-10 * 0.45,
              fmt("weibull beta=%.12g tau=%.12g", w.beta, w.tau));
    const auto m = std::get<WeibullTail>(fit_weibull_mle(sample(Weibull{1, 1}, 10000, Seed{20110101})).law);
    o.require(std::abs(m.beta - 1.0) <= 0.05 && std::abs(m.tau - 1.0) <= 0.03,
              fmt("mle beta=%.4f tau=%.4f", m.beta, m.tau));
    return o;
  });

  criterion(10, "deseasonalization invariants", [] {
    Outcome o;
    // Synthetic: deterministic trend, weekly pattern and spikes.
    TimeSeries synth;
    const Date start = std::chrono::sys_days{std::chrono::year{2007} / std::chrono::January / 1};
    for (int t = 0; t < 730; ++t) {
      synth.dates.push_back(start + std::chrono::days{t});
      synth.values.push_back(30.0 + 0.01 * t + 5.0 * std::cos(2 * std::numbers::pi * t / 365.0) + (t % 7 >= 5 ? -7.0 : 3.0) +
                             (t % 97 == 13 ? 120.0 : 0.0));
    }
    DeseasonalizeOptions wavelet_mean, kernel_median;
    kernel_median.method = LtscMethod::kernel;
    kernel_median.stat = WeeklyStat::median;
    check_decomposition(o, "synthetic/wavelet", synth, wavelet_mean);
    check_decomposition(o, "synthetic/kernel", synth, kernel_median);
    for (std::uint64_t seed : {11u, 12u, 13u}) {
      const auto s = spiky_series(1096, seed);
      check_decomposition(o, fmt("random%llu/wavelet", static_cast<unsigned long long>(seed)), s, wavelet_mean);
      check_decomposition(o, fmt("random%llu/kernel", static_cast<unsigned long long>(seed)), s, kernel_median);
    }
    return o;
  });

  criterion(11, "synthetic pipelines and figure data", [] {
    Outcome o;
    // Pareto-like claim sizes through the power-tail test.
    {
      const auto claims = sample(Pareto{3, 1.2}, 2000, Seed{101});
      io::ReportSettings s;
      s.config = {{0.05, 0.01}, {1, 4, 8}};
      check_report(o, "claims", io::report_to_json(io::run_report(claims, s), s), 6);
    }
    // Weibull-like drawdowns of a random-walk price, left tail.
    {
      const CounterStream u(Seed{202});
      std::vector<double> price{100.0};
      for (std::uint64_t i = 1; i < 20000; ++i) price.push_back(price.back() * std::exp(0.01 * (u.uniform(i) - 0.5)));
      const auto dd = drawdowns(price);
      const auto mags = drawdown_sample(dd);
      io::ReportSettings s;
      s.family = TailFamily::weibull;
      s.window = {0.25, 0.025, Side::left};
      s.config = {{0.05, 0.01}, {1, 4}};
      check_report(o, "drawdowns", io::report_to_json(io::run_report(mags, s), s), 4);
    }
    // Spiky seasonal series through deseasonalize, then both tails of the changes.
    {
      const auto series = spiky_series(1461, 303);
      const auto d = deseasonalize(series);
      const std::vector<SeasonalDecomposition> parts{d};
      const auto meta = io::decomposition_metadata_json(parts).at("series")[0];
      const auto changes = price_changes(d);
      for (Side side : {Side::right, Side::left}) {
        io::ReportSettings s;
        s.window = {0.10, 0.01, side};
        s.config = {{0.05, 0.01}, {4}};
        const auto j = io::report_to_json(io::run_report(changes, s), s, meta);
        check_report(o, std::string("spot/") + to_string(side), j, 2);
        o.require(!j.at("preprocessing").is_null(), "metadata embedded");
      }
    }
    return o;
  });

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
