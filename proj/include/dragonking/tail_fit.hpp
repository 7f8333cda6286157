#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "dragonking/error.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/tail_model.hpp"

namespace dragonking {

struct TailPoint {
  double x = 0.0;
  double tail_prob = 0.0;
};

// Ranks [ceil((1-upper)n)+1, floor((1-cut)n)] in ascending order. A small
// slack absorbs representation error, e.g. (1-0.1)*100 = 90.00000000000001.
inline RankRange resolve_window(std::size_t n, const TailWindow& window) {
  if (!(window.cut_frac > 0.0 && window.cut_frac < window.upper_frac && window.upper_frac < 1.0)) {
    std::ostringstream msg;
    msg << "tail window " << window.upper_frac << ":" << window.cut_frac
        << " must satisfy 0 < cut < upper < 1";
    throw config_error(msg.str());
  }
  constexpr double slack = 1e-9;
  const double dn = static_cast<double>(n);
  const double first = std::ceil((1.0 - window.upper_frac) * dn - slack) + 1.0;
  const double last = std::floor((1.0 - window.cut_frac) * dn + slack);
  if (last < first + 1.0) {
    std::ostringstream msg;
    msg << "tail window " << window.upper_frac << ":" << window.cut_frac << " on n = " << n
        << " resolves to ranks " << first << ".." << last << "; at least two points are needed";
    throw window_error(msg.str());
  }
  return {static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
}

// Window points (x_(i), (n-i)/n) of the oriented sample (negated for a left
// tail). (n-i)/n is the empirical tail Tn at x_(i) when there are no ties;
// tied values keep their rank-based probabilities.
inline std::vector<TailPoint> select_tail_window(const Sample& sample, const TailWindow& window) {
  const std::size_t n = sample.size();
  const RankRange ranks = resolve_window(n, window);
  const auto sorted = sample.sorted();
  std::vector<TailPoint> points;
  points.reserve(ranks.count());
  for (std::size_t i = ranks.first; i <= ranks.last; ++i) {
    // Ascending rank i of -x is descending rank i of x.
    const double x = window.side == Side::right ? sorted[i - 1] : -sorted[n - i];
    if (!(x > 0.0)) {
      std::ostringstream msg;
      msg << "select_tail_window: tail abscissa " << x << " at rank " << i
          << " is not positive; log-scale fitting needs x > 0";
      throw domain_error(msg.str());
    }
    points.push_back({x, static_cast<double>(n - i) / static_cast<double>(n)});
  }
  return points;
}

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rss = 0.0;
};

inline LineFit ordinary_least_squares(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw fit_error("least squares: all abscissae are equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    fit.rss += r * r;
  }
  return fit;
}

inline void check_points(std::span<const TailPoint> points, const char* op) {
  if (points.size() < 2) {
    std::ostringstream msg;
    msg << op << ": need at least 2 points, got " << points.size();
    throw fit_error(msg.str());
  }
  for (const auto& pt : points) {
    if (!(pt.x > 0.0) || !std::isfinite(pt.x)) {
      std::ostringstream msg;
      msg << op << ": abscissa " << pt.x << " must be positive and finite";
      throw domain_error(msg.str());
    }
    if (!(pt.tail_prob > 0.0 && pt.tail_prob < 1.0)) {
      std::ostringstream msg;
      msg << op << ": tail probability " << pt.tail_prob << " is outside (0,1)";
      throw domain_error(msg.str());
    }
  }
}

}  // namespace detail

// OLS of log(tail_prob) on log(x): slope p, intercept log b.
inline TailModel fit_power_tail(std::span<const TailPoint> points) {
  detail::check_points(points, "fit_power_tail");
  std::vector<double> lx(points.size());
  std::vector<double> lq(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    lx[i] = std::log(points[i].x);
    lq[i] = std::log(points[i].tail_prob);
  }
  const auto line = detail::ordinary_least_squares(lx, lq);
  TailModel model;
  model.law = PowerTail{std::exp(line.intercept), line.slope};
  model.diagnostics = {line.rss, points.size(), "ols_loglog"};
  return model;
}

enum class WeibullFitMethod {
  // Least squares on the tail probabilities themselves, started from the
  // double-log line.
  probability_space,
  // OLS of log(-log q) on log x only.
  double_log,
};

// Fits exp(-beta x^tau) to the tail points.
inline TailModel fit_weibull_tail(std::span<const TailPoint> points,
                                  WeibullFitMethod method = WeibullFitMethod::probability_space) {
  detail::check_points(points, "fit_weibull_tail");
  const std::size_t m = points.size();
  std::vector<double> lx(m);
  std::vector<double> lz(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(points[i].x);
    lz[i] = std::log(-std::log(points[i].tail_prob));
  }
  const auto line = detail::ordinary_least_squares(lx, lz);
  if (!(line.slope > 0.0)) {
    std::ostringstream msg;
    msg << "fit_weibull_tail: fitted shape " << line.slope << " is not positive";
    throw fit_error(msg.str());
  }

  TailModel model;
  if (method == WeibullFitMethod::double_log) {
    model.law = WeibullTail{std::exp(line.intercept), line.slope};
    model.diagnostics = {line.rss, m, "ols_double_log"};
    return model;
  }

  // Damped Gauss-Newton on theta = (c, tau) with u_i = exp(c + tau (l_i - lbar)),
  // fitted value exp(-u_i). Centring the log-abscissae decouples the two
  // parameters.
  double lbar = 0.0;
  for (double v : lx) lbar += v;
  lbar /= static_cast<double>(m);
  double c = line.intercept + line.slope * lbar;
  double tau = line.slope;

  auto residual_ss = [&](double cc, double tt) {
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double r = points[i].tail_prob - std::exp(-std::exp(cc + tt * (lx[i] - lbar)));
      rss += r * r;
    }
    return rss;
  };

  double rss = residual_ss(c, tau);
  double damping = 1e-3;
  bool converged = false;
  for (int iter = 0; iter < 500 && !converged; ++iter) {
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double d = lx[i] - lbar;
      const double u = std::exp(c + tau * d);
      const double fitted = std::exp(-u);
      const double j1 = -u * fitted;
      const double j2 = j1 * d;
      const double r = points[i].tail_prob - fitted;
      a11 += j1 * j1;
      a12 += j1 * j2;
      a22 += j2 * j2;
      g1 += j1 * r;
      g2 += j2 * r;
    }
    if (a11 == 0.0 || a22 == 0.0) {  // flat objective: keep the start
      converged = true;
      break;
    }
    bool stepped = false;
    while (damping < 1e16) {
      const double b11 = a11 * (1.0 + damping);
      const double b22 = a22 * (1.0 + damping);
      const double det = b11 * b22 - a12 * a12;
      const double dc = (g1 * b22 - g2 * a12) / det;
      const double dt = (b11 * g2 - a12 * g1) / det;
      const double trial_tau = tau + dt;
      const double trial_rss = trial_tau > 0.0 ? residual_ss(c + dc, trial_tau)
                                               : std::numeric_limits<double>::infinity();
      if (trial_rss <= rss) {
        const bool tiny = std::abs(dc) <= 1e-13 * (1.0 + std::abs(c)) &&
                          std::abs(dt) <= 1e-13 * (1.0 + std::abs(tau));
        c += dc;
        tau = trial_tau;
        rss = trial_rss;
        damping = std::max(damping * 0.1, 1e-12);
        stepped = true;
        converged = tiny;
        break;
      }
      damping *= 10.0;
    }
    // No downhill step at any damping: at a minimum to working precision.
    if (!stepped) converged = true;
  }
  if (!converged) throw numerical_error("fit_weibull_tail: least squares did not converge in 500 iterations");

  model.law = WeibullTail{std::exp(c - tau * lbar), tau};
  model.diagnostics = {rss, m, "ls_probability"};
  return model;
}

// Selects the window and fits the requested family, filling window metadata.
inline TailModel fit_tail(const Sample& sample, const TailWindow& window, TailFamily family,
                          WeibullFitMethod weibull_method = WeibullFitMethod::probability_space) {
  const auto points = select_tail_window(sample, window);
  TailModel model = family == TailFamily::power ? fit_power_tail(points)
                                                : fit_weibull_tail(points, weibull_method);
  model.side = window.side;
  model.window = window;
  model.ranks = resolve_window(sample.size(), window);
  return model;
}

// Maximum likelihood for F(x) = 1 - exp(-beta x^tau) on the whole sample.
// tau solves the profile score
//   g(tau) = 1/tau + mean(log x) - sum x^tau log x / sum x^tau = 0,
// which is strictly decreasing; then beta = n / sum x^tau. With fixed_tau the
// shape is held and only beta is estimated.
inline TailModel fit_weibull_mle(const Sample& sample, std::optional<double> fixed_tau = std::nullopt) {
  const std::size_t n = sample.size();
  if (n < 2) throw fit_error("fit_weibull_mle: need at least 2 observations");
  if (!(sample.min() > 0.0)) {
    std::ostringstream msg;
    msg << "fit_weibull_mle: observation " << sample.min() << " is not positive";
    throw domain_error(msg.str());
  }
  if (!fixed_tau && sample.min() == sample.max())
    throw fit_error("fit_weibull_mle: all observations are identical; the shape estimate diverges");

  const auto values = sample.sorted();
  std::vector<double> d(n);
  double mean_log = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_log += std::log(values[i]);
  mean_log /= static_cast<double>(n);
  double d_max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = std::log(values[i]) - mean_log;
    d_max = std::max(d_max, d[i]);
  }

  // Weighted moments of d under w_i = x_i^tau (rescaled by the largest term).
  struct Moments {
    double s0, m1, var;
  };
  auto moments = [&](double tau) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (double di : d) {
      const double w = std::exp(tau * (di - d_max));
      s0 += w;
      s1 += w * di;
      s2 += w * di * di;
    }
    const double m1 = s1 / s0;
    return Moments{s0, m1, std::max(s2 / s0 - m1 * m1, 0.0)};
  };

  double tau = 0.0;
  if (fixed_tau) {
    tau = *fixed_tau;
    if (!(tau > 0.0)) throw domain_error("fit_weibull_mle: fixed shape must be positive");
  } else {
    double lo = 1e-3;
    double hi = 50.0;
    auto score = [&](double t) { return 1.0 / t - moments(t).m1; };
    if (!(score(lo) > 0.0) || !(score(hi) < 0.0)) {
      std::ostringstream msg;
      msg << "fit_weibull_mle: shape root not bracketed in [" << lo << ", " << hi
          << "] (score " << score(lo) << ", " << score(hi) << ")";
      throw numerical_error(msg.str());
    }
    tau = 1.0;
    bool converged = false;
    for (int iter = 0; iter < 300; ++iter) {
      const auto mo = moments(tau);
      const double g = 1.0 / tau - mo.m1;
      if (std::abs(g) <= 1e-10) {
        converged = true;
        break;
      }
      if (g > 0.0) lo = tau; else hi = tau;
      const double slope = -1.0 / (tau * tau) - mo.var;
      double next = tau - g / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      tau = next;
    }
    if (!converged) throw numerical_error("fit_weibull_mle: profile score did not converge");
  }

  // beta = n / sum x^tau, with x^tau = exp(tau (mean_log + d_max)) w.
  const double log_sum = tau * (mean_log + d_max) + std::log(moments(tau).s0);
  const double beta = std::exp(std::log(static_cast<double>(n)) - log_sum);

  TailModel model;
  model.law = WeibullTail{beta, tau};
  model.side = Side::right;
  model.ranks = {1, n};
  model.diagnostics = {0.0, n, fixed_tau ? "mle_fixed_shape" : "mle"};
  return model;
}

}  // namespace dragonking
