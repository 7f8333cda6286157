#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <vector>

#include "dragonking/error.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/special.hpp"
#include "dragonking/tail_model.hpp"

namespace dragonking {

// Empirical distribution function with the strict inequality
//   Fn(x) = (1/n) #{x_i < x},
// so Fn(x_(n)) = (n-1)/n. The right-tail counterpart applies the same strict
// rule in the tail direction,
//   Tn(x) = (1/n) #{x_i > x},
// i.e. Fn of the mirrored sample. At the k-th largest observation Tn = (k-1)/n.
// Note Tn(x) != 1 - Fn(x) at sample points.
//
// Holds a pointer to the sample; the sample must outlive the Edf.
class Edf {
 public:
  explicit Edf(const Sample& sample) : sample_(&sample) {}

  double operator()(double x) const {
    const auto sorted = sample_->sorted();
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin();
    return static_cast<double>(below) / static_cast<double>(sorted.size());
  }

  double upper_tail(double x) const {
    const auto sorted = sample_->sorted();
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), x);
    return static_cast<double>(above) / static_cast<double>(sorted.size());
  }

  // Empirical tail value on the given side: Fn(x) on the left, Tn(x) on the right.
  double tail(double x, Side side) const { return side == Side::left ? (*this)(x) : upper_tail(x); }

  const Sample& sample() const noexcept { return *sample_; }

 private:
  const Sample* sample_;
};

inline double edf_value(const Sample& sample, double x) { return Edf(sample)(x); }

// Significance level alpha with the two-sided standard normal quantiles.
class ConfidenceSpec {
 public:
  explicit ConfidenceSpec(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      std::ostringstream msg;
      msg << "ConfidenceSpec: alpha " << alpha << " is outside (0,1)";
      throw domain_error(msg.str());
    }
    z_lo_ = normal_quantile(0.5 * alpha);
    z_hi_ = -z_lo_;
  }

  double alpha() const noexcept { return alpha_; }
  double level() const noexcept { return 1.0 - alpha_; }
  double z_lo() const noexcept { return z_lo_; }
  double z_hi() const noexcept { return z_hi_; }

 private:
  double alpha_;
  double z_lo_ = 0.0;
  double z_hi_ = 0.0;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double v) const noexcept { return v >= lower && v <= upper; }
};

// Pointwise CLT interval for Fn(x) around F(x):
//   F + sqrt(F(1-F)/n) z_{alpha/2} < Fn < F + sqrt(F(1-F)/n) z_{1-alpha/2}.
// No continuity correction. F in {0,1} is rejected: the normalisation
// divides by sqrt(F(1-F)).
inline Interval pointwise_ci(double f_x, std::size_t n, const ConfidenceSpec& spec) {
  if (!(f_x > 0.0 && f_x < 1.0)) {
    std::ostringstream msg;
    msg << "pointwise_ci: F(x) = " << f_x << " gives a degenerate interval; need 0 < F(x) < 1";
    throw domain_error(msg.str());
  }
  if (n < 1) throw domain_error("pointwise_ci: n must be at least 1");
  const double h = std::sqrt(f_x * (1.0 - f_x) / static_cast<double>(n));
  return {f_x + h * spec.z_lo(), f_x + h * spec.z_hi()};
}

// Pointwise CI curves for the empirical tail around a tail model. These are
// pointwise intervals, not a simultaneous confidence band.
struct Band {
  Side side = Side::right;
  double alpha = 0.05;
  std::vector<double> xs;          // tail abscissae
  std::vector<double> center;      // M(x)
  std::vector<double> half_width;  // z_{1-alpha/2} sqrt(M(1-M)/n)
  std::vector<double> lower;       // clipped to [0,1]
  std::vector<double> upper;       // clipped to [0,1]
};

enum class OutOfRange { raise, saturate };

// With OutOfRange::saturate, abscissae where M(x) leaves (0,1) (e.g. exp
// underflow far in the tail) get a zero-width band at the clipped center
// instead of an error; used for plot grids only.
inline Band tail_band(const TailModel& model, std::span<const double> xs, std::size_t n,
                      const ConfidenceSpec& spec, OutOfRange policy = OutOfRange::raise) {
  if (n < 1) throw domain_error("tail_band: n must be at least 1");
  Band band;
  band.side = model.side;
  band.alpha = spec.alpha();
  band.xs.assign(xs.begin(), xs.end());
  band.center.reserve(xs.size());
  band.half_width.reserve(xs.size());
  band.lower.reserve(xs.size());
  band.upper.reserve(xs.size());
  for (const double x : xs) {
    const double m = model(x);
    if (!(m > 0.0 && m < 1.0)) {
      if (policy == OutOfRange::raise) {
        std::ostringstream msg;
        msg << "tail_band: model tail value " << m << " at x = " << x << " is outside (0,1)";
        throw band_domain_error(msg.str(), x);
      }
      const double c = std::isnan(m) ? 0.0 : std::clamp(m, 0.0, 1.0);
      band.center.push_back(c);
      band.half_width.push_back(0.0);
      band.lower.push_back(c);
      band.upper.push_back(c);
      continue;
    }
    const double h = std::sqrt(m * (1.0 - m) / static_cast<double>(n));
    band.center.push_back(m);
    band.half_width.push_back(h * spec.z_hi());
    band.lower.push_back(std::clamp(m + h * spec.z_lo(), 0.0, 1.0));
    band.upper.push_back(std::clamp(m + h * spec.z_hi(), 0.0, 1.0));
  }
  return band;
}

}  // namespace dragonking
