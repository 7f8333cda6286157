#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dragonking/error.hpp"
#include "dragonking/random.hpp"
#include "dragonking/sample.hpp"
#include "dragonking/special.hpp"

namespace dragonking {

// F(x) = arctan((x - mu)/sigma)/pi + 1/2
struct Cauchy {
  double mu = 0.0;
  double sigma = 1.0;
};

// Shifted ("American") Pareto with support x >= 0:
// F(x) = 1 - lambda^alpha (x + lambda)^(-alpha)
struct Pareto {
  double lambda = 1.0;
  double alpha = 1.0;
};

// f(x) = exp(-alpha sqrt(delta^2 + x^2) + beta x) / normaliser. Only the
// symmetric case beta = 0 is used by the studies; the normaliser then is
// 2 delta K1(delta alpha).
struct Hyperbolic {
  double alpha = 1.0;
  double delta = 1.0;
  double beta = 0.0;
};

// Stretched exponential: F(x) = 1 - exp(-beta x^tau), x >= 0.
struct Weibull {
  double beta = 1.0;
  double tau = 1.0;
};

using DistributionModel = std::variant<Cauchy, Pareto, Hyperbolic, Weibull>;

namespace detail {

[[noreturn]] inline void bad_parameter(const char* law, const char* name, double value) {
  std::ostringstream msg;
  msg << law << ": parameter " << name << " = " << value << " must be positive and finite";
  throw domain_error(msg.str());
}

inline void require_positive(const char* law, const char* name, double value) {
  if (!(value > 0.0) || !std::isfinite(value)) bad_parameter(law, name, value);
}

inline void require_finite_x(const char* op, double x) {
  if (!std::isfinite(x)) {
    std::ostringstream msg;
    msg << op << ": argument " << x << " is not finite";
    throw domain_error(msg.str());
  }
}

inline void require_probability(const char* op, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << op << ": probability " << p << " is outside (0,1)";
    throw domain_error(msg.str());
  }
}

template <class>
inline constexpr bool always_false = false;

}  // namespace detail

inline void validate(const DistributionModel& model) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          if (!std::isfinite(m.mu)) detail::bad_parameter("Cauchy", "mu", m.mu);
          detail::require_positive("Cauchy", "sigma", m.sigma);
        } else if constexpr (std::is_same_v<T, Pareto>) {
          detail::require_positive("Pareto", "lambda", m.lambda);
          detail::require_positive("Pareto", "alpha", m.alpha);
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          detail::require_positive("Hyperbolic", "alpha", m.alpha);
          detail::require_positive("Hyperbolic", "delta", m.delta);
          if (!(std::abs(m.beta) < m.alpha)) {
            std::ostringstream msg;
            msg << "Hyperbolic: |beta| = " << std::abs(m.beta) << " must be below alpha = " << m.alpha;
            throw domain_error(msg.str());
          }
        } else if constexpr (std::is_same_v<T, Weibull>) {
          detail::require_positive("Weibull", "beta", m.beta);
          detail::require_positive("Weibull", "tau", m.tau);
        } else {
          static_assert(detail::always_false<T>);
        }
      },
      model);
}

// Short label in the style of the study tables, e.g. "Pareto(2,1)".
inline std::string label(const DistributionModel& model) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          out << "Cauchy(" << m.mu << "," << m.sigma << ")";
        } else if constexpr (std::is_same_v<T, Pareto>) {
          out << "Pareto(" << m.lambda << "," << m.alpha << ")";
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          out << "Hyp(" << m.alpha << "," << m.delta;
          if (m.beta != 0.0) out << "," << m.beta;
          out << ")";
        } else {
          out << "Weib(" << m.beta << "," << m.tau << ")";
        }
      },
      model);
  return out.str();
}

// ---------------------------------------------------------------------------
// Hyperbolic law: density and numerically integrated tails
// ---------------------------------------------------------------------------

namespace detail {

struct HyperbolicDensity {
  double alpha, delta, beta, log_scale;

  explicit HyperbolicDensity(const Hyperbolic& m)
      : alpha(m.alpha), delta(m.delta), beta(m.beta), log_scale(0.0) {
    const double gamma = std::sqrt(alpha * alpha - beta * beta);
    // exp(delta gamma) is folded into the exponent so nothing underflows.
    log_scale = delta * gamma + std::log(gamma / (2.0 * alpha * delta * bessel_k1_scaled(delta * gamma)));
  }

  double operator()(double x) const {
    return std::exp(-alpha * std::hypot(delta, x) + beta * x + log_scale);
  }
};

inline constexpr double hyperbolic_quad_tol = 1e-14;

// Integral of the density over [x, inf).
inline double hyperbolic_upper(const HyperbolicDensity& f, double x) {
  return integrate_to_infinity(f, x, hyperbolic_quad_tol).value;
}

// Integral of the density over (-inf, x].
inline double hyperbolic_lower(const HyperbolicDensity& f, double x) {
  auto mirrored = [&f](double t) { return f(-t); };
  return integrate_to_infinity(mirrored, -x, hyperbolic_quad_tol).value;
}

}  // namespace detail

inline double hyperbolic_pdf(const Hyperbolic& model, double x) {
  validate(model);
  return detail::HyperbolicDensity(model)(x);
}

// ---------------------------------------------------------------------------
// cdf / survival / quantile
// ---------------------------------------------------------------------------

inline double cdf(const DistributionModel& model, double x) {
  validate(model);
  detail::require_finite_x("cdf", x);
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          return std::atan((x - m.mu) / m.sigma) / std::numbers::pi + 0.5;
        } else if constexpr (std::is_same_v<T, Pareto>) {
          if (x <= 0.0) return 0.0;
          return -std::expm1(m.alpha * (std::log(m.lambda) - std::log(x + m.lambda)));
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          const detail::HyperbolicDensity f(m);
          return x < 0.0 ? detail::hyperbolic_lower(f, x) : 1.0 - detail::hyperbolic_upper(f, x);
        } else {
          if (x <= 0.0) return 0.0;
          return -std::expm1(-m.beta * std::pow(x, m.tau));
        }
      },
      model);
}

// 1 - F(x), computed directly so that far right tails keep relative precision.
inline double survival(const DistributionModel& model, double x) {
  validate(model);
  detail::require_finite_x("survival", x);
  return std::visit(
      [x](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          return std::atan2(m.sigma, x - m.mu) / std::numbers::pi;
        } else if constexpr (std::is_same_v<T, Pareto>) {
          if (x <= 0.0) return 1.0;
          return std::pow(m.lambda / (x + m.lambda), m.alpha);
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          const detail::HyperbolicDensity f(m);
          return x < 0.0 ? 1.0 - detail::hyperbolic_lower(f, x) : detail::hyperbolic_upper(f, x);
        } else {
          if (x <= 0.0) return 1.0;
          return std::exp(-m.beta * std::pow(x, m.tau));
        }
      },
      model);
}

namespace detail {

// Solves log(tail(x)) = log(target) for a monotone decreasing tail with
// tail'(x) = -density(x), starting from x = start. Newton in log space with a
// bisection safeguard.
template <class Tail, class Density>
double solve_tail(const Tail& tail, const Density& density, double target, double start,
                  double step) {
  double lo = start;
  double hi = start + step;
  while (tail(hi) > target) {
    lo = hi;
    step *= 2.0;
    hi = start + step;
    if (!std::isfinite(hi)) throw numerical_error("quantile: failed to bracket the root");
  }
  const double log_target = std::log(target);
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double t = tail(x);
    const double g = std::log(t) - log_target;
    if (g > 0.0) lo = x; else hi = x;
    if (std::abs(g) < 1e-12) return x;
    const double slope = -density(x) / t;
    double next = x - g / slope;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-14 * (1.0 + std::abs(x))) return next;
    x = next;
  }
  std::ostringstream msg;
  msg << "quantile: root search for tail probability " << target << " did not converge";
  throw numerical_error(msg.str());
}

inline double hyperbolic_quantile(const Hyperbolic& m, double p) {
  const HyperbolicDensity f(m);
  const double step = m.delta + 1.0 / m.alpha;
  auto upper = [&f](double x) { return hyperbolic_upper(f, x); };
  auto lower_mirror = [&f](double x) { return hyperbolic_lower(f, -x); };
  auto density_mirror = [&f](double x) { return f(-x); };
  // Solve in whichever tail holds the target, so small tail masses keep
  // their relative precision.
  if (p >= lower_mirror(0.0)) return solve_tail(upper, f, 1.0 - p, 0.0, step);
  return -solve_tail(lower_mirror, density_mirror, p, 0.0, step);
}

}  // namespace detail

inline double quantile(const DistributionModel& model, double p) {
  validate(model);
  detail::require_probability("quantile", p);
  return std::visit(
      [p](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          return m.mu + m.sigma * std::tan(std::numbers::pi * (p - 0.5));
        } else if constexpr (std::is_same_v<T, Pareto>) {
          return m.lambda * std::expm1(-std::log1p(-p) / m.alpha);
        } else if constexpr (std::is_same_v<T, Hyperbolic>) {
          return detail::hyperbolic_quantile(m, p);
        } else {
          return std::pow(-std::log1p(-p) / m.beta, 1.0 / m.tau);
        }
      },
      model);
}

// ---------------------------------------------------------------------------
// Sampling by inversion
// ---------------------------------------------------------------------------

// Inverse of the symmetric hyperbolic cdf from a precomputed table. Nodes are
// uniform in x on [0, x_max]; x is interpolated as a cubic Hermite function of
// y = -log S(x), whose slope dx/dy = S(x)/f(x) is known exactly at the nodes.
class HyperbolicTable {
 public:
  static constexpr std::size_t node_count = 4096;

  explicit HyperbolicTable(const Hyperbolic& model) : model_(model), density_(model) {
    if (model.beta != 0.0) throw domain_error("HyperbolicTable: only the symmetric law (beta = 0) is tabulated");
    // Right end where the upper tail drops below the smallest uniform (2^-54).
    double x_max = model.delta + 1.0 / model.alpha;
    while (detail::hyperbolic_upper(density_, x_max) > 1e-18) x_max *= 1.5;

    x_.resize(node_count);
    y_.resize(node_count);
    slope_.resize(node_count);
    std::vector<double> tail(node_count);
    for (std::size_t i = 0; i < node_count; ++i)
      x_[i] = x_max * static_cast<double>(i) / static_cast<double>(node_count - 1);
    tail.back() = detail::hyperbolic_upper(density_, x_.back());
    for (std::size_t i = node_count - 1; i-- > 0;)
      tail[i] = tail[i + 1] + dragonking::gauss_kronrod_15(density_, x_[i], x_[i + 1]);
    for (std::size_t i = 0; i < node_count; ++i) {
      y_[i] = -std::log(tail[i]);
      slope_[i] = tail[i] / density_(x_[i]);
    }
  }

  // x with upper tail mass q, q in (0, 0.5].
  double upper_quantile(double q) const {
    const double y = -std::log(q);
    if (y <= y_.front()) return 0.0;
    if (y >= y_.back()) {
      return detail::solve_tail([this](double x) { return detail::hyperbolic_upper(density_, x); },
                                density_, q, x_.back(), model_.delta + 1.0 / model_.alpha);
    }
    const auto it = std::upper_bound(y_.begin(), y_.end(), y);
    const std::size_t j = static_cast<std::size_t>(it - y_.begin()) - 1;
    const double h = y_[j + 1] - y_[j];
    const double t = (y - y_[j]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * x_[j] + (t3 - 2 * t2 + t) * h * slope_[j] +
           (-2 * t3 + 3 * t2) * x_[j + 1] + (t3 - t2) * h * slope_[j + 1];
  }

  double from_uniform(double u) const {
    return u >= 0.5 ? upper_quantile(1.0 - u) : -upper_quantile(u);
  }

 private:
  Hyperbolic model_;
  detail::HyperbolicDensity density_;
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

// Reusable inversion sampler. Construction may be expensive (hyperbolic table
// set-up); draws are pure functions of (seed, n).
class Sampler {
 public:
  explicit Sampler(DistributionModel model) : model_(std::move(model)) {
    validate(model_);
    if (const auto* h = std::get_if<Hyperbolic>(&model_); h != nullptr && h->beta == 0.0)
      table_.emplace(*h);
  }

  const DistributionModel& model() const noexcept { return model_; }

  double from_uniform(double u) const {
    if (table_) return table_->from_uniform(u);
    return std::visit(
        [u, this](const auto& m) -> double {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, Cauchy>) {
            return m.mu + m.sigma * std::tan(std::numbers::pi * (u - 0.5));
          } else if constexpr (std::is_same_v<T, Pareto>) {
            // u plays the role of the survival probability.
            return m.lambda * std::expm1(-std::log(u) / m.alpha);
          } else if constexpr (std::is_same_v<T, Hyperbolic>) {
            return quantile(model_, u);
          } else {
            return std::pow(-std::log(u) / m.beta, 1.0 / m.tau);
          }
        },
        model_);
  }

  std::vector<double> draw(std::size_t n, Seed seed) const {
    if (n < 1) throw domain_error("sample: n must be at least 1");
    const CounterStream stream(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = from_uniform(stream.uniform(i));
    return out;
  }

 private:
  DistributionModel model_;
  std::optional<HyperbolicTable> table_;
};

inline Sample sample(const DistributionModel& model, std::size_t n, Seed seed) {
  return Sample(Sampler(model).draw(n, seed));
}

}  // namespace dragonking
