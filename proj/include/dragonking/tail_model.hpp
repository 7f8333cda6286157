#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <type_traits>
#include <variant>

namespace dragonking {

enum class Side { left, right };

inline const char* to_string(Side side) { return side == Side::left ? "left" : "right"; }

enum class TailFamily { power, weibull };

inline const char* to_string(TailFamily family) {
  return family == TailFamily::power ? "power" : "weibull";
}

// Survival-style tail functions, evaluated at the tail abscissa (x for a
// right tail, -x for a left tail).

// b * x^p
struct PowerTail {
  double b = 1.0;
  double p = -1.0;
};

// exp(-beta * x^tau)
struct WeibullTail {
  double beta = 1.0;
  double tau = 1.0;
};

// lambda^alpha (x + lambda)^(-alpha); the exact Pareto survival used as the
// true reference, which is not a pure power at moderate x.
struct ParetoSurvival {
  double lambda = 1.0;
  double alpha = 1.0;
};

using TailLaw = std::variant<PowerTail, WeibullTail, ParetoSurvival>;

inline double evaluate(const TailLaw& law, double x) {
  return std::visit(
      [x](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PowerTail>) {
          return t.b * std::pow(x, t.p);
        } else if constexpr (std::is_same_v<T, WeibullTail>) {
          return std::exp(-t.beta * std::pow(x, t.tau));
        } else {
          return std::pow(t.lambda / (x + t.lambda), t.alpha);
        }
      },
      law);
}

inline std::string law_name(const TailLaw& law) {
  return std::visit(
      [](const auto& t) -> std::string {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, PowerTail>) return "power";
        else if constexpr (std::is_same_v<T, WeibullTail>) return "weibull";
        else return "pareto_survival";
      },
      law);
}

// Calibration window: order statistics between the upper_frac and cut_frac
// largest observations, e.g. the 10%-1% largest.
struct TailWindow {
  double upper_frac = 0.10;
  double cut_frac = 0.01;
  Side side = Side::right;
};

// Resolved ascending ranks [first, last] (1-based, inclusive).
struct RankRange {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const noexcept { return last >= first ? last - first + 1 : 0; }
};

struct FitDiagnostics {
  double rss = 0.0;
  std::size_t points = 0;
  std::string method;
};

struct TailModel {
  TailLaw law;
  Side side = Side::right;
  TailWindow window;
  RankRange ranks;
  FitDiagnostics diagnostics;

  // M(x) at a tail abscissa.
  double operator()(double abscissa) const { return evaluate(law, abscissa); }
};

}  // namespace dragonking
