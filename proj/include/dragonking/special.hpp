#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "dragonking/error.hpp"

namespace dragonking {

// ---------------------------------------------------------------------------
// Standard normal distribution
// ---------------------------------------------------------------------------

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse of the standard normal cdf. Acklam's rational approximation
// (relative error ~1e-9) polished by one Halley step against erfc, which
// brings the result to within a few ulp.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "normal_quantile: probability " << p << " is outside (0,1)";
    throw domain_error(msg.str());
  }
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; work in the tail that is not subject to cancellation.
  // Both branches evaluate Phi(x) - p; 1 - p is exact for p >= 0.5.
  const double e = (x <= 0.0) ? normal_cdf(x) - p
                              : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// ---------------------------------------------------------------------------
// Modified Bessel function of the second (third) kind, order one
// ---------------------------------------------------------------------------

namespace detail {

// Power series, valid for small z (used for z <= 2):
//   K1(z) = 1/z + ln(z/2) I1(z) - (z/4) sum_k [psi(k+1) + psi(k+2)] (z^2/4)^k / (k!(k+1)!)
inline double bessel_k1_series(double z) {
  constexpr double euler_gamma = std::numbers::egamma;
  const double t = 0.25 * z * z;
  double term = 1.0;
  double i1_sum = 0.0;
  double psi_sum = 0.0;
  double harmonic = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double psi = (harmonic - euler_gamma) + (harmonic + 1.0 / (k + 1) - euler_gamma);
    i1_sum += term;
    psi_sum += psi * term;
    harmonic += 1.0 / (k + 1);
    term *= t / ((k + 1.0) * (k + 2.0));
    if (term < 1e-18 * i1_sum) break;
  }
  return 1.0 / z + std::log(0.5 * z) * (0.5 * z) * i1_sum - 0.25 * z * psi_sum;
}

// exp(z) * K1(z) by Steed's continued fraction (Temme's CF2 with mu = 0),
// valid for z >= 2.
inline double bessel_k1_scaled_cf(double z) {
  double b = 2.0 * (1.0 + z);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  constexpr double a1 = 0.25;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  bool converged = false;
  for (int i = 1; i < 10000; ++i) {
    a -= 2.0 * i;
    c = -a * c / (i + 1.0);
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < 1e-17) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "bessel_k1: continued fraction did not converge at z=" << z;
    throw numerical_error(msg.str());
  }
  h *= a1;
  const double k0_scaled = std::sqrt(std::numbers::pi / (2.0 * z)) / s;
  return k0_scaled * (z + 0.5 - h) / z;
}

inline void check_bessel_argument(double z) {
  if (!(z > 0.0) || !std::isfinite(z)) {
    std::ostringstream msg;
    msg << "bessel_k1: argument " << z << " must be positive and finite";
    throw domain_error(msg.str());
  }
}

}  // namespace detail

inline double bessel_k1(double z) {
  detail::check_bessel_argument(z);
  if (z <= 2.0) return detail::bessel_k1_series(z);
  return detail::bessel_k1_scaled_cf(z) * std::exp(-z);
}

// exp(z) K1(z); stays finite where K1 itself underflows.
inline double bessel_k1_scaled(double z) {
  detail::check_bessel_argument(z);
  if (z <= 2.0) return detail::bessel_k1_series(z) * std::exp(z);
  return detail::bessel_k1_scaled_cf(z);
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod quadrature
// ---------------------------------------------------------------------------

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  std::size_t intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kronrod_nodes{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Weights of the embedded 7-point Gauss rule (nodes are kronrod_nodes[1,3,5,7]).
inline constexpr std::array<double, 4> gauss_weights{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kronrod_weights[7];
  double gauss = fc * gauss_weights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kronrod_nodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kronrod_weights[j] * sum;
    if (j % 2 == 1) gauss += gauss_weights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Single 15-point Kronrod panel; for smooth integrands on short intervals.
template <class F>
double gauss_kronrod_15(F&& f, double a, double b) {
  return detail::gauss_kronrod_15(f, a, b).value;
}

// Globally adaptive bisection driven by the Kronrod-Gauss difference, which
// over-estimates the Kronrod error for smooth integrands.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol,
                           std::size_t max_intervals = 4000) {
  std::priority_queue<detail::Segment> heap;
  heap.push(detail::gauss_kronrod_15(f, a, b));
  double total = heap.top().value;
  double error = heap.top().error;
  while (error > abs_tol) {
    if (heap.size() >= max_intervals) {
      std::ostringstream msg;
      msg << "integrate: no convergence on [" << a << ", " << b << "] after " << heap.size()
          << " intervals, error estimate " << error << " > tolerance " << abs_tol;
      throw numerical_error(msg.str());
    }
    const detail::Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const detail::Segment left = detail::gauss_kronrod_15(f, worst.a, mid);
    const detail::Segment right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    // Re-sum occasionally so the running totals do not drift.
    if (heap.size() % 64 == 0) {
      auto copy = heap;
      total = 0.0;
      error = 0.0;
      while (!copy.empty()) {
        total += copy.top().value;
        error += copy.top().error;
        copy.pop();
      }
    }
  }
  return {total, error, heap.size()};
}

// Integral over [a, +inf) via the map t = a + s/(1-s), s in [0,1).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, double abs_tol,
                                       std::size_t max_intervals = 4000) {
  auto mapped = [&f, a](double s) {
    const double one_minus = 1.0 - s;
    if (one_minus <= 0.0) return 0.0;
    const double t = a + s / one_minus;
    const double value = f(t);
    return value == 0.0 ? 0.0 : value / (one_minus * one_minus);
  };
  return integrate(mapped, 0.0, 1.0, abs_tol, max_intervals);
}

}  // namespace dragonking
