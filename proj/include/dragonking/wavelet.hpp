#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dragonking/error.hpp"

namespace dragonking::wavelet {

// Least-asymmetric Daubechies filter with 4 vanishing moments ("sym4"),
// decomposition low-pass, normalised to unit l2 norm and sum sqrt(2).
inline constexpr std::array<double, 8> sym4_lowpass{
    -0.075765714789503145472, -0.029635527646001834145, 0.49761866763277567405,
    0.80373875180513184383,   0.29785779560530537062,   -0.09921954357663354968,
    -0.012603967262030927263, 0.032223100604051616862};

inline constexpr const char* family_name = "sym4";

// Quadrature mirror high-pass: g[j] = (-1)^j h[L-1-j].
inline constexpr std::array<double, 8> sym4_highpass = [] {
  std::array<double, 8> g{};
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = (j % 2 == 0 ? 1.0 : -1.0) * sym4_lowpass[sym4_lowpass.size() - 1 - j];
  return g;
}();

// One periodic analysis step on an even-length signal.
inline void analyze(std::span<const double> x, std::vector<double>& approx, std::vector<double>& detail) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double a = 0.0, d = 0.0;
    for (std::size_t j = 0; j < sym4_lowpass.size(); ++j) {
      const double v = x[(2 * k + j) % n];
      a += sym4_lowpass[j] * v;
      d += sym4_highpass[j] * v;
    }
    approx[k] = a;
    detail[k] = d;
  }
}

// Adjoint (= inverse, the periodic filter bank is orthogonal) of analyze.
inline std::vector<double> synthesize(std::span<const double> approx, std::span<const double> detail) {
  const std::size_t n = 2 * approx.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < approx.size(); ++k)
    for (std::size_t j = 0; j < sym4_lowpass.size(); ++j)
      x[(2 * k + j) % n] += sym4_lowpass[j] * approx[k] + sym4_highpass[j] * detail[k];
  return x;
}

struct Decomposition {
  std::vector<double> approx;
  std::vector<std::vector<double>> details;  // finest scale first
};

inline Decomposition decompose(std::span<const double> x, std::size_t level) {
  Decomposition dec;
  dec.approx.assign(x.begin(), x.end());
  for (std::size_t j = 0; j < level; ++j) {
    if (dec.approx.size() % 2 != 0 || dec.approx.size() < 2)
      throw domain_error("wavelet: signal length must be divisible by 2^level");
    std::vector<double> a, d;
    analyze(dec.approx, a, d);
    dec.approx = std::move(a);
    dec.details.push_back(std::move(d));
  }
  return dec;
}

inline std::vector<double> reconstruct(const Decomposition& dec) {
  std::vector<double> x = dec.approx;
  for (std::size_t j = dec.details.size(); j-- > 0;) x = synthesize(x, dec.details[j]);
  return x;
}

// Half-sample symmetric extension of x to `total` points with x starting at
// `offset`: ... x1 x0 | x0 x1 ... x_{n-1} | x_{n-1} x_{n-2} ...
inline std::vector<double> symmetric_extension(std::span<const double> x, std::size_t total, std::size_t offset) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t period = 2 * n;
  std::vector<double> ext(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::ptrdiff_t m = (static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(offset)) % period;
    if (m < 0) m += period;
    ext[i] = x[static_cast<std::size_t>(m < n ? m : period - 1 - m)];
  }
  return ext;
}

// Multiresolution split of a finite signal: the smooth part (approximation at
// `level`) and one detail series per scale, all cropped back to the input
// length. smooth + sum(details) reproduces x up to rounding.
struct Split {
  std::vector<double> smooth;
  std::vector<std::vector<double>> details;  // finest scale first
};

inline Split multiresolution(std::span<const double> x, std::size_t level) {
  if (level < 1) throw domain_error("wavelet: level must be at least 1");
  const std::size_t n = x.size();
  if (level >= 8 * sizeof(std::size_t) - 4 || n < (std::size_t{1} << level)) {
    std::ostringstream msg;
    msg << "wavelet: series of length " << n << " is shorter than 2^" << level;
    throw domain_error(msg.str());
  }
  // Pad each side by the filter support at the coarsest scale so boundary
  // wrap-around of the periodic transform never reaches the cropped range.
  const std::size_t block = std::size_t{1} << level;
  const std::size_t pad = (sym4_lowpass.size() - 1) * block;
  std::size_t total = n + 2 * pad;
  total = (total + block - 1) / block * block;
  const std::size_t offset = (total - n) / 2;
  const auto ext = symmetric_extension(x, total, offset);
  const Decomposition dec = decompose(ext, level);

  auto crop = [&](const std::vector<double>& full) {
    return std::vector<double>(full.begin() + static_cast<std::ptrdiff_t>(offset),
                               full.begin() + static_cast<std::ptrdiff_t>(offset + n));
  };

  Split out;
  Decomposition part = dec;
  for (auto& d : part.details) std::fill(d.begin(), d.end(), 0.0);
  out.smooth = crop(reconstruct(part));
  for (std::size_t j = 0; j < level; ++j) {
    Decomposition only;
    only.approx.assign(dec.approx.size(), 0.0);
    for (std::size_t i = 0; i < level; ++i)
      only.details.push_back(i == j ? dec.details[i] : std::vector<double>(dec.details[i].size(), 0.0));
    out.details.push_back(crop(reconstruct(only)));
  }
  return out;
}

}  // namespace dragonking::wavelet
