#pragma once

#include <cstdint>

namespace dragonking {

struct Seed {
  std::uint64_t value = 0;
  friend constexpr bool operator==(Seed, Seed) = default;
};

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Stateless per-replication seed. Depends only on (master, replication), so
// replications may run in any order or on any thread.
constexpr Seed derive_seed(Seed master, std::uint64_t replication) noexcept {
  const std::uint64_t r = detail::mix64(replication * detail::golden_gamma + 0x632BE59BD9B4E019ULL);
  return Seed{detail::mix64(detail::mix64(master.value) ^ r)};
}

// Counter-based uniform stream: the i-th variate is a pure function of
// (seed, i). Equivalent to the SplitMix64 sequence started at `seed`.
class CounterStream {
 public:
  constexpr explicit CounterStream(Seed seed) noexcept : seed_(seed.value) {}

  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    return detail::mix64(seed_ + (index + 1) * detail::golden_gamma);
  }

  // Uniform on the open interval (0,1): 53 random bits centred in their cell.
  constexpr double uniform(std::uint64_t index) const noexcept {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace dragonking
