#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "dragonking/error.hpp"

namespace dragonking {

// A batch of finite observations with cached order statistics.
class Sample {
 public:
  explicit Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw domain_error("Sample: at least one observation is required");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        std::ostringstream msg;
        msg << "Sample: observation " << i << " is not finite";
        throw domain_error(msg.str());
      }
    }
    sorted_ = values_;
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> sorted() const noexcept { return sorted_; }

  // Ascending order statistic x_(i), 1-based.
  double order_statistic(std::size_t i) const {
    if (i < 1 || i > sorted_.size()) {
      std::ostringstream msg;
      msg << "Sample: order statistic " << i << " outside 1.." << sorted_.size();
      throw domain_error(msg.str());
    }
    return sorted_[i - 1];
  }

  // k-th largest observation, x_(n-k+1).
  double kth_largest(std::size_t k) const {
    if (k < 1 || k > sorted_.size()) {
      std::ostringstream msg;
      msg << "Sample: rank " << k << " outside 1.." << sorted_.size();
      throw config_error(msg.str());
    }
    return sorted_[sorted_.size() - k];
  }

  double min() const noexcept { return sorted_.front(); }
  double max() const noexcept { return sorted_.back(); }

  // x -> -x; turns a left tail into a right tail.
  Sample negated() const {
    std::vector<double> flipped(values_.size());
    std::transform(values_.begin(), values_.end(), flipped.begin(), [](double v) { return -v; });
    return Sample(std::move(flipped));
  }

 private:
  std::vector<double> values_;
  std::vector<double> sorted_;
};

}  // namespace dragonking
