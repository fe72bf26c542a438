#pragma once

#include <string>
#include <vector>

#include "igpr/error.hpp"

namespace igpr::inference {

/// Artificial data-noise levels sigma_1 >= ... >= sigma_T = 0.
class TemperingSchedule {
 public:
  explicit TemperingSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
    if (sigmas_.empty()) throw InvalidArgument("tempering schedule needs at least one step");
    for (std::size_t t = 0; t < sigmas_.size(); ++t) {
      if (!(sigmas_[t] >= 0.0)) throw InvalidArgument("tempering levels must be nonnegative");
      if (t > 0 && sigmas_[t] > sigmas_[t - 1])
        throw InvalidArgument("tempering levels must be non-increasing (step " +
                              std::to_string(t + 1) + ")");
    }
    if (sigmas_.back() != 0.0) throw InvalidArgument("final tempering level must be zero");
  }

  /// sigma_t = scale (T - t) / T for t = 1..T.
  static TemperingSchedule linear(std::size_t steps, double scale = 0.1) {
    if (steps == 0) throw InvalidArgument("tempering schedule needs at least one step");
    std::vector<double> s(steps);
    const double T = static_cast<double>(steps);
    for (std::size_t t = 1; t <= steps; ++t) s[t - 1] = scale * (T - static_cast<double>(t)) / T;
    return TemperingSchedule(std::move(s));
  }

  static TemperingSchedule zeros(std::size_t steps) {
    return TemperingSchedule(std::vector<double>(steps, 0.0));
  }

  std::size_t size() const noexcept { return sigmas_.size(); }
  /// Level of iteration t, 1-based.
  double sigma(std::size_t t) const { return sigmas_.at(t - 1); }
  const std::vector<double>& sigmas() const noexcept { return sigmas_; }

 private:
  std::vector<double> sigmas_;
};

}  // namespace igpr::inference
