#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "igpr/error.hpp"

namespace igpr {

struct UniformPrior {
  double lower;
  double upper;
};

struct NormalPrior {
  double mean;
  double variance;
};

using PriorComponent = std::variant<UniformPrior, NormalPrior>;

/// Independent per-dimension prior over the parameter vector.
class PriorSpec {
 public:
  PriorSpec() = default;

  explicit PriorSpec(std::vector<PriorComponent> components)
      : components_(std::move(components)) {
    for (std::size_t j = 0; j < components_.size(); ++j) {
      std::visit(
          [j](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, UniformPrior>) {
              if (!(c.lower < c.upper) || !std::isfinite(c.lower) ||
                  !std::isfinite(c.upper))
                throw InvalidArgument("uniform prior needs lower < upper in dimension " +
                                      std::to_string(j));
            } else {
              if (!(c.variance > 0.0) || !std::isfinite(c.variance) ||
                  !std::isfinite(c.mean))
                throw InvalidArgument("normal prior needs positive variance in dimension " +
                                      std::to_string(j));
            }
          },
          components_[j]);
    }
  }

  std::size_t size() const noexcept { return components_.size(); }
  const PriorComponent& operator[](std::size_t j) const { return components_.at(j); }
  const std::vector<PriorComponent>& components() const noexcept { return components_; }

  double mean(std::size_t j) const {
    return std::visit(
        [](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, UniformPrior>)
            return 0.5 * (c.lower + c.upper);
          else
            return c.mean;
        },
        components_.at(j));
  }

  double variance(std::size_t j) const {
    return std::visit(
        [](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, UniformPrior>) {
            const double w = c.upper - c.lower;
            return w * w / 12.0;
          } else {
            return c.variance;
          }
        },
        components_.at(j));
  }

  /// Support interval of dimension j; infinite for normal components.
  std::pair<double, double> support(std::size_t j) const {
    return std::visit(
        [](const auto& c) -> std::pair<double, double> {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, UniformPrior>)
            return {c.lower, c.upper};
          else
            return {-std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
        },
        components_.at(j));
  }

  bool in_support(std::span<const double> theta) const {
    for (std::size_t j = 0; j < components_.size(); ++j) {
      auto [lo, hi] = support(j);
      if (theta[j] < lo || theta[j] > hi) return false;
    }
    return true;
  }

  /// Log density of the 1-D marginal j, -inf outside the support.
  double log_density(std::size_t j, double x) const {
    return std::visit(
        [x](const auto& c) -> double {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, UniformPrior>) {
            if (x < c.lower || x > c.upper) return -std::numeric_limits<double>::infinity();
            return -std::log(c.upper - c.lower);
          } else {
            const double z = x - c.mean;
            return -0.5 * z * z / c.variance - 0.5 * std::log(2.0 * std::numbers::pi * c.variance);
          }
        },
        components_.at(j));
  }

  template <class Engine>
  std::vector<double> sample(Engine& rng) const {
    std::vector<double> out(components_.size());
    for (std::size_t j = 0; j < components_.size(); ++j) {
      out[j] = std::visit(
          [&rng](const auto& c) -> double {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, UniformPrior>) {
              std::uniform_real_distribution<double> u(c.lower, c.upper);
              return u(rng);
            } else {
              std::normal_distribution<double> n(c.mean, std::sqrt(c.variance));
              return n(rng);
            }
          },
          components_[j]);
    }
    return out;
  }

 private:
  std::vector<PriorComponent> components_;
};

}  // namespace igpr
