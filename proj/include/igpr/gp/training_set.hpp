#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/gp/kernel.hpp"

namespace igpr::gp {

/// Paired GP predictors (simulated data points, one per row) and scalar responses.
class TrainingSet {
 public:
  TrainingSet(Eigen::MatrixXd inputs, Eigen::VectorXd responses)
      : inputs_(std::move(inputs)), responses_(std::move(responses)) {
    if (inputs_.rows() < 1) throw InvalidArgument("training set must hold at least one point");
    if (inputs_.rows() != responses_.size())
      throw InvalidArgument("training set has " + std::to_string(inputs_.rows()) +
                            " inputs but " + std::to_string(responses_.size()) + " responses");
    if (!inputs_.allFinite() || !responses_.allFinite())
      throw InvalidArgument("training set contains non-finite entries");
  }

  static TrainingSet from_rows(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& responses) {
    if (rows.empty()) throw InvalidArgument("training set must hold at least one point");
    Eigen::MatrixXd x(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.front().size())
        throw InvalidArgument("training inputs have inconsistent dimensions");
      for (std::size_t k = 0; k < rows[i].size(); ++k) x(i, k) = rows[i][k];
    }
    return TrainingSet(std::move(x), Eigen::Map<const Eigen::VectorXd>(responses.data(),
                                                                        responses.size()));
  }

  Eigen::Index size() const noexcept { return inputs_.rows(); }
  Eigen::Index dim() const noexcept { return inputs_.cols(); }
  const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
  const Eigen::VectorXd& responses() const noexcept { return responses_; }

  double response_mean() const { return responses_.mean(); }

  /// Population variance of the responses.
  double response_variance() const {
    const double mu = responses_.mean();
    return (responses_.array() - mu).square().mean();
  }

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd responses_;
};

struct GPHyperparams {
  KernelSpec kernel;
  double noise_variance = 1.0;
  double mean_const = 0.0;
};

struct GaussianPrediction {
  double mean;
  double variance;
};

}  // namespace igpr::gp
