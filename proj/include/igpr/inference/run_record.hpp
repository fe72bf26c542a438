#pragma once

#include <nlohmann/json.hpp>

#include <ostream>
#include <vector>

#include "igpr/inference/gaussian.hpp"

namespace igpr::inference {

/// State of one adaptive iteration.
struct IterationRecord {
  std::size_t t = 0;
  double sigma = 0.0;
  double epsilon = 0.0;
  std::vector<std::size_t> n_local;
  bool nearest_fallback = false;
  IndependentGaussian proposal;
  IndependentGaussian psi;
  IndependentGaussian phi;
  std::vector<bool> clipped;
  std::vector<bool> combine_fallback;
  /// Marginal moments of phi_t * pi / phi0.
  std::vector<double> posterior_means;
  std::vector<double> posterior_stds;
  std::size_t simulations = 0;         // cumulative successful simulations
  std::size_t failed_simulations = 0;  // cumulative failed attempts
  double elapsed_seconds = 0.0;
  double gp_seconds = 0.0;             // cumulative GP fit + predict time
};

struct RunRecord {
  std::vector<IterationRecord> iterations;
};

/// Timing fields are optional so that traces of identically seeded runs can be
/// compared byte for byte.
inline nlohmann::json to_json(const IterationRecord& r, bool with_timing = true) {
  nlohmann::json j = {{"t", r.t},
          {"sigma_t", r.sigma},
          {"epsilon_t", r.epsilon},
          {"n_local", r.n_local},
          {"nearest_fallback", r.nearest_fallback},
          {"proposal_means", r.proposal.means()},
          {"proposal_stds", r.proposal.stds()},
          {"psi_means", r.psi.means()},
          {"psi_stds", r.psi.stds()},
          {"phi_means", r.phi.means()},
          {"phi_stds", r.phi.stds()},
          {"clipped", r.clipped},
          {"combine_fallback", r.combine_fallback},
          {"posterior_means", r.posterior_means},
          {"posterior_stds", r.posterior_stds},
          {"simulations", r.simulations},
          {"failed_simulations", r.failed_simulations}};
  if (with_timing) {
    j["elapsed_seconds"] = r.elapsed_seconds;
    j["gp_seconds"] = r.gp_seconds;
  }
  return j;
}

/// One JSON object per line, one line per iteration.
inline void write_trace(std::ostream& os, const RunRecord& record, bool with_timing = true) {
  for (const auto& it : record.iterations) os << to_json(it, with_timing).dump() << '\n';
}

}  // namespace igpr::inference
