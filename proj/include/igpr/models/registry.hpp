#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/models/blowfly.hpp"
#include "igpr/models/hodgkin_huxley.hpp"
#include "igpr/models/s_system.hpp"
#include "igpr/models/toy1d.hpp"

namespace igpr::models {

inline std::vector<std::string> model_names() {
  return {"toy1d", "s_system", "blowfly", "hh", "identity"};
}

/// Builds a registered model from its name and an options object; unknown
/// option keys are rejected.
inline std::unique_ptr<SimulationModel> make_model(const std::string& name,
                                                   const nlohmann::json& options = nlohmann::json::object()) {
  const nlohmann::json opts = options.is_null() ? nlohmann::json::object() : options;
  if (!opts.is_object()) throw ConfigError("model options must be an object");

  auto read = [&opts, &name](std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : opts.items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError("unknown option '" + key + "' for model " + name);
    }
  };
  auto get = [&opts]<class T>(const char* key, T fallback) -> T {
    return opts.contains(key) ? opts.at(key).get<T>() : fallback;
  };

  try {
    if (name == "toy1d") {
      read({"noise_sd", "noise_off"});
      Toy1d::Options o;
      o.noise_sd = get("noise_sd", o.noise_sd);
      o.noise_off = get("noise_off", o.noise_off);
      return std::make_unique<Toy1d>(o);
    }
    if (name == "identity") {
      read({"dim", "noise_sd", "prior_lower", "prior_upper"});
      IdentityModel::Options o;
      o.dim = get("dim", o.dim);
      o.noise_sd = get("noise_sd", o.noise_sd);
      o.prior_lower = get("prior_lower", o.prior_lower);
      o.prior_upper = get("prior_upper", o.prior_upper);
      return std::make_unique<IdentityModel>(o);
    }
    if (name == "s_system") {
      read({"dt", "horizon", "noise_sd", "noise_off", "x1_initial", "x2_initial"});
      SSystem::Options o;
      o.dt = get("dt", o.dt);
      o.horizon = get("horizon", o.horizon);
      o.noise_sd = get("noise_sd", o.noise_sd);
      o.noise_off = get("noise_off", o.noise_off);
      o.x1_initial = get("x1_initial", o.x1_initial);
      o.x2_initial = get("x2_initial", o.x2_initial);
      return std::make_unique<SSystem>(o);
    }
    if (name == "blowfly") {
      read({"burn_in", "steps", "noise_off", "overflow", "extinction_steps"});
      Blowfly::Options o;
      o.burn_in = get("burn_in", o.burn_in);
      o.steps = get("steps", o.steps);
      o.noise_off = get("noise_off", o.noise_off);
      o.overflow = get("overflow", o.overflow);
      o.extinction_steps = get("extinction_steps", o.extinction_steps);
      return std::make_unique<Blowfly>(o);
    }
    if (name == "hh") {
      read({"dt", "duration", "v_initial", "drive_mean", "noise_off"});
      HodgkinHuxley::Options o;
      o.dt = get("dt", o.dt);
      o.duration = get("duration", o.duration);
      o.v_initial = get("v_initial", o.v_initial);
      o.drive_mean = get("drive_mean", o.drive_mean);
      o.noise_off = get("noise_off", o.noise_off);
      return std::make_unique<HodgkinHuxley>(o);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad option type for model " + name + ": " + e.what());
  }
  throw ConfigError("unknown model '" + name + "'");
}

}  // namespace igpr::models
