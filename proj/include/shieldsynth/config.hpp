#pragma once

#include <cstdint>
#include <string>

#include "shieldsynth/cegis.hpp"
#include "shieldsynth/lqr.hpp"
#include "shieldsynth/switching.hpp"

namespace shieldsynth {

struct SurrogateParams {
  double noise_scale = 0.05;
  double fault_prob = 0.002;
  double gain_scale = 1.0;
};

/// Everything one pipeline run needs, loadable from a single JSON file with
/// CLI overrides on top. Defaults are per-benchmark.
struct RunConfig {
  std::string env_name = "pendulum-v1";
  uint64_t seed = 42;

  std::string policy_type = "surrogate";  // "surrogate" | "mlp"
  std::string mlp_path;
  SurrogateParams surrogate;

  double linearize_eps = kDefaultEps;
  std::string linearize_at = "midpoint";  // "midpoint" | "random"

  double q_scale = 1.0;
  double r_scale = 1.0;
  LqrConfig lqr;  // Q/R filled from scales at resolve time when empty

  RefineConfig refine;
  BoConfig bo;

  int eval_episodes = 100;
  int eval_steps = 1000;
  int counterfactual_horizon = 500;
  int threads = 1;

  std::string env_overrides_json;  // empty = none
};

RunConfig default_run_config(const std::string& env_name);

/// Parses a config JSON on top of the env's defaults. Unknown keys are
/// rejected so typos fail loudly.
RunConfig run_config_from_json(const std::string& json_text);

std::string run_config_to_json(const RunConfig& cfg);

/// The environment named by the config, with overrides applied.
Environment resolve_environment(const RunConfig& cfg);

/// Q = q_scale * I, R = r_scale * I unless explicit matrices were given.
LqrConfig resolve_lqr_config(const RunConfig& cfg, int state_dim, int command_dim);

}  // namespace shieldsynth
