#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shieldsynth/env.hpp"
#include "shieldsynth/linearize.hpp"
#include "shieldsynth/lqr.hpp"
#include "shieldsynth/moas.hpp"

namespace shieldsynth {

enum class RefineMode {
  UniformShift,  // the listing's K +- eps: every entry shifted together
  Ars,           // random per-entry directions, same difference quotient
};

struct RefineConfig {
  double lr = 1e-3;
  int horizon = 200;  // rollout steps per counterexample
  double perturb_scale = 1e-2;
  int max_outer_iters = 50;
  RefineMode mode = RefineMode::UniformShift;
  /// Weight on the reward term of D+/D-; 1.0 is the listing verbatim.
  double reward_weight = 1.0;
  uint64_t seed = 0;
  long moas_max_horizon = 500;
  int counterexample_samples = 256;
};

void validate_refine_config(const RefineConfig& cfg);

/// One refinement pass over the counterexample set: roll the linear model
/// forward with step dt, estimate the reward gradient from the K+-eps
/// command perturbations, and update K after every rollout step. Z must be
/// nonempty.
LinearPolicy refine_policy(const LinearPolicy& policy, const CounterexampleSet& z,
                           const LinearModel& model, double dt,
                           const std::function<double(const Vec&, const Vec&)>& reward,
                           const RefineConfig& cfg, uint64_t rng_seed);

struct SynthesisRecord {
  int iter = 0;
  int num_counterexamples = 0;
  Mat K;
  long moas_horizon = 0;
};

struct SynthesisResult {
  LinearPolicy policy;
  MoasResult moas;
  std::vector<SynthesisRecord> log;
};

/// LQR initialization followed by the verify/refine loop; returns once the
/// MOAS covers the initial box (LP certificate), throws SynthesisFailure
/// after max_outer_iters or when a MOAS construction fails to converge.
SynthesisResult synthesize_linear_policy(const Environment& env, const LinearModel& model,
                                         const RefineConfig& cfg, const LqrConfig& lqr_cfg);

/// One JSONL record per outer iteration: {iter, num_counterexamples, K,
/// moas_horizon}.
std::string synthesis_log_to_jsonl(const std::vector<SynthesisRecord>& log);

}  // namespace shieldsynth
