#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shieldsynth/env.hpp"
#include "shieldsynth/policy.hpp"
#include "shieldsynth/shield.hpp"

namespace shieldsynth {

/// One simulated episode. states[t] is the state at which commands_raw[t]
/// was issued; final_state is the state after the last step. Episodes run
/// their full length; `violated` latches if any visited state leaves the
/// safe set.
struct EpisodeTrace {
  std::vector<Vec> states;
  std::vector<Vec> commands_raw;
  std::vector<Vec> commands_applied;
  std::vector<uint8_t> intervened;
  Vec final_state;
  bool violated = false;
  uint64_t seed = 0;  // per-episode stream key, needed for replay
  double shield_ns = 0.0;
  long shield_calls = 0;
};

EpisodeTrace run_episode(const Environment& env, const Policy& policy, const Shield* shield,
                         int steps, uint64_t rng_seed);

/// Counterfactual test: replay the trace prefix, let the raw command
/// through at step t, then let the policy run uncorrected for at most
/// `horizon` steps (never past the episode end); true iff that
/// counterfactual reaches an unsafe state, i.e. the intervention prevented
/// a violation. The policy's per-step draws replay from the trace seed. An
/// intervention whose applied command equals the raw one is never
/// necessary.
bool necessary_intervention(const Environment& env, const Policy& policy,
                            const EpisodeTrace& trace, int t, int horizon);

/// Smallest t with ||s_i||_inf <= eps_norm for all i in [t, t+window);
/// nullopt when no full window qualifies.
std::optional<int> steps_to_steady(const EpisodeTrace& trace, double eps_norm, int window);

/// 5% of the tightest safe-set bound (row-normalized).
double default_steady_eps(const Environment& env);

struct EpisodeRow {
  int episode = 0;
  bool violated = false;
  long interventions = 0;
  long necessary_interventions = 0;
  std::optional<int> steps_to_steady;
};

struct EvalReport {
  long episodes = 0;
  long violations = 0;  // violating episodes, counted once each
  long interventions = 0;
  long necessary_interventions = 0;
  double shield_time_ns_per_step = 0.0;
  double mean_steps_to_steady = 0.0;  // NaN when no episode settles
  std::vector<EpisodeRow> rows;
};

/// Aggregates seeded episodes (per-episode seeds derived from `seed` by a
/// splittable counter). Counts are bitwise reproducible for a fixed seed;
/// threads > 1 parallelizes across episodes without changing any count,
/// though timing becomes noisy.
EvalReport evaluate(const Environment& env, const Policy& policy, const Shield* shield,
                    int episodes, int steps, uint64_t seed, int counterfactual_horizon = 500,
                    int threads = 1);

std::string eval_report_csv(const EvalReport& report);
std::string eval_report_json(const EvalReport& report, const std::string& env_name);

}  // namespace shieldsynth
