#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "shieldsynth/env.hpp"
#include "shieldsynth/linear_policy.hpp"
#include "shieldsynth/policy.hpp"

namespace shieldsynth {

/// ln(V + 1) - V* / (I + 1): violations dominate, the necessary-intervention
/// ratio breaks ties downward. Requires V* <= I.
double switching_objective(long violations, long necessary, long interventions);

/// Zero-mean GP over the normalized threshold domain with a Matern 5/2
/// kernel. Single-owner mutable state: add observations, query the
/// posterior.
class GaussianProcess {
 public:
  GaussianProcess(double length_scale = 0.2, double variance = 1.0, double jitter = 1e-6);

  void add(double x, double y);
  void set_variance(double variance);
  size_t size() const { return xs_.size(); }
  const std::vector<double>& inputs() const { return xs_; }
  const std::vector<double>& outputs() const { return ys_; }

  /// Posterior (mean, variance); variance clamped at 0 after the numerical
  /// floor. Requires at least one observation.
  std::pair<double, double> posterior(double x) const;

  double kernel(double a, double b) const;

 private:
  std::vector<double> xs_, ys_;
  double length_scale_, variance_, jitter_;
};

/// Expected improvement for minimization: (best - mu) Phi(z) + sigma phi(z)
/// with z = (best - mu) / sigma; zero when sigma is zero.
double expected_improvement(const GaussianProcess& gp, double x, double best);

struct BoConfig {
  double lambda_max = 0.0;  // 0 = derive from the command-space diameter
  int init_points = 5;
  int iterations = 30;
  int eval_episodes = 40;
  int eval_steps = 2000;
  int grid_points = 512;
  int counterfactual_horizon = 500;
  uint64_t seed = 0;
};

struct BoTracePoint {
  double lambda = 0.0;
  long violations = 0;
  long necessary = 0;
  long interventions = 0;
  double objective = 0.0;
};

struct BoResult {
  double lambda = 0.0;
  std::vector<BoTracePoint> trace;
};

/// Threshold search: seeds the GP with evenly spread thresholds, then
/// maximizes EI on a dense grid each round. All objective evaluations use
/// common random numbers (the config seed), so candidates are exactly
/// paired. Returns the lambda with the lowest observed objective (ties:
/// smallest lambda).
BoResult optimize_threshold(const Environment& env, const Policy& policy, const LinearPolicy& k,
                            const BoConfig& cfg);

/// The command-space diameter: max command-bound width over output dims.
double default_lambda_max(const Environment& env);

/// CSV with columns lambda, V, V_star, I, objective.
std::string bo_trace_csv(const std::vector<BoTracePoint>& trace);

}  // namespace shieldsynth
