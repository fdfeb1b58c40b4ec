#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shieldsynth/linear_policy.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// Black-box policy. `act` must be pure given (state, step_key): the
/// simulator supplies a pre-mixed per-step key and stochastic policies
/// derive all their draws from it, which is what makes counterfactual
/// replay and common-random-number evaluation exact.
struct Policy {
  std::string name;
  int state_dim = 0;
  int command_dim = 0;
  std::function<Vec(const Vec& state, uint64_t step_key)> act;
};

enum class Activation { Tanh, Relu, Identity };

struct MlpLayer {
  Mat w;
  Vec b;
  Activation act = Activation::Identity;
};

/// Dense feed-forward weights; layer dimensions must chain and the final
/// output dimension is the command dimension.
struct MlpWeights {
  std::vector<MlpLayer> layers;
  int state_dim = 0;
  int command_dim = 0;
};

/// Affine + activation composition. Throws NumericalError if any
/// intermediate is non-finite, ContractViolation on dimension breaks.
Vec mlp_forward(const MlpWeights& w, const Vec& s);

/// Loads {"layers":[{"w":..,"b":..,"act":"tanh"|"relu"|"id"}],
/// "state_dim":m, "command_dim":n}.
MlpWeights mlp_from_json(const std::string& json_text);
std::string mlp_to_json(const MlpWeights& w);

Policy make_mlp_policy(MlpWeights w, std::string name = "mlp");

/// Surrogate for an unsafe neural policy: K s plus Gaussian noise, and with
/// probability fault_prob per step a saturated command (a command-bound
/// extremum, lo or hi picked per dimension).
Policy perturbed_linear_policy(const LinearPolicy& k, const Box& command_bounds,
                               double noise_scale, double fault_prob, uint64_t rng_seed);

}  // namespace shieldsynth
