#pragma once

#include <cstdint>
#include <string>

#include "shieldsynth/env.hpp"
#include "shieldsynth/policy.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// Default central-difference step: sqrt of double machine epsilon
/// (2^-26), exactly representable so differences of linear maps at a zero
/// operating point stay exact.
inline constexpr double kDefaultEps = 0x1.0p-26;

/// Linear time-invariant approximation f'(s, c) = A s + B c of a
/// black-box dynamics function around (s0, c0).
struct LinearModel {
  Mat A;  // state_dim x state_dim
  Mat B;  // state_dim x command_dim
  Vec s0;
  Vec c0;
  double eps = kDefaultEps;
};

/// Central differences on the raw dynamics function, one axis at a time.
LinearModel infer_dynamics(const Environment& env, const Vec& s0, const Vec& c0,
                           double eps = kDefaultEps);

/// One Euler step of the linear model: s + (A s + B c) * dt.
Vec predict_next(const LinearModel& model, const Vec& s, const Vec& c, double dt);

/// Mean squared trajectory error between paired rollouts (true dynamics vs
/// the linear model) from the same initial state, under the same policy and
/// the same per-step random draws: (1/n) sum ||y_i - y^_i||^2.
double fidelity_mse(const Environment& env, const LinearModel& model, const Policy& policy,
                    int steps, uint64_t rng_seed);

/// Same, but from an explicit start state.
double fidelity_mse_from(const Environment& env, const LinearModel& model, const Policy& policy,
                         const Vec& start, int steps, uint64_t rng_seed);

std::string linear_model_to_json(const LinearModel& model);
LinearModel linear_model_from_json(const std::string& json_text);

}  // namespace shieldsynth
