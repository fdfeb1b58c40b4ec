#pragma once

#include "shieldsynth/linear_policy.hpp"
#include "shieldsynth/linearize.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

struct LqrConfig {
  Mat Q;  // state cost, symmetric PSD
  Mat R;  // command cost, symmetric PD
  long max_iters = 100000;
  double tol = 1e-10;
};

LqrConfig default_lqr_config(int state_dim, int command_dim);

/// Symmetry + eigenvalue sign test (Q PSD, R PD). Throws ContractViolation.
void validate_lqr_config(const LqrConfig& cfg);

/// Riccati value iteration on the Euler-discretized pair
/// (I + dt A, dt B), started from P = Q; returns the gain
/// K = (R + B~' P B~)^-1 B~' P A~. Throws ConvergenceError when the
/// iteration exhausts max_iters (e.g. unstabilizable pairs) and
/// NumericalError when R + B~' P B~ is singular.
LinearPolicy solve_lqr(const LinearModel& model, double dt, const LqrConfig& cfg);

/// Euler closed loop I + dt (A - B K).
Mat closed_loop(const LinearModel& model, const LinearPolicy& policy, double dt);

/// Largest eigenvalue magnitude (general, possibly complex spectrum).
double spectral_radius(const Mat& m);

}  // namespace shieldsynth
