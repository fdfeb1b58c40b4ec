#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shieldsynth/polytope.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// A benchmark control environment. Only input/output access to `dynamics`
/// is assumed anywhere downstream; the synthesis pipeline never inspects
/// its form. Immutable after construction and safe to share across threads.
struct Environment {
  std::string name;
  int state_dim = 0;
  int command_dim = 0;
  /// Time derivative f(s, c), state-units per second.
  std::function<Vec(const Vec&, const Vec&)> dynamics;
  double dt = 0.01;
  Box init_box;
  Polytope safe_set;
  std::function<double(const Vec&, const Vec&)> reward;
  Box command_bounds;
};

/// Forward-Euler transition s + f(s, clamp(c)) * dt.
Vec step(const Environment& env, const Vec& s, const Vec& c);

/// Uniform draw from the initial-state box; identical seeds give identical
/// samples.
Vec sample_initial(const Environment& env, uint64_t rng_seed);

/// The registry names, in canonical order.
const std::vector<std::string>& environment_names();

Environment make_environment(const std::string& name);

/// Applies a JSON override file ({dt, init_box, safe_halfspaces,
/// command_bounds}, all optional) and re-validates the result.
Environment make_environment(const std::string& name, const std::string& overrides_json);

/// Checks the construction invariants: dt > 0, nonempty safe polytope,
/// every init-box corner strictly inside every half-space, dynamics output
/// dimension equal to state_dim. Throws ContractViolation on failure.
void validate_environment(const Environment& env);

}  // namespace shieldsynth
