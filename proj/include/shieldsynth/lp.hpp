#pragma once

#include "shieldsynth/polytope.hpp"

namespace shieldsynth::lp {

enum class Status { Optimal, Infeasible, Unbounded };

/// Maximize objective . s over a polytope of free (sign-unrestricted)
/// variables.
struct Problem {
  Vec objective;
  Polytope constraints;
};

struct Result {
  Status status = Status::Infeasible;
  double value = 0.0;  // valid when Optimal
  Vec argmax;          // valid when Optimal
};

/// Two-phase dense simplex (variables split into positive parts, no big-M).
/// Dantzig pricing with a permanent switch to Bland's rule once the
/// objective stalls, which rules out cycling. Feasibility and optimality
/// tolerances are 1e-9.
Result solve(const Problem& p);

bool is_feasible(const Polytope& p);

/// Throws ContractViolation if the polytope has no point.
void ensure_nonempty(const Polytope& p);

}  // namespace shieldsynth::lp
