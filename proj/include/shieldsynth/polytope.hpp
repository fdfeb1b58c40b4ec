#pragma once

#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// Convex polytope {s | D s <= d}. Plain aggregate: nonemptiness is
/// enforced by lp::ensure_nonempty at the boundaries that build polytopes
/// (environment registry, JSON loaders, MOAS), not in the constructor,
/// since the feasibility check itself is an LP over a Polytope.
struct Polytope {
  Mat D;
  Vec d;

  Eigen::Index dim() const { return D.cols(); }
  Eigen::Index rows() const { return D.rows(); }
};

/// Membership is non-strict: D s <= d row-wise.
bool is_safe(const Polytope& p, const Vec& s);

/// max_i (D_i s - d_i); negative strictly inside, positive outside.
double max_violation(const Polytope& p, const Vec& s);

/// Compiles a box to 2*m half-space rows (upper bounds first, then lowers).
Polytope polytope_from_box(const Box& box);

}  // namespace shieldsynth
