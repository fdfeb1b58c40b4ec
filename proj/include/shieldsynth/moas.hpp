#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shieldsynth/polytope.hpp"
#include "shieldsynth/types.hpp"

namespace shieldsynth {

/// Maximal output admissible set of a discrete closed loop s+ = A_cl s
/// inside a safe polytope.
struct MoasResult {
  Polytope set;
  long horizon = 0;
  bool converged = false;
};

struct CounterexampleSet {
  std::vector<Vec> points;
  bool empty() const { return points.empty(); }
};

/// Iterated constraint tightening with an LP termination test: X_t adds the
/// rows D A_cl^k s <= d for k = 0..t (redundant rows never enter), and the
/// construction stops at the first t where every row of D A_cl^{t+1} is
/// already implied by X_t. converged=false when max_horizon is hit first.
/// Throws UnboundedSafeSet when the safe polytope is unbounded.
MoasResult compute_moas(const Mat& a_cl, const Polytope& safe, long max_horizon = 500);

/// Test oracle for the MOAS definition: simulate s_{k+1} = A_cl s_k for
/// `steps` iterations and require every iterate (including s) to be safe.
bool brute_force_membership(const Mat& a_cl, const Polytope& safe, const Vec& s, int steps);

/// Exact LP certificate that every point of the box satisfies every row of
/// the polytope with the given slack.
bool box_contained(const Polytope& set, const Box& box, double slack = 1e-9);

/// Initial states outside the MOAS: all 2^m box corners first, then
/// `samples` uniform draws. If the point scan finds nothing, the LP
/// containment certificate runs as well and any violating row contributes
/// its box argmax, so an empty result implies the exact certificate.
CounterexampleSet find_counterexamples(const MoasResult& moas, const Box& init_box, int samples,
                                       uint64_t rng_seed);

std::string moas_to_json(const MoasResult& moas);

}  // namespace shieldsynth
