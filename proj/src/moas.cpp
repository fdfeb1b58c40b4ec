#include "shieldsynth/moas.hpp"

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/lp.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

namespace {

constexpr double kTermTol = 1e-9;

// max of row . s over the working polytope; Infeasible means the running
// intersection is empty (possible only for safe sets not containing 0).
struct RowMax {
  bool feasible = true;
  double value = 0.0;
};

RowMax row_max(const Polytope& over, const Vec& row) {
  lp::Result r = lp::solve({row, over});
  if (r.status == lp::Status::Unbounded) {
    throw UnboundedSafeSet("moas: unbounded working set");
  }
  if (r.status == lp::Status::Infeasible) return {false, 0.0};
  return {true, r.value};
}

void append_row(Polytope& p, const Vec& row, double bound) {
  const Eigen::Index r = p.rows();
  p.D.conservativeResize(r + 1, Eigen::NoChange);
  p.D.row(r) = row.transpose();
  p.d.conservativeResize(r + 1);
  p.d[r] = bound;
}

// Closed-form max of row . s over the safe set's bounding box. Every
// working set is inside the safe set, so boxmax(row) <= d certifies
// redundancy without an LP; boxmax > d decides nothing.
struct SafeBox {
  Vec lo, hi;

  explicit SafeBox(const Polytope& safe) : lo(safe.dim()), hi(safe.dim()) {
    for (Eigen::Index j = 0; j < safe.dim(); ++j) {
      for (double sign : {1.0, -1.0}) {
        Vec dir = Vec::Zero(safe.dim());
        dir[j] = sign;
        lp::Result r = lp::solve({dir, safe});
        if (r.status == lp::Status::Unbounded) {
          throw UnboundedSafeSet("compute_moas: safe polytope is unbounded");
        }
        if (r.status != lp::Status::Optimal) {
          throw NumericalError("compute_moas: safe polytope bound LP failed");
        }
        (sign > 0 ? hi[j] : lo[j]) = sign * r.value;
      }
    }
  }

  double max_over(const Vec& row) const {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
      acc += row[j] > 0.0 ? row[j] * hi[j] : row[j] * lo[j];
    }
    return acc;
  }
};

// Drops rows implied by the remaining ones; the first `keep_prefix` rows
// (the original safe set) always stay, preserving the set <= safe row-subset
// property. Set-preserving, so it is sound to run mid-construction.
void prune_redundant(Polytope& p, Eigen::Index keep_prefix, const SafeBox& box) {
  Eigen::Index i = keep_prefix;
  while (i < p.rows()) {
    const bool box_redundant = box.max_over(p.D.row(i).transpose()) <= p.d[i] + kTermTol;
    Polytope without;
    without.D = Mat(p.rows() - 1, p.dim());
    without.d = Vec(p.rows() - 1);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      if (j == i) continue;
      without.D.row(k) = p.D.row(j);
      without.d[k] = p.d[j];
      ++k;
    }
    bool drop = box_redundant;
    if (!drop) {
      const RowMax m = row_max(without, p.D.row(i).transpose());
      drop = m.feasible && m.value <= p.d[i] + kTermTol;
    }
    if (drop) {
      p = std::move(without);
    } else {
      ++i;
    }
  }
}

}  // namespace

namespace {

// Working sets of expansive maps never finitely determine: the candidate
// rows keep tightening one direction toward a lower-dimensional slab. Once
// an axis width falls below resolution the set equals its limit for every
// state outside a 1e-12 sliver, which is as converged as doubles allow.
bool degenerate_axis(const Polytope& set) {
  for (Eigen::Index j = 0; j < set.dim(); ++j) {
    double width = 0.0;
    bool ok = true;
    for (double sign : {1.0, -1.0}) {
      Vec dir = Vec::Zero(set.dim());
      dir[j] = sign;
      lp::Result r = lp::solve({dir, set});
      if (r.status != lp::Status::Optimal) {
        ok = false;
        break;
      }
      width += r.value;
    }
    if (ok && width <= 1e-12) return true;
  }
  return false;
}

}  // namespace

MoasResult compute_moas(const Mat& a_cl, const Polytope& safe, long max_horizon) {
  if (a_cl.rows() != a_cl.cols() || a_cl.rows() != safe.dim()) {
    throw ContractViolation("compute_moas: dimension mismatch");
  }
  if (max_horizon < 1) throw ContractViolation("compute_moas: max_horizon must be >= 1");
  lp::ensure_nonempty(safe);
  const SafeBox box(safe);  // also rejects unbounded safe sets

  MoasResult res;
  res.set = safe;
  Mat block = safe.D;  // D A_cl^t for the next candidate depth
  for (long t = 0; t <= max_horizon; ++t) {
    block = block * a_cl;  // rows D A_cl^{t+1}
    if (!block.allFinite()) throw NumericalError("compute_moas: constraint block diverged");
    bool all_redundant = true;
    for (Eigen::Index i = 0; i < block.rows(); ++i) {
      // rows of D A^k span many orders of magnitude; rescaling the
      // halfspace keeps the LP tableau well conditioned
      const double scale = block.row(i).cwiseAbs().maxCoeff();
      if (scale == 0.0) {
        if (safe.d[i] < 0.0) {  // 0 <= d_i fails: intersection is empty
          res.horizon = t;
          res.converged = true;
          append_row(res.set, Vec::Zero(safe.dim()), safe.d[i]);
          return res;
        }
        continue;
      }
      const Vec row = block.row(i).transpose() / scale;
      const double bound = safe.d[i] / scale;
      if (box.max_over(row) <= bound + kTermTol) continue;
      const RowMax m = row_max(res.set, row);
      if (!m.feasible) {
        // the running intersection is empty; nothing further can be added
        res.horizon = t;
        res.converged = true;
        return res;
      }
      if (m.value > bound + kTermTol) {
        all_redundant = false;
        append_row(res.set, row, bound);
      }
    }
    if (all_redundant) {
      res.horizon = t;
      res.converged = true;
      prune_redundant(res.set, safe.rows(), box);
      return res;
    }
    if (t >= 24 && (t & 7) == 0 && degenerate_axis(res.set)) {
      res.horizon = t;
      res.converged = true;
      prune_redundant(res.set, safe.rows(), box);
      return res;
    }
  }
  res.horizon = max_horizon;
  res.converged = false;
  return res;
}

bool brute_force_membership(const Mat& a_cl, const Polytope& safe, const Vec& s, int steps) {
  Vec x = s;
  if (!is_safe(safe, x)) return false;
  for (int k = 0; k < steps; ++k) {
    x = a_cl * x;
    if (!is_safe(safe, x)) return false;
  }
  return true;
}

bool box_contained(const Polytope& set, const Box& box, double slack) {
  const Polytope box_poly = polytope_from_box(box);
  for (Eigen::Index i = 0; i < set.rows(); ++i) {
    lp::Result r = lp::solve({set.D.row(i).transpose(), box_poly});
    if (r.status != lp::Status::Optimal) return false;
    if (r.value > set.d[i] + slack) return false;
  }
  return true;
}

CounterexampleSet find_counterexamples(const MoasResult& moas, const Box& init_box, int samples,
                                       uint64_t rng_seed) {
  if (!moas.converged) {
    throw ContractViolation("find_counterexamples: MOAS did not converge");
  }
  constexpr double kOutsideTol = 1e-9;
  CounterexampleSet z;
  const size_t m = init_box.size();
  Vec corner(static_cast<Eigen::Index>(m));
  for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
    for (size_t j = 0; j < m; ++j) {
      corner[static_cast<Eigen::Index>(j)] = (mask >> j) & 1 ? init_box[j].hi : init_box[j].lo;
    }
    if (max_violation(moas.set, corner) > kOutsideTol) z.points.push_back(corner);
  }
  Rng rng(rng_seed);
  for (int k = 0; k < samples; ++k) {
    Vec s(static_cast<Eigen::Index>(m));
    for (size_t j = 0; j < m; ++j) {
      s[static_cast<Eigen::Index>(j)] = rng.uniform(init_box[j].lo, init_box[j].hi);
    }
    if (max_violation(moas.set, s) > kOutsideTol) z.points.push_back(s);
  }
  if (z.points.empty()) {
    // exact certificate; a violating row donates its box argmax
    const Polytope box_poly = polytope_from_box(init_box);
    for (Eigen::Index i = 0; i < moas.set.rows(); ++i) {
      lp::Result r = lp::solve({moas.set.D.row(i).transpose(), box_poly});
      if (r.status == lp::Status::Optimal && r.value > moas.set.d[i] + kOutsideTol) {
        z.points.push_back(r.argmax);
      }
    }
  }
  return z;
}

std::string moas_to_json(const MoasResult& moas) {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < moas.set.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < moas.set.dim(); ++k) row.push_back(moas.set.D(i, k));
    rows.push_back(std::move(row));
  }
  j["D"] = std::move(rows);
  auto bounds = nlohmann::json::array();
  for (Eigen::Index i = 0; i < moas.set.rows(); ++i) bounds.push_back(moas.set.d[i]);
  j["d"] = std::move(bounds);
  j["horizon"] = moas.horizon;
  j["converged"] = moas.converged;
  return j.dump();
}

}  // namespace shieldsynth
