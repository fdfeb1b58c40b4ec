#include "shieldsynth/polytope.hpp"

#include "shieldsynth/errors.hpp"

namespace shieldsynth {

bool is_safe(const Polytope& p, const Vec& s) {
  if (s.size() != p.dim()) throw ContractViolation("is_safe: state dimension mismatch");
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (p.D.row(i).dot(s) > p.d[i]) return false;
  }
  return true;
}

double max_violation(const Polytope& p, const Vec& s) {
  if (s.size() != p.dim()) throw ContractViolation("max_violation: state dimension mismatch");
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    worst = std::max(worst, p.D.row(i).dot(s) - p.d[i]);
  }
  return worst;
}

Polytope polytope_from_box(const Box& box) {
  const auto m = static_cast<Eigen::Index>(box.size());
  Polytope p;
  p.D = Mat::Zero(2 * m, m);
  p.d = Vec::Zero(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Interval& iv = box[static_cast<size_t>(i)];
    if (!(iv.lo <= iv.hi)) throw ContractViolation("polytope_from_box: interval with lo > hi");
    p.D(i, i) = 1.0;
    p.d[i] = iv.hi;
    p.D(m + i, i) = -1.0;
    p.d[m + i] = -iv.lo;
  }
  return p;
}

}  // namespace shieldsynth
