#pragma once

#include <Eigen/Dense>
#include <vector>

namespace shieldsynth {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Closed interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
};

/// Axis-aligned box: one interval per dimension.
using Box = std::vector<Interval>;

inline Vec box_midpoint(const Box& b) {
  Vec m(static_cast<Eigen::Index>(b.size()));
  for (size_t i = 0; i < b.size(); ++i) m[static_cast<Eigen::Index>(i)] = b[i].mid();
  return m;
}

inline Vec clamp_to_box(const Box& b, const Vec& x) {
  Vec y = x;
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = b[static_cast<size_t>(i)].clamp(y[i]);
  return y;
}

}  // namespace shieldsynth
