#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <optional>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/lp.hpp"
#include "shieldsynth/rng.hpp"

using namespace shieldsynth;

namespace {

// Independent oracle: enumerate every dim-subset of rows, solve the square
// system, keep feasible vertices, return the best objective value. Only
// valid for bounded polytopes with a vertex optimum, which is what the
// generators below produce.
std::optional<double> vertex_enum_max(const Polytope& p, const Vec& c, Vec* arg = nullptr) {
  const Eigen::Index m = p.dim();
  const Eigen::Index r = p.rows();
  std::vector<Eigen::Index> idx(static_cast<size_t>(m));
  std::optional<double> best;

  const std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start,
                                                                  Eigen::Index k) {
    if (k == m) {
      Mat A(m, m);
      Vec b(m);
      for (Eigen::Index i = 0; i < m; ++i) {
        A.row(i) = p.D.row(idx[static_cast<size_t>(i)]);
        b[i] = p.d[idx[static_cast<size_t>(i)]];
      }
      Eigen::FullPivLU<Mat> lu(A);
      if (!lu.isInvertible()) return;
      Vec v = lu.solve(b);
      if (!v.allFinite()) return;
      if (max_violation(p, v) > 1e-7) return;
      const double val = c.dot(v);
      if (!best || val > *best) {
        best = val;
        if (arg) *arg = v;
      }
      return;
    }
    for (Eigen::Index i = start; i <= r - (m - k); ++i) {
      idx[static_cast<size_t>(k)] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Random bounded polytope: a box plus a few extra random cuts through it.
Polytope random_polytope(Rng& rng, int dim, int extra_cuts) {
  Box box;
  for (int i = 0; i < dim; ++i) {
    const double lo = rng.uniform(-3.0, -0.5);
    const double hi = rng.uniform(0.5, 3.0);
    box.push_back({lo, hi});
  }
  Polytope p = polytope_from_box(box);
  const Eigen::Index base = p.rows();
  p.D.conservativeResize(base + extra_cuts, dim);
  p.d.conservativeResize(base + extra_cuts);
  for (int k = 0; k < extra_cuts; ++k) {
    Vec row(dim);
    for (int j = 0; j < dim; ++j) row[j] = rng.uniform(-1.0, 1.0);
    // keep a point of the box feasible so the polytope stays nonempty
    p.D.row(base + k) = row.transpose();
    p.d[base + k] = row.dot(Vec::Zero(dim)) + rng.uniform(0.1, 2.0);
  }
  return p;
}

}  // namespace

TEST_CASE("1-D box maximization") {
  Polytope p;
  p.D = Mat(2, 1);
  p.D << 1, -1;
  p.d = Vec(2);
  p.d << 1, 0;
  lp::Result r = lp::solve({Vec::Ones(1), p});
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.argmax[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unit box vertex optimum") {
  Box box{{-1, 1}, {-1, 1}};
  Polytope p = polytope_from_box(box);
  Vec c(2);
  c << 1, 1;
  lp::Result r = lp::solve({c, p});
  REQUIRE(r.status == lp::Status::Optimal);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(r.argmax[0] == doctest::Approx(1.0));
  CHECK(r.argmax[1] == doctest::Approx(1.0));
}

TEST_CASE("infeasible and unbounded statuses") {
  Polytope p;
  p.D = Mat(2, 1);
  p.D << 1, -1;
  p.d = Vec(2);
  p.d << -1, -1;  // x <= -1 and x >= 1
  CHECK(lp::solve({Vec::Ones(1), p}).status == lp::Status::Infeasible);

  Polytope q;  // x >= 0 only
  q.D = Mat(1, 1);
  q.D << -1;
  q.d = Vec(1);
  q.d << 0;
  CHECK(lp::solve({Vec::Ones(1), q}).status == lp::Status::Unbounded);
  CHECK(lp::is_feasible(q));
}

TEST_CASE("random 3-D polytopes agree with vertex-enumeration oracle") {
  Rng rng(20240813);
  for (int trial = 0; trial < 100; ++trial) {
    Polytope p = random_polytope(rng, 3, 2);
    Vec c(3);
    for (int j = 0; j < 3; ++j) c[j] = rng.uniform(-2.0, 2.0);
    auto oracle = vertex_enum_max(p, c);
    REQUIRE(oracle.has_value());
    lp::Result r = lp::solve({c, p});
    REQUIRE(r.status == lp::Status::Optimal);
    CHECK(r.value == doctest::Approx(*oracle).epsilon(1e-7));
    CHECK(max_violation(p, r.argmax) <= 1e-7);
    CHECK(c.dot(r.argmax) == r.value);
  }
}

TEST_CASE("1000 random small LPs vs oracle within 1e-7") {
  Rng rng(99);
  int solved = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + static_cast<int>(rng.next_u64() % 3);
    const int cuts = static_cast<int>(rng.next_u64() % 4);
    Polytope p = random_polytope(rng, dim, cuts);
    Vec c(dim);
    for (int j = 0; j < dim; ++j) c[j] = rng.uniform(-2.0, 2.0);
    auto oracle = vertex_enum_max(p, c);
    REQUIRE(oracle.has_value());
    lp::Result r = lp::solve({c, p});
    REQUIRE(r.status == lp::Status::Optimal);
    REQUIRE(std::abs(r.value - *oracle) <= 1e-7 * std::max(1.0, std::abs(*oracle)));
    ++solved;
  }
  CHECK(solved == 1000);
}

TEST_CASE("objective scaling preserves value and argmax") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    Polytope p = random_polytope(rng, 2, 2);
    Vec c(2);
    c << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    const double k = rng.uniform(0.1, 10.0);
    lp::Result a = lp::solve({c, p});
    lp::Result b = lp::solve({Vec(k * c), p});
    REQUIRE(a.status == lp::Status::Optimal);
    REQUIRE(b.status == lp::Status::Optimal);
    CHECK(b.value == doctest::Approx(k * a.value).epsilon(1e-7));
  }
}

TEST_CASE("weak duality spot check") {
  // y >= 0 with y^T D = c^T gives the bound c.x <= y^T d for any feasible x.
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    Box box{{-2, 2}, {-2, 2}};
    Polytope p = polytope_from_box(box);
    Vec c(2);
    c << rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0);
    // rows 0,1 are x_i <= hi_i; y = (c0, c1, 0, 0) is dual feasible
    const double dual_bound = c[0] * p.d[0] + c[1] * p.d[1];
    lp::Result r = lp::solve({c, p});
    REQUIRE(r.status == lp::Status::Optimal);
    CHECK(r.value <= dual_bound + 1e-9);
  }
}
