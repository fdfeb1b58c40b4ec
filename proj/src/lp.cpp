#include "shieldsynth/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "shieldsynth/errors.hpp"

namespace shieldsynth::lp {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kOptTol = 1e-9;

// Dense tableau over columns [split vars | slacks | artificials]; rhs kept
// separately. basis_[i] is the column basic in row i.
class Simplex {
 public:
  Simplex(const Mat& a, const Vec& b) : rows_(a.rows()), nsplit_(2 * a.cols()) {
    const Eigen::Index m = a.cols();
    nart_ = 0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (b[i] < 0.0) ++nart_;
    }
    cols_ = nsplit_ + rows_ + nart_;
    t_ = Mat::Zero(rows_, cols_);
    rhs_ = Vec::Zero(rows_);
    basis_.resize(static_cast<size_t>(rows_));
    Eigen::Index art = nsplit_ + rows_;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double sign = b[i] < 0.0 ? -1.0 : 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        t_(i, j) = sign * a(i, j);
        t_(i, m + j) = -sign * a(i, j);
      }
      t_(i, nsplit_ + i) = sign;  // slack
      rhs_[i] = sign * b[i];
      if (sign < 0.0) {
        t_(i, art) = 1.0;
        basis_[static_cast<size_t>(i)] = art;
        ++art;
      } else {
        basis_[static_cast<size_t>(i)] = nsplit_ + i;
      }
    }
  }

  // Phase 1: maximize -sum(artificials). Returns false if infeasible.
  bool phase1() {
    if (nart_ == 0) return true;
    Vec cost = Vec::Zero(cols_);
    for (Eigen::Index j = nsplit_ + rows_; j < cols_; ++j) cost[j] = -1.0;
    price_out(cost);
    iterate(/*allow_cols=*/cols_);
    if (zval_ < -kFeasTol) return false;
    drop_artificials();
    return true;
  }

  // Phase 2 over the real split objective. Returns false when unbounded.
  bool phase2(const Vec& objective) {
    const Eigen::Index m = nsplit_ / 2;
    Vec cost = Vec::Zero(cols_);
    for (Eigen::Index j = 0; j < m; ++j) {
      cost[j] = objective[j];
      cost[m + j] = -objective[j];
    }
    price_out(cost);
    return iterate(/*allow_cols=*/nsplit_ + rows_);
  }

  Vec solution(Eigen::Index m) const {
    Vec x = Vec::Zero(m);
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const Eigen::Index b = basis_[static_cast<size_t>(i)];
      if (b < m) {
        x[b] += rhs_[i];
      } else if (b < nsplit_) {
        x[b - m] -= rhs_[i];
      }
    }
    return x;
  }

 private:
  void price_out(const Vec& cost) {
    z_ = cost;
    zval_ = 0.0;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      const double cb = cost[basis_[static_cast<size_t>(i)]];
      if (cb != 0.0) {
        z_ -= cb * t_.row(i).transpose();
        zval_ += cb * rhs_[i];
      }
    }
    // make reduced costs of basic columns exactly zero
    for (Eigen::Index i = 0; i < rows_; ++i) z_[basis_[static_cast<size_t>(i)]] = 0.0;
  }

  // Runs pivots until optimal; returns false on unbounded. allow_cols bounds
  // the entering-column search (phase 2 excludes artificial columns).
  bool iterate(Eigen::Index allow_cols) {
    bool bland = false;
    int stall = 0;
    double best = zval_;
    const long max_iters = 2000 + 200 * static_cast<long>(rows_ + cols_);
    for (long it = 0; it < max_iters; ++it) {
      Eigen::Index enter = -1;
      if (bland) {
        for (Eigen::Index j = 0; j < allow_cols; ++j) {
          if (z_[j] > kOptTol) {
            enter = j;
            break;
          }
        }
      } else {
        double zbest = kOptTol;
        for (Eigen::Index j = 0; j < allow_cols; ++j) {
          if (z_[j] > zbest) {
            zbest = z_[j];
            enter = j;
          }
        }
      }
      if (enter < 0) return true;  // optimal

      Eigen::Index leave = -1;
      double ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < rows_; ++i) {
        if (t_(i, enter) > kFeasTol) {
          const double r = rhs_[i] / t_(i, enter);
          if (r < ratio - 1e-12 ||
              (r < ratio + 1e-12 && leave >= 0 &&
               basis_[static_cast<size_t>(i)] < basis_[static_cast<size_t>(leave)])) {
            ratio = r;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;  // unbounded

      pivot(leave, enter);
      if (zval_ > best + 1e-12) {
        best = zval_;
        stall = 0;
      } else if (++stall > 200) {
        bland = true;  // degenerate cycle guard
      }
    }
    throw NumericalError("lp: pivot limit exceeded (degenerate breakdown)");
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    const double piv = t_(r, c);
    t_.row(r) /= piv;
    rhs_[r] /= piv;
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) {
        t_.row(i) -= f * t_.row(r);
        t_(i, c) = 0.0;
        rhs_[i] -= f * rhs_[r];
        if (rhs_[i] < 0.0 && rhs_[i] > -kFeasTol) rhs_[i] = 0.0;
      }
    }
    const double fz = z_[c];
    if (fz != 0.0) {
      z_ -= fz * t_.row(r).transpose();
      z_[c] = 0.0;
      zval_ += fz * rhs_[r];
    }
    basis_[static_cast<size_t>(r)] = c;
  }

  // After phase 1, pivot basic artificials out; rows that cannot be pivoted
  // are redundant and removed outright.
  void drop_artificials() {
    std::vector<Eigen::Index> keep;
    keep.reserve(static_cast<size_t>(rows_));
    for (Eigen::Index i = 0; i < rows_; ++i) {
      if (basis_[static_cast<size_t>(i)] < nsplit_ + rows_) {
        keep.push_back(i);
        continue;
      }
      Eigen::Index piv = -1;
      double mag = kFeasTol;
      for (Eigen::Index j = 0; j < nsplit_ + rows_; ++j) {
        if (std::abs(t_(i, j)) > mag) {
          mag = std::abs(t_(i, j));
          piv = j;
        }
      }
      if (piv >= 0) {
        pivot(i, piv);
        keep.push_back(i);
      }
      // else: zero row, drop below
    }
    if (static_cast<Eigen::Index>(keep.size()) != rows_) {
      Mat t2(static_cast<Eigen::Index>(keep.size()), cols_);
      Vec r2(static_cast<Eigen::Index>(keep.size()));
      std::vector<Eigen::Index> b2;
      for (size_t k = 0; k < keep.size(); ++k) {
        t2.row(static_cast<Eigen::Index>(k)) = t_.row(keep[k]);
        r2[static_cast<Eigen::Index>(k)] = rhs_[keep[k]];
        b2.push_back(basis_[static_cast<size_t>(keep[k])]);
      }
      t_ = std::move(t2);
      rhs_ = std::move(r2);
      basis_ = std::move(b2);
      rows_ = t_.rows();
    }
  }

  Eigen::Index rows_, nsplit_, nart_ = 0, cols_ = 0;
  Mat t_;
  Vec rhs_;
  Vec z_;
  double zval_ = 0.0;
  std::vector<Eigen::Index> basis_;
};

}  // namespace

Result solve(const Problem& p) {
  const Polytope& poly = p.constraints;
  if (p.objective.size() != poly.dim()) {
    throw ContractViolation("lp::solve: objective dimension mismatch");
  }
  if (!p.objective.allFinite() || !poly.D.allFinite() || !poly.d.allFinite()) {
    throw NumericalError("lp::solve: non-finite problem data");
  }
  Result res;
  if (poly.rows() == 0) {
    if (p.objective.isZero(0.0)) {
      res.status = Status::Optimal;
      res.value = 0.0;
      res.argmax = Vec::Zero(poly.dim());
    } else {
      res.status = Status::Unbounded;
    }
    return res;
  }

  Simplex s(poly.D, poly.d);
  if (!s.phase1()) {
    res.status = Status::Infeasible;
    return res;
  }
  if (!s.phase2(p.objective)) {
    res.status = Status::Unbounded;
    return res;
  }
  res.status = Status::Optimal;
  res.argmax = s.solution(poly.dim());
  res.value = p.objective.dot(res.argmax);
  return res;
}

bool is_feasible(const Polytope& p) {
  Problem prob{Vec::Zero(p.dim()), p};
  return solve(prob).status == Status::Optimal;
}

void ensure_nonempty(const Polytope& p) {
  if (!is_feasible(p)) throw ContractViolation("polytope is empty");
}

}  // namespace shieldsynth::lp
