#include "shieldsynth/lqr.hpp"

#include <Eigen/Eigenvalues>

#include "shieldsynth/errors.hpp"

namespace shieldsynth {

LqrConfig default_lqr_config(int state_dim, int command_dim) {
  LqrConfig cfg;
  cfg.Q = Mat::Identity(state_dim, state_dim);
  cfg.R = Mat::Identity(command_dim, command_dim);
  return cfg;
}

void validate_lqr_config(const LqrConfig& cfg) {
  if (cfg.Q.rows() != cfg.Q.cols() || cfg.R.rows() != cfg.R.cols()) {
    throw ContractViolation("lqr: Q and R must be square");
  }
  if ((cfg.Q - cfg.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractViolation("lqr: Q must be symmetric");
  }
  if ((cfg.R - cfg.R.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw ContractViolation("lqr: R must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> eq(cfg.Q);
  if (eq.eigenvalues().minCoeff() < -1e-10) {
    throw ContractViolation("lqr: Q must be positive semidefinite");
  }
  Eigen::SelfAdjointEigenSolver<Mat> er(cfg.R);
  if (er.eigenvalues().minCoeff() <= 1e-12) {
    throw ContractViolation("lqr: R must be positive definite");
  }
  if (cfg.max_iters < 1 || cfg.tol <= 0.0) {
    throw ContractViolation("lqr: max_iters and tol must be positive");
  }
}

LinearPolicy solve_lqr(const LinearModel& model, double dt, const LqrConfig& cfg) {
  validate_lqr_config(cfg);
  const Eigen::Index m = model.A.rows();
  const Eigen::Index n = model.B.cols();
  if (cfg.Q.rows() != m || cfg.R.rows() != n) {
    throw ContractViolation("lqr: cost dimensions do not match the model");
  }
  const Mat a_tilde = Mat::Identity(m, m) + dt * model.A;
  const Mat b_tilde = dt * model.B;

  Mat p = cfg.Q;
  for (long it = 0; it < cfg.max_iters; ++it) {
    const Mat btp = b_tilde.transpose() * p;        // n x m
    const Mat gram = cfg.R + btp * b_tilde;         // n x n
    Eigen::PartialPivLU<Mat> lu(gram);
    const Mat gain = lu.solve(btp * a_tilde);       // n x m
    if (!gain.allFinite()) throw NumericalError("lqr: singular R + B'PB");
    const Mat atp = a_tilde.transpose() * p;
    const Mat p_next = cfg.Q + atp * a_tilde - atp * b_tilde * gain;
    const double delta = (p_next - p).cwiseAbs().maxCoeff();
    p = p_next;
    if (!p.allFinite() || p.cwiseAbs().maxCoeff() > 1e100) {
      throw ConvergenceError("lqr: Riccati iterates diverged");
    }
    if (delta <= cfg.tol) {
      LinearPolicy policy;
      const Mat btp_f = b_tilde.transpose() * p;
      Eigen::PartialPivLU<Mat> lu_f(cfg.R + btp_f * b_tilde);
      policy.K = lu_f.solve(btp_f * a_tilde);
      if (!policy.K.allFinite()) throw NumericalError("lqr: singular R + B'PB");
      return policy;
    }
  }
  throw ConvergenceError("lqr: Riccati value iteration exceeded max_iters");
}

Mat closed_loop(const LinearModel& model, const LinearPolicy& policy, double dt) {
  return Mat::Identity(model.A.rows(), model.A.cols()) + dt * (model.A - model.B * policy.K);
}

double spectral_radius(const Mat& m) {
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace shieldsynth
