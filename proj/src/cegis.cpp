#include "shieldsynth/cegis.hpp"

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

void validate_refine_config(const RefineConfig& cfg) {
  if (cfg.lr <= 0.0 || cfg.horizon <= 0 || cfg.perturb_scale <= 0.0 || cfg.max_outer_iters <= 0) {
    throw ContractViolation(
        "refine config: lr, horizon, perturb_scale, max_outer_iters must be positive");
  }
}

LinearPolicy refine_policy(const LinearPolicy& policy, const CounterexampleSet& z,
                           const LinearModel& model, double dt,
                           const std::function<double(const Vec&, const Vec&)>& reward,
                           const RefineConfig& cfg, uint64_t rng_seed) {
  if (z.empty()) throw ContractViolation("refine_policy: counterexample set is empty");
  if (cfg.lr < 0.0 || cfg.horizon <= 0 || cfg.perturb_scale <= 0.0) {
    throw ContractViolation("refine_policy: bad config");
  }

  LinearPolicy out = policy;
  size_t ce_index = 0;
  for (const Vec& ce : z.points) {
    Rng rng(derive_seed(rng_seed, ce_index++));
    const double eps = cfg.perturb_scale * rng.uniform(0.5, 1.5);
    Mat dir;
    if (cfg.mode == RefineMode::Ars) {
      dir = Mat(out.K.rows(), out.K.cols());
      for (Eigen::Index i = 0; i < dir.rows(); ++i) {
        for (Eigen::Index j = 0; j < dir.cols(); ++j) dir(i, j) = rng.normal();
      }
    } else {
      dir = Mat::Ones(out.K.rows(), out.K.cols());
    }

    Vec s = ce;
    for (int t = 1; t <= cfg.horizon; ++t) {
      s = predict_next(model, s, out.command(s), dt);
      if (!s.allFinite()) throw NumericalError("refine_policy: rollout diverged");
      const Vec c = out.command(s);
      const Vec c_plus = -((out.K + eps * dir) * s);
      const Vec c_minus = -((out.K - eps * dir) * s);
      // the listing treats the command-difference term as a scalar; vector
      // commands sum over entries
      const double d_plus = -(c_plus - c).sum() + cfg.reward_weight * reward(s, c_plus);
      const double d_minus = -(c_minus - c).sum() + cfg.reward_weight * reward(s, c_minus);
      const double delta = (d_plus - d_minus) / (2.0 * eps);
      if (!std::isfinite(delta)) throw NumericalError("refine_policy: non-finite gradient");
      out.K += cfg.lr * delta * dir;
    }
  }
  return out;
}

SynthesisResult synthesize_linear_policy(const Environment& env, const LinearModel& model,
                                         const RefineConfig& cfg, const LqrConfig& lqr_cfg) {
  validate_refine_config(cfg);
  SynthesisResult res;
  res.policy = solve_lqr(model, env.dt, lqr_cfg);
  for (int iter = 0; iter < cfg.max_outer_iters; ++iter) {
    const Mat a_cl = closed_loop(model, res.policy, env.dt);
    res.moas = compute_moas(a_cl, env.safe_set, cfg.moas_max_horizon);
    if (!res.moas.converged) {
      throw SynthesisFailure("synthesis aborted: MOAS construction hit max_horizon at outer "
                             "iteration " +
                             std::to_string(iter));
    }
    const CounterexampleSet z = find_counterexamples(
        res.moas, env.init_box, cfg.counterexample_samples, derive_seed(cfg.seed, 0x5A00 + iter));
    res.log.push_back({iter, static_cast<int>(z.points.size()), res.policy.K, res.moas.horizon});
    if (z.empty()) {
      if (!box_contained(res.moas.set, env.init_box)) {
        throw SynthesisFailure("synthesis: containment certificate failed after empty "
                               "counterexample scan");
      }
      return res;
    }
    res.policy = refine_policy(res.policy, z, model, env.dt, env.reward, cfg,
                               derive_seed(cfg.seed, iter));
  }
  throw SynthesisFailure("synthesis exceeded max_outer_iters without covering the initial box");
}

std::string synthesis_log_to_jsonl(const std::vector<SynthesisRecord>& log) {
  std::string out;
  for (const SynthesisRecord& rec : log) {
    nlohmann::json j;
    j["iter"] = rec.iter;
    j["num_counterexamples"] = rec.num_counterexamples;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rec.K.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < rec.K.cols(); ++k) row.push_back(rec.K(i, k));
      rows.push_back(std::move(row));
    }
    j["K"] = std::move(rows);
    j["moas_horizon"] = rec.moas_horizon;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace shieldsynth
