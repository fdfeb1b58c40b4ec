#include "shieldsynth/linearize.hpp"

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

namespace {

Vec eval_dynamics(const Environment& env, const Vec& s, const Vec& c) {
  Vec y = env.dynamics(s, c);
  if (y.size() != env.state_dim) {
    throw ContractViolation("infer_dynamics: dynamics output dimension mismatch");
  }
  if (!y.allFinite()) throw NumericalError("infer_dynamics: non-finite dynamics output");
  return y;
}

Mat mat_from_json(const nlohmann::json& rows) {
  const auto nr = static_cast<Eigen::Index>(rows.size());
  const auto nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Mat m(nr, nc);
  for (Eigen::Index i = 0; i < nr; ++i) {
    for (Eigen::Index j = 0; j < nc; ++j) m(i, j) = rows[i][j].get<double>();
  }
  return m;
}

nlohmann::json mat_to_json(const Mat& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

LinearModel infer_dynamics(const Environment& env, const Vec& s0, const Vec& c0, double eps) {
  if (eps <= 0.0) throw ContractViolation("infer_dynamics: eps must be positive");
  if (!s0.allFinite() || !c0.allFinite()) {
    throw ContractViolation("infer_dynamics: operating point must be finite");
  }
  if (s0.size() != env.state_dim || c0.size() != env.command_dim) {
    throw ContractViolation("infer_dynamics: operating point dimension mismatch");
  }
  LinearModel model;
  model.s0 = s0;
  model.c0 = c0;
  model.eps = eps;
  model.A = Mat(env.state_dim, env.state_dim);
  model.B = Mat(env.state_dim, env.command_dim);
  for (int j = 0; j < env.state_dim; ++j) {
    Vec hi = s0, lo = s0;
    hi[j] += eps;
    lo[j] -= eps;
    model.A.col(j) = (eval_dynamics(env, hi, c0) - eval_dynamics(env, lo, c0)) / (2.0 * eps);
  }
  for (int j = 0; j < env.command_dim; ++j) {
    Vec hi = c0, lo = c0;
    hi[j] += eps;
    lo[j] -= eps;
    model.B.col(j) = (eval_dynamics(env, s0, hi) - eval_dynamics(env, s0, lo)) / (2.0 * eps);
  }
  if (!model.A.allFinite() || !model.B.allFinite()) {
    throw NumericalError("infer_dynamics: non-finite Jacobian entry");
  }
  return model;
}

Vec predict_next(const LinearModel& model, const Vec& s, const Vec& c, double dt) {
  return s + (model.A * s + model.B * c) * dt;
}

double fidelity_mse_from(const Environment& env, const LinearModel& model, const Policy& policy,
                         const Vec& start, int steps, uint64_t rng_seed) {
  if (steps < 1) throw ContractViolation("fidelity_mse: steps must be >= 1");
  Vec s_true = start;
  Vec s_model = start;
  double acc = 0.0;
  for (int t = 0; t < steps; ++t) {
    const uint64_t key = derive_seed(rng_seed, static_cast<uint64_t>(t));
    const Vec c_true = clamp_to_box(env.command_bounds, policy.act(s_true, key));
    const Vec c_model = clamp_to_box(env.command_bounds, policy.act(s_model, key));
    s_true = step(env, s_true, c_true);
    s_model = predict_next(model, s_model, c_model, env.dt);
    if (!s_model.allFinite()) throw NumericalError("fidelity_mse: model rollout diverged");
    acc += (s_true - s_model).squaredNorm();
  }
  return acc / static_cast<double>(steps);
}

double fidelity_mse(const Environment& env, const LinearModel& model, const Policy& policy,
                    int steps, uint64_t rng_seed) {
  const Vec start = sample_initial(env, derive_seed(rng_seed, 0x1d17));
  return fidelity_mse_from(env, model, policy, start, steps, rng_seed);
}

std::string linear_model_to_json(const LinearModel& model) {
  nlohmann::json j;
  j["A"] = mat_to_json(model.A);
  j["B"] = mat_to_json(model.B);
  auto s0 = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.s0.size(); ++i) s0.push_back(model.s0[i]);
  auto c0 = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.c0.size(); ++i) c0.push_back(model.c0[i]);
  j["s0"] = std::move(s0);
  j["c0"] = std::move(c0);
  j["eps"] = model.eps;
  return j.dump();
}

LinearModel linear_model_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("linear_model_from_json: ") + e.what());
  }
  LinearModel model;
  model.A = mat_from_json(j.at("A"));
  model.B = mat_from_json(j.at("B"));
  const auto& s0 = j.at("s0");
  model.s0 = Vec(static_cast<Eigen::Index>(s0.size()));
  for (Eigen::Index i = 0; i < model.s0.size(); ++i) model.s0[i] = s0[i].get<double>();
  const auto& c0 = j.at("c0");
  model.c0 = Vec(static_cast<Eigen::Index>(c0.size()));
  for (Eigen::Index i = 0; i < model.c0.size(); ++i) model.c0[i] = c0[i].get<double>();
  model.eps = j.at("eps").get<double>();
  return model;
}

}  // namespace shieldsynth
