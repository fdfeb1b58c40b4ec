#include "shieldsynth/config.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"

namespace shieldsynth {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
    }
  }
}

}  // namespace

RunConfig default_run_config(const std::string& env_name) {
  RunConfig cfg;
  cfg.env_name = env_name;
  // Surrogate parameters tuned per benchmark so the unshielded policy
  // violates in a small share of episodes (the paper's ~8% regime).
  if (env_name == "pendulum-v1") {
    cfg.surrogate = {2.0, 0.002, 0.60};
  } else if (env_name == "pendulum-v2") {
    cfg.surrogate = {0.6, 0.080, 0.50};
  } else if (env_name == "cartpole-v1") {
    cfg.surrogate = {1.0, 0.020, 0.90};
    // keep the threshold domain below the fault pass-through edge so every
    // near-core saturated command stays interceptable
    cfg.bo.lambda_max = 8.0;
  } else if (env_name == "cartpole-v2") {
    cfg.surrogate = {1.0, 0.030, 0.85};
    cfg.bo.lambda_max = 8.0;
  } else if (env_name == "selfdrive-v1") {
    cfg.surrogate = {2.5, 0.010, 0.25};
  } else if (env_name == "selfdrive-v2") {
    cfg.surrogate = {2.5, 0.010, 0.60};
    // lazy initialization: the raw LQR gain under-covers the init box and
    // the CEGIS refinement has real work to do
    cfg.r_scale = 100.0;
  } else if (env_name == "quadcopter") {
    cfg.surrogate = {4.0, 0.010, 0.40};
  } else if (env_name == "platoon4") {
    cfg.surrogate = {0.4, 0.050, 0.90};
  }
  return cfg;
}

RunConfig run_config_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");

  RunConfig cfg = default_run_config(j.value("env", std::string("pendulum-v1")));
  check_keys(j,
             {"env", "seed", "policy", "linearize", "lqr", "refine", "bo", "eval",
              "env_overrides"},
             "top level");
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("policy")) {
    const auto& p = j["policy"];
    check_keys(p, {"type", "path", "noise_scale", "fault_prob", "gain_scale"}, "policy");
    cfg.policy_type = p.value("type", cfg.policy_type);
    if (cfg.policy_type != "surrogate" && cfg.policy_type != "mlp") {
      throw ConfigError("policy.type must be 'surrogate' or 'mlp'");
    }
    cfg.mlp_path = p.value("path", cfg.mlp_path);
    cfg.surrogate.noise_scale = p.value("noise_scale", cfg.surrogate.noise_scale);
    cfg.surrogate.fault_prob = p.value("fault_prob", cfg.surrogate.fault_prob);
    cfg.surrogate.gain_scale = p.value("gain_scale", cfg.surrogate.gain_scale);
  }
  if (j.contains("linearize")) {
    const auto& p = j["linearize"];
    check_keys(p, {"eps", "at"}, "linearize");
    cfg.linearize_eps = p.value("eps", cfg.linearize_eps);
    cfg.linearize_at = p.value("at", cfg.linearize_at);
    if (cfg.linearize_at != "midpoint" && cfg.linearize_at != "random") {
      throw ConfigError("linearize.at must be 'midpoint' or 'random'");
    }
  }
  if (j.contains("lqr")) {
    const auto& p = j["lqr"];
    check_keys(p, {"q_scale", "r_scale", "tol", "max_iters"}, "lqr");
    cfg.q_scale = p.value("q_scale", cfg.q_scale);
    cfg.r_scale = p.value("r_scale", cfg.r_scale);
    cfg.lqr.tol = p.value("tol", cfg.lqr.tol);
    cfg.lqr.max_iters = p.value("max_iters", cfg.lqr.max_iters);
  }
  if (j.contains("refine")) {
    const auto& p = j["refine"];
    check_keys(p,
               {"lr", "T", "perturb_scale", "max_outer_iters", "mode", "reward_weight",
                "moas_max_horizon", "counterexample_samples"},
               "refine");
    cfg.refine.lr = p.value("lr", cfg.refine.lr);
    cfg.refine.horizon = p.value("T", cfg.refine.horizon);
    cfg.refine.perturb_scale = p.value("perturb_scale", cfg.refine.perturb_scale);
    cfg.refine.max_outer_iters = p.value("max_outer_iters", cfg.refine.max_outer_iters);
    cfg.refine.reward_weight = p.value("reward_weight", cfg.refine.reward_weight);
    cfg.refine.moas_max_horizon = p.value("moas_max_horizon", cfg.refine.moas_max_horizon);
    cfg.refine.counterexample_samples =
        p.value("counterexample_samples", cfg.refine.counterexample_samples);
    const std::string mode = p.value("mode", std::string("uniform"));
    if (mode == "uniform") {
      cfg.refine.mode = RefineMode::UniformShift;
    } else if (mode == "ars") {
      cfg.refine.mode = RefineMode::Ars;
    } else {
      throw ConfigError("refine.mode must be 'uniform' or 'ars'");
    }
  }
  if (j.contains("bo")) {
    const auto& p = j["bo"];
    check_keys(p,
               {"lambda_max", "init_points", "iterations", "eval_episodes", "eval_steps",
                "grid_points"},
               "bo");
    cfg.bo.lambda_max = p.value("lambda_max", cfg.bo.lambda_max);
    cfg.bo.init_points = p.value("init_points", cfg.bo.init_points);
    cfg.bo.iterations = p.value("iterations", cfg.bo.iterations);
    cfg.bo.eval_episodes = p.value("eval_episodes", cfg.bo.eval_episodes);
    cfg.bo.eval_steps = p.value("eval_steps", cfg.bo.eval_steps);
    cfg.bo.grid_points = p.value("grid_points", cfg.bo.grid_points);
  }
  if (j.contains("eval")) {
    const auto& p = j["eval"];
    check_keys(p, {"episodes", "steps", "counterfactual_horizon", "threads"}, "eval");
    cfg.eval_episodes = p.value("episodes", cfg.eval_episodes);
    cfg.eval_steps = p.value("steps", cfg.eval_steps);
    cfg.counterfactual_horizon = p.value("counterfactual_horizon", cfg.counterfactual_horizon);
    cfg.threads = p.value("threads", cfg.threads);
  }
  if (j.contains("env_overrides")) cfg.env_overrides_json = j["env_overrides"].dump();
  return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j;
  j["env"] = cfg.env_name;
  j["seed"] = cfg.seed;
  j["policy"] = {{"type", cfg.policy_type},
                 {"path", cfg.mlp_path},
                 {"noise_scale", cfg.surrogate.noise_scale},
                 {"fault_prob", cfg.surrogate.fault_prob},
                 {"gain_scale", cfg.surrogate.gain_scale}};
  j["linearize"] = {{"eps", cfg.linearize_eps}, {"at", cfg.linearize_at}};
  j["lqr"] = {{"q_scale", cfg.q_scale},
              {"r_scale", cfg.r_scale},
              {"tol", cfg.lqr.tol},
              {"max_iters", cfg.lqr.max_iters}};
  j["refine"] = {{"lr", cfg.refine.lr},
                 {"T", cfg.refine.horizon},
                 {"perturb_scale", cfg.refine.perturb_scale},
                 {"max_outer_iters", cfg.refine.max_outer_iters},
                 {"mode", cfg.refine.mode == RefineMode::Ars ? "ars" : "uniform"},
                 {"reward_weight", cfg.refine.reward_weight},
                 {"moas_max_horizon", cfg.refine.moas_max_horizon},
                 {"counterexample_samples", cfg.refine.counterexample_samples}};
  j["bo"] = {{"lambda_max", cfg.bo.lambda_max},
             {"init_points", cfg.bo.init_points},
             {"iterations", cfg.bo.iterations},
             {"eval_episodes", cfg.bo.eval_episodes},
             {"eval_steps", cfg.bo.eval_steps},
             {"grid_points", cfg.bo.grid_points}};
  j["eval"] = {{"episodes", cfg.eval_episodes},
               {"steps", cfg.eval_steps},
               {"counterfactual_horizon", cfg.counterfactual_horizon},
               {"threads", cfg.threads}};
  if (!cfg.env_overrides_json.empty()) {
    j["env_overrides"] = nlohmann::json::parse(cfg.env_overrides_json);
  }
  return j.dump(2);
}

Environment resolve_environment(const RunConfig& cfg) {
  if (cfg.env_overrides_json.empty()) return make_environment(cfg.env_name);
  return make_environment(cfg.env_name, cfg.env_overrides_json);
}

LqrConfig resolve_lqr_config(const RunConfig& cfg, int state_dim, int command_dim) {
  LqrConfig lqr = cfg.lqr;
  if (lqr.Q.size() == 0) lqr.Q = cfg.q_scale * Mat::Identity(state_dim, state_dim);
  if (lqr.R.size() == 0) lqr.R = cfg.r_scale * Mat::Identity(command_dim, command_dim);
  return lqr;
}

}  // namespace shieldsynth
