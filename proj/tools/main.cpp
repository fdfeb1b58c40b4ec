#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "shieldsynth/cegis.hpp"
#include "shieldsynth/config.hpp"
#include "shieldsynth/env.hpp"
#include "shieldsynth/errors.hpp"
#include "shieldsynth/linearize.hpp"
#include "shieldsynth/lqr.hpp"
#include "shieldsynth/moas.hpp"
#include "shieldsynth/policy.hpp"
#include "shieldsynth/rng.hpp"
#include "shieldsynth/shield.hpp"
#include "shieldsynth/sim.hpp"
#include "shieldsynth/switching.hpp"

namespace fs = std::filesystem;
using namespace shieldsynth;

namespace {

int log_level() {
  const char* env = std::getenv("SHIELDSYNTH_LOG");
  if (env == nullptr) return 1;  // warn
  const std::string v(env);
  if (v == "debug") return 3;
  if (v == "info") return 2;
  if (v == "warn") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[shieldsynth] " << msg << "\n";
}

struct CommonFlags {
  std::string env_name;
  std::string config_path;
  std::string out_dir = ".";
  std::string ablate = "none";
  std::optional<uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> steps;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option("--env", flags->env_name, "benchmark environment name");
  cmd->add_option("--config", flags->config_path, "JSON run-config file");
  cmd->add_option("--seed", flags->seed, "master seed");
  cmd->add_option("--episodes", flags->episodes, "evaluation episodes");
  cmd->add_option("--steps", flags->steps, "steps per episode");
  cmd->add_option("--threads", flags->threads, "episode parallelism (default 1)");
  cmd->add_option("--ablate", flags->ablate, "none | no-synthesis | no-optimization")
      ->check(CLI::IsMember({"none", "no-synthesis", "no-optimization"}));
  cmd->add_option("--out", flags->out_dir, "output directory");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << text;
}

RunConfig load_run_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config_path.empty()) {
    cfg = run_config_from_json(slurp(flags.config_path));
    if (!flags.env_name.empty() && flags.env_name != cfg.env_name) {
      // --env wins; reload the per-env defaults under the file's overrides
      nlohmann::json j = nlohmann::json::parse(slurp(flags.config_path));
      j["env"] = flags.env_name;
      cfg = run_config_from_json(j.dump());
    }
  } else {
    cfg = default_run_config(flags.env_name.empty() ? "pendulum-v1" : flags.env_name);
  }
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.episodes) cfg.eval_episodes = *flags.episodes;
  if (flags.steps) cfg.eval_steps = *flags.steps;
  if (flags.threads) cfg.threads = *flags.threads;
  return cfg;
}

Vec operating_point_state(const RunConfig& cfg, const Environment& env) {
  if (cfg.linearize_at == "random") {
    return sample_initial(env, derive_seed(cfg.seed, 0x0b5e));
  }
  return box_midpoint(env.init_box);
}

Policy make_run_policy(const RunConfig& cfg, const Environment& env, const LinearPolicy& k) {
  if (cfg.policy_type == "mlp") {
    if (cfg.mlp_path.empty()) throw ConfigError("policy.type=mlp requires policy.path");
    MlpWeights w = mlp_from_json(slurp(cfg.mlp_path));
    if (w.state_dim != env.state_dim || w.command_dim != env.command_dim) {
      throw ConfigError("mlp policy dimensions do not match the environment");
    }
    return make_mlp_policy(std::move(w));
  }
  LinearPolicy scaled{Mat(cfg.surrogate.gain_scale * k.K)};
  return perturbed_linear_policy(scaled, env.command_bounds, cfg.surrogate.noise_scale,
                                 cfg.surrogate.fault_prob, derive_seed(cfg.seed, 0xAB));
}

double ablated_random_lambda(const RunConfig& cfg, const Environment& env) {
  Rng rng(derive_seed(cfg.seed, 0x7A));
  return rng.uniform(0.0, default_lambda_max(env));
}

int cmd_synth(const CommonFlags& flags) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg = load_run_config(flags);
  Environment env = resolve_environment(cfg);
  fs::create_directories(flags.out_dir);

  const Vec s0 = operating_point_state(cfg, env);
  const Vec c0 = Vec::Zero(env.command_dim);
  LinearModel model = infer_dynamics(env, s0, c0, cfg.linearize_eps);
  log_info("inferred dynamics for " + env.name);

  LqrConfig lqr_cfg = resolve_lqr_config(cfg, env.state_dim, env.command_dim);
  RefineConfig refine_cfg = cfg.refine;
  refine_cfg.seed = cfg.seed;

  LinearPolicy gain;
  MoasResult moas;
  std::vector<SynthesisRecord> log;
  if (flags.ablate == "no-synthesis") {
    gain = solve_lqr(model, env.dt, lqr_cfg);
    moas = compute_moas(closed_loop(model, gain, env.dt), env.safe_set,
                        refine_cfg.moas_max_horizon);
    log.push_back({0, -1, gain.K, moas.converged ? moas.horizon : -1});
  } else {
    SynthesisResult res = synthesize_linear_policy(env, model, refine_cfg, lqr_cfg);
    gain = res.policy;
    moas = res.moas;
    log = res.log;
  }
  log_info("gain synthesized");

  Policy policy = make_run_policy(cfg, env, gain);

  double lambda = 0.0;
  std::vector<BoTracePoint> trace;
  if (flags.ablate == "no-optimization") {
    lambda = ablated_random_lambda(cfg, env);
  } else {
    BoConfig bo = cfg.bo;
    bo.seed = derive_seed(cfg.seed, 0xB0);
    bo.counterfactual_horizon = cfg.counterfactual_horizon;
    BoResult res = optimize_threshold(env, policy, gain, bo);
    lambda = res.lambda;
    trace = res.trace;
  }
  log_info("threshold selected: " + std::to_string(lambda));

  Shield shield{gain, lambda, Norm::Linf, {env.name, cfg.seed, moas.converged ? moas.horizon : -1}};
  const double synth_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path out(flags.out_dir);
  spit(out / (env.name + ".shield.json"), shield_to_json(shield));
  spit(out / (env.name + ".shield.py"), emit_program(shield));
  spit(out / (env.name + ".synth.jsonl"), synthesis_log_to_jsonl(log));
  if (!trace.empty()) spit(out / (env.name + ".bo_trace.csv"), bo_trace_csv(trace));
  spit(out / (env.name + ".moas.json"), moas_to_json(moas));

  nlohmann::json summary;
  summary["env"] = env.name;
  summary["seed"] = cfg.seed;
  summary["ablate"] = flags.ablate;
  summary["lambda"] = lambda;
  summary["synthesis_seconds"] = synth_seconds;
  summary["outer_iterations"] = log.size();
  summary["moas_horizon"] = moas.converged ? moas.horizon : -1;
  summary["moas_converged"] = moas.converged;
  spit(out / (env.name + ".synth.json"), summary.dump(2));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& flags, const std::string& shield_path) {
  RunConfig cfg = load_run_config(flags);
  Environment env = resolve_environment(cfg);
  fs::create_directories(flags.out_dir);

  std::string resolved = shield_path;
  if (resolved.empty()) {
    resolved = (fs::path(flags.out_dir) / (env.name + ".shield.json")).string();
  }
  Shield shield = shield_from_json(slurp(resolved));
  if (flags.ablate == "no-optimization") {
    shield.lambda = ablated_random_lambda(cfg, env);
    log_info("ablation: random lambda " + std::to_string(shield.lambda));
  }

  Policy policy = make_run_policy(cfg, env, shield.policy);
  const fs::path out(flags.out_dir);

  EvalReport bare = evaluate(env, policy, nullptr, cfg.eval_episodes, cfg.eval_steps, cfg.seed,
                             cfg.counterfactual_horizon, cfg.threads);
  spit(out / (env.name + ".eval_unshielded.csv"), eval_report_csv(bare));
  spit(out / (env.name + ".eval_unshielded.json"), eval_report_json(bare, env.name));

  EvalReport shielded = evaluate(env, policy, &shield, cfg.eval_episodes, cfg.eval_steps,
                                 cfg.seed, cfg.counterfactual_horizon, cfg.threads);
  spit(out / (env.name + ".eval_shielded.csv"), eval_report_csv(shielded));
  spit(out / (env.name + ".eval_shielded.json"), eval_report_json(shielded, env.name));

  nlohmann::json summary;
  summary["env"] = env.name;
  summary["lambda"] = shield.lambda;
  summary["unshielded_violations"] = bare.violations;
  summary["shielded_violations"] = shielded.violations;
  summary["interventions"] = shielded.interventions;
  summary["necessary_interventions"] = shielded.necessary_interventions;
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_fidelity(const CommonFlags& flags) {
  RunConfig cfg = load_run_config(flags);
  Environment env = resolve_environment(cfg);
  fs::create_directories(flags.out_dir);

  const Vec c0 = Vec::Zero(env.command_dim);
  const Vec equilibrium = box_midpoint(env.init_box);
  const Vec random_start = sample_initial(env, derive_seed(cfg.seed, 0xF1D));

  // noiseless backup policy so the error measures only the model mismatch
  LinearModel model_eq = infer_dynamics(env, equilibrium, c0, cfg.linearize_eps);
  LinearPolicy gain = solve_lqr(model_eq, env.dt, resolve_lqr_config(cfg, env.state_dim,
                                                                     env.command_dim));
  Policy lin;
  lin.name = "linear";
  lin.state_dim = env.state_dim;
  lin.command_dim = env.command_dim;
  lin.act = [gain](const Vec& s, uint64_t) { return gain.command(s); };

  const int steps = cfg.eval_steps;
  const double mse_eq =
      fidelity_mse_from(env, model_eq, lin, equilibrium, steps, derive_seed(cfg.seed, 1));
  LinearModel model_rand = infer_dynamics(env, random_start, c0, cfg.linearize_eps);
  const double mse_rand =
      fidelity_mse_from(env, model_rand, lin, random_start, steps, derive_seed(cfg.seed, 2));

  nlohmann::json j;
  j["env"] = env.name;
  j["mse_random"] = mse_rand;
  j["mse_equilibrium"] = mse_eq;
  spit(fs::path(flags.out_dir) / (env.name + ".fidelity.json"), j.dump(2));
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_report(const CommonFlags& flags) {
  const fs::path dir(flags.out_dir);
  if (!fs::exists(dir)) throw ConfigError("output directory does not exist: " + dir.string());

  std::string md = "| env | unshielded violations | shielded violations | interventions | "
                   "necessary ratio | shield ns/step | mean steps to steady | lambda | "
                   "synth seconds |\n";
  md += "|---|---|---|---|---|---|---|---|---|\n";
  int rows = 0;
  for (const std::string& name : environment_names()) {
    const fs::path bare_path = dir / (name + ".eval_unshielded.json");
    const fs::path shielded_path = dir / (name + ".eval_shielded.json");
    const fs::path synth_path = dir / (name + ".synth.json");
    if (!fs::exists(bare_path) || !fs::exists(shielded_path)) continue;
    const auto bare = nlohmann::json::parse(slurp(bare_path.string()));
    const auto sh = nlohmann::json::parse(slurp(shielded_path.string()));
    char buf[64];
    const double interventions = sh["interventions"].get<double>();
    const double necessary = sh["necessary_interventions"].get<double>();
    std::snprintf(buf, sizeof(buf), "%.3f",
                  interventions > 0 ? necessary / interventions : 0.0);
    md += "| " + name + " | " + std::to_string(bare["violations"].get<long>()) + "/" +
          std::to_string(bare["episodes"].get<long>()) + " | " +
          std::to_string(sh["violations"].get<long>()) + "/" +
          std::to_string(sh["episodes"].get<long>()) + " | " +
          std::to_string(sh["interventions"].get<long>()) + " | " + buf + " | ";
    std::snprintf(buf, sizeof(buf), "%.1f", sh["shield_time_ns_per_step"].get<double>());
    md += std::string(buf) + " | ";
    if (sh["mean_steps_to_steady"].is_null()) {
      md += "- | ";
    } else {
      std::snprintf(buf, sizeof(buf), "%.1f", sh["mean_steps_to_steady"].get<double>());
      md += std::string(buf) + " | ";
    }
    if (fs::exists(synth_path)) {
      const auto synth = nlohmann::json::parse(slurp(synth_path.string()));
      std::snprintf(buf, sizeof(buf), "%.6f", synth["lambda"].get<double>());
      md += std::string(buf) + " | ";
      std::snprintf(buf, sizeof(buf), "%.1f", synth["synthesis_seconds"].get<double>());
      md += std::string(buf) + " |\n";
    } else {
      md += "- | - |\n";
    }
    ++rows;
  }
  if (rows == 0) throw ConfigError("no evaluation artifacts found in " + dir.string());
  spit(dir / "report.md", md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shieldsynth: synthesize and evaluate programmatic runtime shields"};
  app.require_subcommand(1);

  CommonFlags synth_flags, eval_flags, fidelity_flags, report_flags;
  std::string shield_path;

  CLI::App* synth = app.add_subcommand("synth", "synthesize a shield for a benchmark");
  add_common(synth, &synth_flags);
  CLI::App* eval = app.add_subcommand("eval", "evaluate a shield (and the bare policy)");
  add_common(eval, &eval_flags);
  eval->add_option("--shield", shield_path, "shield JSON (default: <out>/<env>.shield.json)");
  CLI::App* fidelity = app.add_subcommand("fidelity", "model-vs-true dynamics MSE report");
  add_common(fidelity, &fidelity_flags);
  CLI::App* report = app.add_subcommand("report", "aggregate eval artifacts into markdown");
  add_common(report, &report_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_flags);
    if (eval->parsed()) return cmd_eval(eval_flags, shield_path);
    if (fidelity->parsed()) return cmd_fidelity(fidelity_flags);
    if (report->parsed()) return cmd_report(report_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
