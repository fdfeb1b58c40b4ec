#include "shieldsynth/sim.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <thread>

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

namespace {

constexpr uint64_t kInitStateSalt = 0xFFFFFFFF00000001ULL;

uint64_t step_key(uint64_t episode_seed, int t) {
  return derive_seed(episode_seed, static_cast<uint64_t>(t));
}

}  // namespace

EpisodeTrace run_episode(const Environment& env, const Policy& policy, const Shield* shield,
                         int steps, uint64_t rng_seed) {
  if (steps < 1) throw ContractViolation("run_episode: steps must be >= 1");
  if (policy.state_dim != env.state_dim || policy.command_dim != env.command_dim) {
    throw ContractViolation("run_episode: policy dimensions do not match the environment");
  }
  EpisodeTrace trace;
  trace.seed = rng_seed;
  trace.states.reserve(static_cast<size_t>(steps));
  trace.commands_raw.reserve(static_cast<size_t>(steps));
  trace.commands_applied.reserve(static_cast<size_t>(steps));
  trace.intervened.reserve(static_cast<size_t>(steps));

  Vec s = sample_initial(env, derive_seed(rng_seed, kInitStateSalt));
  trace.violated = !is_safe(env.safe_set, s);
  for (int t = 0; t < steps; ++t) {
    const Vec c_raw = policy.act(s, step_key(rng_seed, t));
    Vec c_applied = c_raw;
    bool intervened = false;
    if (shield != nullptr) {
      const auto t0 = std::chrono::steady_clock::now();
      ShieldDecision dec = shield_command(*shield, s, c_raw);
      const auto t1 = std::chrono::steady_clock::now();
      trace.shield_ns += std::chrono::duration<double, std::nano>(t1 - t0).count();
      ++trace.shield_calls;
      c_applied = std::move(dec.command);
      intervened = dec.intervened;
    }
    trace.states.push_back(s);
    trace.commands_raw.push_back(c_raw);
    trace.commands_applied.push_back(c_applied);
    trace.intervened.push_back(intervened ? 1 : 0);
    s = step(env, s, c_applied);
    if (!is_safe(env.safe_set, s)) trace.violated = true;
  }
  trace.final_state = s;
  return trace;
}

bool necessary_intervention(const Environment& env, const Policy& policy,
                            const EpisodeTrace& trace, int t, int horizon) {
  const int total = static_cast<int>(trace.states.size());
  if (t < 0 || t >= total) throw ContractViolation("necessary_intervention: step out of range");
  if (!trace.intervened[static_cast<size_t>(t)]) {
    throw ContractViolation("necessary_intervention: step was not an intervention");
  }
  if (trace.commands_raw[static_cast<size_t>(t)]
          .cwiseEqual(trace.commands_applied[static_cast<size_t>(t)])
          .all()) {
    return false;  // a no-op intervention prevents nothing
  }
  // counterfactual: let the raw policy run uncorrected from here and see
  // whether the trajectory the intervention cut off was headed somewhere
  // unsafe, replaying the policy's per-step draws from the trace seed
  const int budget = std::min(horizon, total - t);
  Vec s = step(env, trace.states[static_cast<size_t>(t)],
               trace.commands_raw[static_cast<size_t>(t)]);
  if (!is_safe(env.safe_set, s)) return true;
  for (int j = 1; j < budget; ++j) {
    const Vec c_raw = policy.act(s, step_key(trace.seed, t + j));
    s = step(env, s, c_raw);
    if (!is_safe(env.safe_set, s)) return true;
  }
  return false;
}

std::optional<int> steps_to_steady(const EpisodeTrace& trace, double eps_norm, int window) {
  if (window < 1) throw ContractViolation("steps_to_steady: window must be >= 1");
  const int n = static_cast<int>(trace.states.size());
  int run = 0;
  for (int i = 0; i < n; ++i) {
    if (trace.states[static_cast<size_t>(i)].cwiseAbs().maxCoeff() <= eps_norm) {
      if (++run >= window) return i - window + 1;
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

double default_steady_eps(const Environment& env) {
  double tightest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < env.safe_set.rows(); ++i) {
    const double scale = env.safe_set.D.row(i).cwiseAbs().maxCoeff();
    if (scale > 0.0) tightest = std::min(tightest, env.safe_set.d[i] / scale);
  }
  return 0.05 * tightest;
}

EvalReport evaluate(const Environment& env, const Policy& policy, const Shield* shield,
                    int episodes, int steps, uint64_t seed, int counterfactual_horizon,
                    int threads) {
  if (episodes < 1) throw ContractViolation("evaluate: episodes must be >= 1");
  EvalReport report;
  report.episodes = episodes;
  report.rows.resize(static_cast<size_t>(episodes));
  const double steady_eps = default_steady_eps(env);

  double shield_ns = 0.0;
  long shield_calls = 0;

  auto run_range = [&](int begin, int end, double* ns, long* calls) {
    for (int e = begin; e < end; ++e) {
      const uint64_t ep_seed = derive_seed(seed, static_cast<uint64_t>(e));
      EpisodeTrace trace = run_episode(env, policy, shield, steps, ep_seed);
      EpisodeRow row;
      row.episode = e;
      row.violated = trace.violated;
      for (size_t t = 0; t < trace.intervened.size(); ++t) {
        if (!trace.intervened[t]) continue;
        ++row.interventions;
        if (necessary_intervention(env, policy, trace, static_cast<int>(t),
                                   counterfactual_horizon)) {
          ++row.necessary_interventions;
        }
      }
      row.steps_to_steady = steps_to_steady(trace, steady_eps, 10);
      *ns += trace.shield_ns;
      *calls += trace.shield_calls;
      report.rows[static_cast<size_t>(e)] = std::move(row);
    }
  };

  if (threads <= 1) {
    run_range(0, episodes, &shield_ns, &shield_calls);
  } else {
    const int workers = std::min(threads, episodes);
    std::vector<std::thread> pool;
    std::vector<double> ns(static_cast<size_t>(workers), 0.0);
    std::vector<long> calls(static_cast<size_t>(workers), 0);
    for (int w = 0; w < workers; ++w) {
      const int begin = episodes * w / workers;
      const int end = episodes * (w + 1) / workers;
      pool.emplace_back(run_range, begin, end, &ns[static_cast<size_t>(w)],
                        &calls[static_cast<size_t>(w)]);
    }
    for (auto& th : pool) th.join();
    for (int w = 0; w < workers; ++w) {
      shield_ns += ns[static_cast<size_t>(w)];
      shield_calls += calls[static_cast<size_t>(w)];
    }
  }

  double steady_sum = 0.0;
  long steady_count = 0;
  for (const EpisodeRow& row : report.rows) {
    if (row.violated) ++report.violations;
    report.interventions += row.interventions;
    report.necessary_interventions += row.necessary_interventions;
    if (row.steps_to_steady) {
      steady_sum += *row.steps_to_steady;
      ++steady_count;
    }
  }
  report.shield_time_ns_per_step = shield_calls > 0 ? shield_ns / shield_calls : 0.0;
  report.mean_steps_to_steady =
      steady_count > 0 ? steady_sum / steady_count : std::numeric_limits<double>::quiet_NaN();
  return report;
}

std::string eval_report_csv(const EvalReport& report) {
  std::string out = "episode,violated,interventions,necessary_interventions,steps_to_steady\n";
  for (const EpisodeRow& row : report.rows) {
    out += std::to_string(row.episode);
    out += row.violated ? ",1," : ",0,";
    out += std::to_string(row.interventions);
    out += ',';
    out += std::to_string(row.necessary_interventions);
    out += ',';
    if (row.steps_to_steady) out += std::to_string(*row.steps_to_steady);
    out += '\n';
  }
  return out;
}

std::string eval_report_json(const EvalReport& report, const std::string& env_name) {
  nlohmann::json j;
  j["env"] = env_name;
  j["episodes"] = report.episodes;
  j["violations"] = report.violations;
  j["interventions"] = report.interventions;
  j["necessary_interventions"] = report.necessary_interventions;
  j["shield_time_ns_per_step"] = report.shield_time_ns_per_step;
  if (std::isfinite(report.mean_steps_to_steady)) {
    j["mean_steps_to_steady"] = report.mean_steps_to_steady;
  } else {
    j["mean_steps_to_steady"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace shieldsynth
