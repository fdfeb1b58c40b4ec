#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

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

namespace py = pybind11;
using namespace shieldsynth;

namespace {

Policy policy_from_config(const RunConfig& cfg, const Environment& env, const LinearPolicy& k) {
  LinearPolicy scaled{Mat(cfg.surrogate.gain_scale * k.K)};
  return perturbed_linear_policy(scaled, env.command_bounds, cfg.surrogate.noise_scale,
                                 cfg.surrogate.fault_prob, derive_seed(cfg.seed, 0xAB));
}

struct SynthOutput {
  Shield shield;
  long moas_horizon = 0;
  int outer_iterations = 0;
  std::vector<std::pair<double, double>> bo_trace;
};

SynthOutput synthesize(const std::string& env_name, const std::string& config_json) {
  RunConfig cfg = config_json.empty() ? default_run_config(env_name)
                                      : run_config_from_json(config_json);
  if (!env_name.empty()) cfg.env_name = env_name;
  Environment env = resolve_environment(cfg);
  LinearModel model = infer_dynamics(env, box_midpoint(env.init_box),
                                     box_midpoint(env.command_bounds), cfg.linearize_eps);
  RefineConfig refine = cfg.refine;
  refine.seed = cfg.seed;
  SynthesisResult synth = synthesize_linear_policy(
      env, model, refine, resolve_lqr_config(cfg, env.state_dim, env.command_dim));
  Policy policy = policy_from_config(cfg, env, synth.policy);
  BoConfig bo = cfg.bo;
  bo.seed = derive_seed(cfg.seed, 0xB0);
  BoResult res = optimize_threshold(env, policy, synth.policy, bo);

  SynthOutput out;
  out.shield = Shield{synth.policy, res.lambda, Norm::Linf,
                      {cfg.env_name, cfg.seed, synth.moas.horizon}};
  out.moas_horizon = synth.moas.horizon;
  out.outer_iterations = static_cast<int>(synth.log.size());
  for (const BoTracePoint& pt : res.trace) out.bo_trace.emplace_back(pt.lambda, pt.objective);
  return out;
}

py::dict evaluate_py(const std::string& env_name, const Shield* shield, int episodes, int steps,
                     uint64_t seed, const std::string& config_json) {
  RunConfig cfg = config_json.empty() ? default_run_config(env_name)
                                      : run_config_from_json(config_json);
  cfg.env_name = env_name;
  Environment env = resolve_environment(cfg);
  const LinearPolicy base =
      shield != nullptr
          ? shield->policy
          : solve_lqr(infer_dynamics(env, box_midpoint(env.init_box),
                                     box_midpoint(env.command_bounds), cfg.linearize_eps),
                      env.dt, resolve_lqr_config(cfg, env.state_dim, env.command_dim));
  Policy policy = policy_from_config(cfg, env, base);
  EvalReport rep = evaluate(env, policy, shield, episodes, steps, seed,
                            cfg.counterfactual_horizon, cfg.threads);
  py::dict d;
  d["episodes"] = rep.episodes;
  d["violations"] = rep.violations;
  d["interventions"] = rep.interventions;
  d["necessary_interventions"] = rep.necessary_interventions;
  d["shield_time_ns_per_step"] = rep.shield_time_ns_per_step;
  d["mean_steps_to_steady"] = rep.mean_steps_to_steady;
  return d;
}

}  // namespace

PYBIND11_MODULE(_shieldsynth, m) {
  m.doc() = "Runtime-shield synthesis for black-box control policies";

  py::register_exception<ContractViolation>(m, "ContractViolation");
  py::register_exception<NumericalError>(m, "NumericalError");
  py::register_exception<ConvergenceError>(m, "ConvergenceError");
  py::register_exception<SynthesisFailure>(m, "SynthesisFailure");
  py::register_exception<ParseError>(m, "ShieldParseError");
  py::register_exception<ConfigError>(m, "ConfigError");

  py::class_<Shield>(m, "Shield")
      .def_property_readonly("K", [](const Shield& sh) { return sh.policy.K; })
      .def_property_readonly("lambda_", [](const Shield& sh) { return sh.lambda; })
      .def_property_readonly("norm",
                             [](const Shield& sh) { return std::string(norm_name(sh.norm)); })
      .def("command",
           [](const Shield& sh, const Vec& s, const Vec& c) {
             ShieldDecision dec = shield_command(sh, s, c);
             return py::make_tuple(dec.command, dec.intervened);
           },
           py::arg("state"), py::arg("command"))
      .def("emit", [](const Shield& sh) { return emit_program(sh); })
      .def("to_json", [](const Shield& sh) { return shield_to_json(sh); })
      .def_static("from_json", [](const std::string& text) { return shield_from_json(text); })
      .def_static("parse", [](const std::string& text) { return parse_program(text); });

  m.def("environments", [] { return environment_names(); });

  m.def(
      "infer_dynamics",
      [](const std::string& env_name, double eps) {
        Environment env = make_environment(env_name);
        LinearModel model = infer_dynamics(env, box_midpoint(env.init_box),
                                           box_midpoint(env.command_bounds), eps);
        return py::make_tuple(model.A, model.B);
      },
      py::arg("env"), py::arg("eps") = kDefaultEps);

  m.def(
      "synthesize",
      [](const std::string& env_name, const std::string& config_json) {
        SynthOutput out = synthesize(env_name, config_json);
        py::dict d;
        d["shield"] = out.shield;
        d["moas_horizon"] = out.moas_horizon;
        d["outer_iterations"] = out.outer_iterations;
        d["bo_trace"] = out.bo_trace;
        return d;
      },
      py::arg("env"), py::arg("config_json") = std::string{});

  m.def("evaluate", &evaluate_py, py::arg("env"), py::arg("shield") = nullptr,
        py::arg("episodes") = 100, py::arg("steps") = 1000, py::arg("seed") = 42,
        py::arg("config_json") = std::string{});

  m.def(
      "step",
      [](const std::string& env_name, const Vec& s, const Vec& c) {
        return step(make_environment(env_name), s, c);
      },
      py::arg("env"), py::arg("state"), py::arg("command"));

  m.def(
      "sample_initial",
      [](const std::string& env_name, uint64_t seed) {
        return sample_initial(make_environment(env_name), seed);
      },
      py::arg("env"), py::arg("seed"));

#ifdef VERSION_INFO
  m.attr("__version__") = VERSION_INFO;
#else
  m.attr("__version__") = "dev";
#endif
}
