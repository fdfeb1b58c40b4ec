#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "shieldsynth/config.hpp"
#include "shieldsynth/errors.hpp"

using namespace shieldsynth;

TEST_CASE("defaults exist for every benchmark") {
  for (const std::string& name : environment_names()) {
    RunConfig cfg = default_run_config(name);
    CHECK(cfg.env_name == name);
    CHECK(cfg.surrogate.fault_prob > 0.0);
    Environment env = resolve_environment(cfg);
    LqrConfig lqr = resolve_lqr_config(cfg, env.state_dim, env.command_dim);
    CHECK(lqr.Q.rows() == env.state_dim);
    CHECK(lqr.R.rows() == env.command_dim);
  }
}

TEST_CASE("config json round trip preserves fields") {
  RunConfig cfg = default_run_config("cartpole-v1");
  cfg.seed = 99;
  cfg.refine.lr = 0.5;
  cfg.bo.iterations = 7;
  RunConfig back = run_config_from_json(run_config_to_json(cfg));
  CHECK(back.env_name == "cartpole-v1");
  CHECK(back.seed == 99);
  CHECK(back.refine.lr == 0.5);
  CHECK(back.bo.iterations == 7);
  CHECK(back.surrogate.noise_scale == cfg.surrogate.noise_scale);
}

TEST_CASE("partial json overlays the per-env defaults") {
  RunConfig cfg = run_config_from_json(R"({"env": "quadcopter", "seed": 5,
                                           "bo": {"iterations": 3}})");
  CHECK(cfg.env_name == "quadcopter");
  CHECK(cfg.seed == 5);
  CHECK(cfg.bo.iterations == 3);
  CHECK(cfg.surrogate.noise_scale == default_run_config("quadcopter").surrogate.noise_scale);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(run_config_from_json(R"({"envv": "pendulum-v1"})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"policy": {"type": "rnn"}})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"refine": {"mode": "sideways"}})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json(R"({"linearize": {"at": "corner"}})"), ConfigError);
  CHECK_THROWS_AS(run_config_from_json("not json"), ConfigError);
}

TEST_CASE("env overrides flow through resolve_environment") {
  RunConfig cfg = run_config_from_json(R"({"env": "pendulum-v1",
    "env_overrides": {"dt": 0.02}})");
  Environment env = resolve_environment(cfg);
  CHECK(env.dt == 0.02);
}
