#include "shieldsynth/env.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/lp.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

namespace {

constexpr double kDeg = M_PI / 180.0;

Box symmetric_box(std::initializer_list<double> half_widths) {
  Box b;
  for (double w : half_widths) b.push_back({-w, w});
  return b;
}

double quadratic_reward(const Polytope& safe, const Vec& s, const Vec& c) {
  double r = -s.squaredNorm() - 0.01 * c.squaredNorm();
  if (!is_safe(safe, s)) r -= 100.0;
  return r;
}

void attach_default_reward(Environment& env) {
  const Polytope safe = env.safe_set;
  env.reward = [safe](const Vec& s, const Vec& c) { return quadratic_reward(safe, s, c); };
}

Environment pendulum(const std::string& name, double length) {
  Environment env;
  env.name = name;
  env.state_dim = 2;
  env.command_dim = 1;
  env.dt = 0.01;
  // Gravity/length torque balance; coefficients pinned so the equilibrium
  // linearization is [[1.9027, -1], [1, 0]] with B = [[1], [0]] at length 1.
  const double k_grav = 1.9027 / length;
  const double k_cmd = 1.0 / length;
  env.dynamics = [k_grav, k_cmd](const Vec& s, const Vec& c) {
    Vec ds(2);
    ds[0] = k_grav * std::sin(s[0]) - s[1] + k_cmd * c[0];
    ds[1] = std::sin(s[0]);
    return ds;
  };
  env.safe_set = polytope_from_box(symmetric_box({30.0 * kDeg, 30.0 * kDeg}));
  env.init_box = symmetric_box({20.0 * kDeg, 20.0 * kDeg});
  env.command_bounds = symmetric_box({4.0});
  return env;
}

Environment cartpole(const std::string& name) {
  Environment env;
  env.name = name;
  env.state_dim = 4;
  env.command_dim = 1;
  env.dt = 0.01;
  // Standard cart-pole ODEs; state (position, velocity, angle, angular rate).
  const double mc = 1.0, mp = 0.1, len = 0.5, g = 9.8;
  env.dynamics = [=](const Vec& s, const Vec& c) {
    const double sin_t = std::sin(s[2]);
    const double cos_t = std::cos(s[2]);
    const double total = mc + mp;
    const double temp = (c[0] + mp * len * s[3] * s[3] * sin_t) / total;
    const double theta_acc =
        (g * sin_t - cos_t * temp) / (len * (4.0 / 3.0 - mp * cos_t * cos_t / total));
    const double x_acc = temp - mp * len * theta_acc * cos_t / total;
    Vec ds(4);
    ds[0] = s[1];
    ds[1] = x_acc;
    ds[2] = s[3];
    ds[3] = theta_acc;
    return ds;
  };
  env.safe_set = polytope_from_box(symmetric_box({0.3, 0.5, 30.0 * kDeg, 0.5}));
  env.init_box = symmetric_box({0.03, 0.05, 3.0 * kDeg, 0.05});
  env.command_bounds = symmetric_box({10.0});
  return env;
}

Environment selfdrive(const std::string& name, double lane_half_width) {
  Environment env;
  env.name = name;
  env.state_dim = 2;
  env.command_dim = 1;
  env.dt = 0.02;
  // Constant-speed bicycle-style model: state (heading, lateral offset),
  // command is the steering rate.
  const double speed = 1.0;
  env.dynamics = [speed](const Vec& s, const Vec& c) {
    Vec ds(2);
    ds[0] = c[0];
    ds[1] = speed * std::sin(s[0]);
    return ds;
  };
  env.safe_set = polytope_from_box(symmetric_box({90.0 * kDeg, lane_half_width}));
  env.init_box = symmetric_box({45.0 * kDeg, 0.5 * lane_half_width});
  env.command_bounds = symmetric_box({2.0});
  return env;
}

Environment quadcopter() {
  Environment env;
  env.name = "quadcopter";
  env.state_dim = 2;
  env.command_dim = 1;
  env.dt = 0.01;
  // Two-state attitude model with angles eta1, eta2.
  env.dynamics = [](const Vec& s, const Vec& c) {
    Vec ds(2);
    ds[0] = s[1];
    ds[1] = -std::sin(s[0]) - 0.1 * s[1] + 2.0 * c[0];
    return ds;
  };
  env.safe_set = polytope_from_box(symmetric_box({M_PI / 2.0, M_PI / 2.0}));
  env.init_box = symmetric_box({M_PI / 4.0, M_PI / 4.0});
  env.command_bounds = symmetric_box({4.0});
  return env;
}

Environment platoon4() {
  Environment env;
  env.name = "platoon4";
  env.state_dim = 7;
  env.command_dim = 4;
  env.dt = 0.02;
  // Relative-distance double integrators: lead velocity deviation, then
  // (gap, relative velocity) per following pair. Commands are accelerations.
  env.dynamics = [](const Vec& s, const Vec& c) {
    Vec ds(7);
    ds[0] = c[0];
    ds[1] = s[2];
    ds[2] = c[1] - c[0];
    ds[3] = s[4];
    ds[4] = c[2] - c[1];
    ds[5] = s[6];
    ds[6] = c[3] - c[2];
    return ds;
  };
  env.safe_set = polytope_from_box(symmetric_box({2.0, 0.5, 0.35, 0.5, 1.0, 0.5, 1.0}));
  env.init_box = symmetric_box({1.0, 0.25, 0.175, 0.25, 0.5, 0.25, 0.5});
  env.command_bounds = symmetric_box({3.0, 3.0, 3.0, 3.0});
  return env;
}

Environment build(const std::string& name) {
  if (name == "pendulum-v1") return pendulum(name, 1.0);
  if (name == "pendulum-v2") return pendulum(name, 1.5);
  if (name == "cartpole-v1" || name == "cartpole-v2") return cartpole(name);
  if (name == "selfdrive-v1") return selfdrive(name, 2.0);
  if (name == "selfdrive-v2") return selfdrive(name, 1.5);
  if (name == "quadcopter") return quadcopter();
  if (name == "platoon4") return platoon4();
  throw ConfigError("unknown environment: " + name);
}

void for_each_corner(const Box& box, const std::function<void(const Vec&)>& fn) {
  const size_t m = box.size();
  Vec corner(static_cast<Eigen::Index>(m));
  for (uint64_t mask = 0; mask < (uint64_t{1} << m); ++mask) {
    for (size_t j = 0; j < m; ++j) {
      corner[static_cast<Eigen::Index>(j)] = (mask >> j) & 1 ? box[j].hi : box[j].lo;
    }
    fn(corner);
  }
}

Box parse_box(const nlohmann::json& j, const char* field) {
  Box box;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2) {
      throw ConfigError(std::string("override ") + field + ": expected [lo, hi] pairs");
    }
    box.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return box;
}

}  // namespace

Vec step(const Environment& env, const Vec& s, const Vec& c) {
  if (s.size() != env.state_dim) throw ContractViolation("step: state dimension mismatch");
  if (c.size() != env.command_dim) throw ContractViolation("step: command dimension mismatch");
  const Vec cc = clamp_to_box(env.command_bounds, c);
  Vec ds = env.dynamics(s, cc);
  if (ds.size() != env.state_dim) throw ContractViolation("step: dynamics output dimension mismatch");
  if (!ds.allFinite()) throw NumericalError("step: non-finite dynamics output");
  return s + ds * env.dt;
}

Vec sample_initial(const Environment& env, uint64_t rng_seed) {
  Rng rng(rng_seed);
  Vec s(env.state_dim);
  for (int i = 0; i < env.state_dim; ++i) {
    const Interval& iv = env.init_box[static_cast<size_t>(i)];
    s[i] = iv.lo + rng.uniform() * (iv.hi - iv.lo);
  }
  return s;
}

const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names = {
      "pendulum-v1", "pendulum-v2", "cartpole-v1", "cartpole-v2",
      "selfdrive-v1", "selfdrive-v2", "quadcopter", "platoon4",
  };
  return names;
}

Environment make_environment(const std::string& name) {
  Environment env = build(name);
  attach_default_reward(env);
  validate_environment(env);
  return env;
}

Environment make_environment(const std::string& name, const std::string& overrides_json) {
  Environment env = build(name);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(overrides_json);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("environment override: ") + e.what());
  }
  if (j.contains("dt")) env.dt = j["dt"].get<double>();
  if (j.contains("init_box")) env.init_box = parse_box(j["init_box"], "init_box");
  if (j.contains("command_bounds")) {
    env.command_bounds = parse_box(j["command_bounds"], "command_bounds");
  }
  if (j.contains("safe_halfspaces")) {
    const auto& rows = j["safe_halfspaces"];
    Polytope p;
    p.D = Mat::Zero(static_cast<Eigen::Index>(rows.size()), env.state_dim);
    p.d = Vec::Zero(static_cast<Eigen::Index>(rows.size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
      const auto coeffs = row.at("coeffs");
      if (static_cast<int>(coeffs.size()) != env.state_dim) {
        throw ConfigError("safe_halfspaces: coeffs dimension mismatch");
      }
      for (int k = 0; k < env.state_dim; ++k) p.D(i, k) = coeffs[k].get<double>();
      p.d[i] = row.at("bound").get<double>();
      ++i;
    }
    env.safe_set = p;
  }
  attach_default_reward(env);
  validate_environment(env);
  return env;
}

void validate_environment(const Environment& env) {
  if (env.dt <= 0.0) throw ContractViolation(env.name + ": dt must be positive");
  if (env.state_dim <= 0 || env.command_dim <= 0) {
    throw ContractViolation(env.name + ": dimensions must be positive");
  }
  if (env.init_box.size() != static_cast<size_t>(env.state_dim) ||
      env.command_bounds.size() != static_cast<size_t>(env.command_dim)) {
    throw ContractViolation(env.name + ": box dimension mismatch");
  }
  if (env.safe_set.dim() != env.state_dim) {
    throw ContractViolation(env.name + ": safe set dimension mismatch");
  }
  lp::ensure_nonempty(env.safe_set);
  for_each_corner(env.init_box, [&](const Vec& corner) {
    for (Eigen::Index i = 0; i < env.safe_set.rows(); ++i) {
      if (env.safe_set.D.row(i).dot(corner) >= env.safe_set.d[i]) {
        throw ContractViolation(env.name + ": init box corner not strictly inside safe set");
      }
    }
  });
  const Vec probe = env.dynamics(box_midpoint(env.init_box), box_midpoint(env.command_bounds));
  if (probe.size() != env.state_dim) {
    throw ContractViolation(env.name + ": dynamics output dimension mismatch");
  }
}

}  // namespace shieldsynth
