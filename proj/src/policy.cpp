#include "shieldsynth/policy.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/rng.hpp"

namespace shieldsynth {

namespace {

double apply_act(Activation a, double x) {
  switch (a) {
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Identity:
      return x;
  }
  return x;
}

Activation act_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "id") return Activation::Identity;
  throw ContractViolation("mlp: unknown activation '" + s + "'");
}

const char* act_to_string(Activation a) {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
    case Activation::Identity:
      return "id";
  }
  return "id";
}

}  // namespace

Vec mlp_forward(const MlpWeights& w, const Vec& s) {
  if (s.size() != w.state_dim) throw ContractViolation("mlp_forward: input dimension mismatch");
  Vec h = s;
  for (const MlpLayer& layer : w.layers) {
    if (layer.w.cols() != h.size() || layer.w.rows() != layer.b.size()) {
      throw ContractViolation("mlp_forward: layer dimensions do not chain");
    }
    Vec z = layer.w * h + layer.b;
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = apply_act(layer.act, z[i]);
    if (!z.allFinite()) throw NumericalError("mlp_forward: non-finite intermediate");
    h = std::move(z);
  }
  if (h.size() != w.command_dim) throw ContractViolation("mlp_forward: output dimension mismatch");
  return h;
}

MlpWeights mlp_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ContractViolation(std::string("mlp_from_json: ") + e.what());
  }
  MlpWeights w;
  w.state_dim = j.at("state_dim").get<int>();
  w.command_dim = j.at("command_dim").get<int>();
  for (const auto& jl : j.at("layers")) {
    MlpLayer layer;
    const auto& rows = jl.at("w");
    const auto nr = static_cast<Eigen::Index>(rows.size());
    const auto nc = nr > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    layer.w = Mat(nr, nc);
    for (Eigen::Index i = 0; i < nr; ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != nc) {
        throw ContractViolation("mlp_from_json: ragged weight matrix");
      }
      for (Eigen::Index k = 0; k < nc; ++k) layer.w(i, k) = rows[i][k].get<double>();
    }
    const auto& bias = jl.at("b");
    layer.b = Vec(static_cast<Eigen::Index>(bias.size()));
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b[i] = bias[i].get<double>();
    layer.act = act_from_string(jl.at("act").get<std::string>());
    w.layers.push_back(std::move(layer));
  }
  // validate the chain once up front
  Eigen::Index cur = w.state_dim;
  for (const MlpLayer& layer : w.layers) {
    if (layer.w.cols() != cur || layer.w.rows() != layer.b.size()) {
      throw ContractViolation("mlp_from_json: layer dimensions do not chain");
    }
    cur = layer.w.rows();
  }
  if (cur != w.command_dim) {
    throw ContractViolation("mlp_from_json: final layer does not match command_dim");
  }
  return w;
}

std::string mlp_to_json(const MlpWeights& w) {
  nlohmann::json j;
  j["state_dim"] = w.state_dim;
  j["command_dim"] = w.command_dim;
  j["layers"] = nlohmann::json::array();
  for (const MlpLayer& layer : w.layers) {
    nlohmann::json jl;
    auto rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < layer.w.rows(); ++i) {
      auto row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < layer.w.cols(); ++k) row.push_back(layer.w(i, k));
      rows.push_back(std::move(row));
    }
    jl["w"] = std::move(rows);
    auto bias = nlohmann::json::array();
    for (Eigen::Index i = 0; i < layer.b.size(); ++i) bias.push_back(layer.b[i]);
    jl["b"] = std::move(bias);
    jl["act"] = act_to_string(layer.act);
    j["layers"].push_back(std::move(jl));
  }
  return j.dump();
}

Policy make_mlp_policy(MlpWeights w, std::string name) {
  Policy p;
  p.name = std::move(name);
  p.state_dim = w.state_dim;
  p.command_dim = w.command_dim;
  p.act = [weights = std::move(w)](const Vec& s, uint64_t) { return mlp_forward(weights, s); };
  return p;
}

Policy perturbed_linear_policy(const LinearPolicy& k, const Box& command_bounds,
                               double noise_scale, double fault_prob, uint64_t rng_seed) {
  if (noise_scale < 0.0) throw ContractViolation("perturbed_linear_policy: noise_scale < 0");
  if (fault_prob < 0.0 || fault_prob > 1.0) {
    throw ContractViolation("perturbed_linear_policy: fault_prob outside [0,1]");
  }
  Policy p;
  p.name = "surrogate";
  p.state_dim = static_cast<int>(k.K.cols());
  p.command_dim = static_cast<int>(k.K.rows());
  p.act = [k, command_bounds, noise_scale, fault_prob, rng_seed](const Vec& s, uint64_t step_key) {
    Rng rng(derive_seed(rng_seed, step_key));
    if (fault_prob > 0.0 && rng.uniform() < fault_prob) {
      Vec c(static_cast<Eigen::Index>(command_bounds.size()));
      for (Eigen::Index i = 0; i < c.size(); ++i) {
        const Interval& iv = command_bounds[static_cast<size_t>(i)];
        c[i] = rng.uniform() < 0.5 ? iv.lo : iv.hi;
      }
      return c;
    }
    Vec c = k.command(s);
    if (noise_scale > 0.0) {
      for (Eigen::Index i = 0; i < c.size(); ++i) c[i] += noise_scale * rng.normal();
    }
    return c;
  };
  return p;
}

}  // namespace shieldsynth
