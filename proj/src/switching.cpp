#include "shieldsynth/switching.hpp"

#include <cmath>
#include <map>

#include "shieldsynth/errors.hpp"
#include "shieldsynth/shield.hpp"
#include "shieldsynth/sim.hpp"

namespace shieldsynth {

namespace {

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double std_normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

BoTracePoint evaluate_lambda(const Environment& env, const Policy& policy, const LinearPolicy& k,
                             double lambda, const BoConfig& cfg) {
  Shield sh;
  sh.policy = k;
  sh.lambda = lambda;
  sh.norm = Norm::Linf;
  const EvalReport report = evaluate(env, policy, &sh, cfg.eval_episodes, cfg.eval_steps,
                                     cfg.seed, cfg.counterfactual_horizon);
  BoTracePoint pt;
  pt.lambda = lambda;
  pt.violations = report.violations;
  pt.necessary = report.necessary_interventions;
  pt.interventions = report.interventions;
  pt.objective = switching_objective(pt.violations, pt.necessary, pt.interventions);
  return pt;
}

}  // namespace

double switching_objective(long violations, long necessary, long interventions) {
  if (violations < 0 || necessary < 0 || interventions < 0) {
    throw ContractViolation("switching_objective: counts must be nonnegative");
  }
  if (necessary > interventions) {
    throw ContractViolation("switching_objective: necessary interventions exceed total");
  }
  return std::log(static_cast<double>(violations) + 1.0) -
         static_cast<double>(necessary) / (static_cast<double>(interventions) + 1.0);
}

GaussianProcess::GaussianProcess(double length_scale, double variance, double jitter)
    : length_scale_(length_scale), variance_(variance), jitter_(jitter) {
  if (length_scale <= 0.0 || variance <= 0.0 || jitter < 0.0) {
    throw ContractViolation("GaussianProcess: bad hyperparameters");
  }
}

void GaussianProcess::add(double x, double y) {
  xs_.push_back(x);
  ys_.push_back(y);
}

void GaussianProcess::set_variance(double variance) {
  if (variance <= 0.0) throw ContractViolation("GaussianProcess: variance must be positive");
  variance_ = variance;
}

double GaussianProcess::kernel(double a, double b) const {
  const double r = std::abs(a - b) / length_scale_;
  const double sq5r = std::sqrt(5.0) * r;
  return variance_ * (1.0 + sq5r + 5.0 * r * r / 3.0) * std::exp(-sq5r);
}

std::pair<double, double> GaussianProcess::posterior(double x) const {
  const auto n = static_cast<Eigen::Index>(xs_.size());
  if (n == 0) throw ContractViolation("GaussianProcess::posterior: no observations");
  Mat gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      gram(i, j) = kernel(xs_[static_cast<size_t>(i)], xs_[static_cast<size_t>(j)]);
    }
    gram(i, i) += jitter_;
  }
  Vec kx(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kx[i] = kernel(x, xs_[static_cast<size_t>(i)]);
    y[i] = ys_[static_cast<size_t>(i)];
  }
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("GaussianProcess: Gram factorization failed");
  }
  const Vec alpha = llt.solve(y);
  const Vec v = llt.solve(kx);
  const double mean = kx.dot(alpha);
  double var = kernel(x, x) - kx.dot(v);
  if (var < 0.0) var = 0.0;
  return {mean, var};
}

double expected_improvement(const GaussianProcess& gp, double x, double best) {
  const auto [mean, var] = gp.posterior(x);
  const double sigma = std::sqrt(var);
  if (sigma == 0.0) return 0.0;
  const double z = (best - mean) / sigma;
  const double ei = (best - mean) * std_normal_cdf(z) + sigma * std_normal_pdf(z);
  return ei > 0.0 ? ei : 0.0;
}

double default_lambda_max(const Environment& env) {
  double width = 0.0;
  for (const Interval& iv : env.command_bounds) width = std::max(width, iv.width());
  return width;
}

BoResult optimize_threshold(const Environment& env, const Policy& policy, const LinearPolicy& k,
                            const BoConfig& cfg) {
  if (cfg.iterations < 1) throw ContractViolation("optimize_threshold: iterations must be >= 1");
  const double lambda_max = cfg.lambda_max > 0.0 ? cfg.lambda_max : default_lambda_max(env);
  if (lambda_max <= 0.0) throw ContractViolation("optimize_threshold: lambda_max must be > 0");

  BoResult res;
  GaussianProcess gp;

  // common random numbers make re-evaluation of a lambda bitwise identical,
  // so repeated acquisitions are served from the cache
  std::map<double, BoTracePoint> seen;
  const auto eval_cached = [&](double lambda) {
    auto it = seen.find(lambda);
    if (it != seen.end()) return it->second;
    BoTracePoint pt = evaluate_lambda(env, policy, k, lambda, cfg);
    seen.emplace(lambda, pt);
    return pt;
  };

  const int init = std::max(2, cfg.init_points);
  for (int i = 0; i < init; ++i) {
    const double lambda = lambda_max * static_cast<double>(i) / static_cast<double>(init - 1);
    res.trace.push_back(eval_cached(lambda));
  }
  // kernel variance from the spread of the initial observations
  double mean = 0.0;
  for (const BoTracePoint& pt : res.trace) mean += pt.objective;
  mean /= static_cast<double>(res.trace.size());
  double var = 0.0;
  for (const BoTracePoint& pt : res.trace) {
    var += (pt.objective - mean) * (pt.objective - mean);
  }
  var /= static_cast<double>(res.trace.size());
  gp.set_variance(var > 1e-12 ? var : 1.0);
  for (const BoTracePoint& pt : res.trace) gp.add(pt.lambda / lambda_max, pt.objective);

  for (int it = 0; it < cfg.iterations; ++it) {
    double best = res.trace.front().objective;
    for (const BoTracePoint& pt : res.trace) best = std::min(best, pt.objective);

    // acquisition over the grid, skipping points already evaluated: with
    // deterministic CRN evaluations a repeat adds no information and would
    // pin the loop to the incumbent
    double best_ei = -1.0;
    double candidate = -1.0;
    for (int g = 0; g < cfg.grid_points; ++g) {
      const double x = static_cast<double>(g) / static_cast<double>(cfg.grid_points - 1);
      if (seen.count(x * lambda_max)) continue;
      const double ei = expected_improvement(gp, x, best);
      if (ei > best_ei + 1e-15) {  // ties resolve to the smallest lambda
        best_ei = ei;
        candidate = x;
      }
    }
    if (candidate < 0.0) break;  // the whole grid has been evaluated
    BoTracePoint pt = eval_cached(candidate * lambda_max);
    res.trace.push_back(pt);
    gp.add(candidate, pt.objective);
  }

  double best_obj = res.trace.front().objective;
  double best_lambda = res.trace.front().lambda;
  for (const BoTracePoint& pt : res.trace) {
    if (pt.objective < best_obj - 1e-15 ||
        (std::abs(pt.objective - best_obj) <= 1e-15 && pt.lambda < best_lambda)) {
      best_obj = pt.objective;
      best_lambda = pt.lambda;
    }
  }
  res.lambda = best_lambda;
  return res;
}

std::string bo_trace_csv(const std::vector<BoTracePoint>& trace) {
  std::string out = "lambda,V,V_star,I,objective\n";
  char buf[128];
  for (const BoTracePoint& pt : trace) {
    std::snprintf(buf, sizeof(buf), "%.17g,%ld,%ld,%ld,%.17g\n", pt.lambda, pt.violations,
                  pt.necessary, pt.interventions, pt.objective);
    out += buf;
  }
  return out;
}

}  // namespace shieldsynth
