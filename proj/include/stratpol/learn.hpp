#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/gradient.hpp"
#include "stratpol/objective.hpp"
#include "stratpol/random.hpp"

namespace stratpol {

/// Knobs shared by the learners that are not part of RunConfig.
struct LearnOptions {
  std::optional<PolicyParams> beta0;  // defaults to env.initial_policy()
  bool evaluate = true;               // fill Step::eval_pi from the shared evaluation panel
};

namespace detail {

// Fresh agents for step t; they never persist across batches.
inline Stream step_agents(std::uint64_t seed, std::size_t t) {
  return Stream(seed).child(Purpose::agents).child(t);
}

template <Environment E>
std::optional<MonteCarloObjective<E>> make_evaluator(const E& env, const RunConfig& cfg, const LearnOptions& opt) {
  if (!opt.evaluate) return std::nullopt;
  return MonteCarloObjective<E>(env, cfg.eval_reps, evaluation_stream(cfg.seed));
}

template <Environment E>
std::optional<double> evaluate(const std::optional<MonteCarloObjective<E>>& evaluator, const PolicyParams& beta) {
  if (!evaluator) return std::nullopt;
  return (*evaluator)(beta);
}

inline double max_abs(const PolicyParams& beta) { return beta.values().cwiseAbs().maxCoeff(); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Iterative experiment

/// Perturbed-batch gradient ascent: each step announces beta + h eps_i to a
/// fresh batch, regresses the objective on the perturbations, takes a
/// 2 eta (.) gamma_hat / (t + 1) step and projects into the search box shrunk
/// by h so every announced policy stays admissible.
template <Environment E>
Trajectory run_iterative(const E& env, const RunConfig& cfg, const LearnOptions& opt = {}) {
  validate_config(cfg);
  const std::size_t k = env.dimension();
  const Box box = env.search_box();
  const PerturbationSchedule schedule = cfg.schedule();
  const double h = schedule.scale(cfg.n);
  const Eigen::VectorXd eta = cfg.step_sizes(k);
  const auto evaluator = detail::make_evaluator(env, cfg, opt);

  PolicyParams beta = box.clamp(opt.beta0.value_or(env.initial_policy()), h);
  if (beta.size() != k) throw ConfigError("beta0", "initial policy has the wrong dimension");

  Trajectory traj{E::kind, Method::iterative, RunStatus::completed, {}};
  traj.steps.reserve(cfg.t_max);
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    try {
      const auto agents = sample_types(env, cfg.n, detail::step_agents(cfg.seed, t));
      const auto design =
          design_perturbations(cfg.n, k, schedule, Stream(cfg.seed).child(Purpose::perturbation).child(t));
      const BatchRecord batch = simulate_perturbed_batch<E>(env, beta, design, agents);
      const Eigen::VectorXd pi = batch.objective_values();
      const GradientEstimate g = estimate_gradient(design, {pi.data(), static_cast<std::size_t>(pi.size())}, cfg.demean);

      const Eigen::VectorXd moved = beta.values() + (2.0 / static_cast<double>(t + 1)) * eta.cwiseProduct(g.gamma_hat);
      beta = box.clamp(PolicyParams(moved), h);
      traj.steps.push_back(Step{t, beta, g.gamma_hat, batch.mean_objective(), detail::evaluate(evaluator, beta)});
    } catch (const Error&) {
      detail::rethrow_with_context("step " + std::to_string(t));
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Repeated risk minimization

/// Repeatedly refits the risk minimizer treating the reports induced by the
/// previous policy as exogenous. Stops early, tagged diverged, once any
/// coefficient exceeds 1e3 * max(1, |beta0|_inf).
template <Environment E>
Trajectory run_rrm(const E& env, const RunConfig& cfg, const LearnOptions& opt = {}) {
  validate_config(cfg);
  const auto evaluator = detail::make_evaluator(env, cfg, opt);
  PolicyParams beta = opt.beta0.value_or(env.initial_policy());
  const double limit = 1e3 * std::max(1.0, detail::max_abs(beta));

  Trajectory traj{E::kind, Method::rrm, RunStatus::completed, {}};
  traj.steps.reserve(cfg.t_max);
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    try {
      const auto agents = sample_types(env, cfg.n, detail::step_agents(cfg.seed, t));
      const BatchResponses batch = respond_all<E>(env, beta, agents);
      beta = env.fit_exogenous(batch.x, batch.w, batch.y);
      if (detail::max_abs(beta) > limit) {
        traj.steps.push_back(Step{t, beta, std::nullopt, batch.mean_objective(), std::nullopt});
        traj.status = RunStatus::diverged;
        break;
      }
      traj.steps.push_back(Step{t, beta, std::nullopt, batch.mean_objective(), detail::evaluate(evaluator, beta)});
    } catch (const Error&) {
      detail::rethrow_with_context("step " + std::to_string(t));
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Naive risk minimization

/// Fits once on a batch that faces a covariate-free policy (so nobody has a
/// reason to manipulate), then deploys that fit unchanged.
template <Environment E>
PolicyParams fit_naive(const E& env, const RunConfig& cfg, const LearnOptions& opt = {}) {
  Eigen::VectorXd flat = opt.beta0.value_or(env.initial_policy()).values();
  flat.tail(flat.size() - 1).setZero();
  const auto agents = sample_types(env, cfg.n, Stream(cfg.seed).child(Purpose::baseline));
  const BatchResponses batch = respond_all<E>(env, PolicyParams(flat), agents);
  return env.fit_exogenous(batch.x, batch.w, batch.y);
}

template <Environment E>
Trajectory run_naive(const E& env, const RunConfig& cfg, const LearnOptions& opt = {}) {
  validate_config(cfg);
  const auto evaluator = detail::make_evaluator(env, cfg, opt);
  const PolicyParams beta = fit_naive(env, cfg, opt);
  const auto eval_pi = detail::evaluate(evaluator, beta);

  Trajectory traj{E::kind, Method::naive, RunStatus::completed, {}};
  traj.steps.reserve(cfg.t_max);
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    try {
      const auto agents = sample_types(env, cfg.n, detail::step_agents(cfg.seed, t));
      const BatchResponses batch = respond_all<E>(env, beta, agents);
      traj.steps.push_back(Step{t, beta, std::nullopt, batch.mean_objective(), eval_pi});
    } catch (const Error&) {
      detail::rethrow_with_context("step " + std::to_string(t));
    }
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Full-information oracle

struct FullInfoOptions {
  std::size_t points = 41;       // grid points per axis
  std::size_t refinements = 2;   // local rounds after the coarse grid
  double shrink = 5.0;           // window shrink factor per round
};

struct GridPoint {
  PolicyParams beta;
  double pi = 0.0;
};

struct FullInfoSolution {
  PolicyParams beta_star;
  double pi_star = 0.0;
  std::vector<GridPoint> grid_trace;
};

/// Maximizes Pi-hat over the search box by grid search on the evaluation
/// panel (common random numbers across every candidate).
template <Environment E>
FullInfoSolution solve_full_info(const MonteCarloObjective<E>& objective, const FullInfoOptions& opt = {}) {
  if (opt.points < 3) throw std::invalid_argument("solve_full_info: need at least 3 grid points per axis");
  const Box region = objective.environment().search_box();
  const auto k = static_cast<Eigen::Index>(region.size());
  Eigen::VectorXd lo = region.lower, hi = region.upper;

  FullInfoSolution sol{PolicyParams(region.lower), -std::numeric_limits<double>::infinity(), {}};
  std::vector<std::size_t> best_index(static_cast<std::size_t>(k), 0);
  for (std::size_t round = 0; round <= opt.refinements; ++round) {
    const Eigen::VectorXd spacing = (hi - lo) / static_cast<double>(opt.points - 1);
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
      Eigen::VectorXd point(k);
      for (Eigen::Index j = 0; j < k; ++j) point[j] = lo[j] + spacing[j] * static_cast<double>(idx[j]);
      const PolicyParams beta(point);
      double value = 0.0;
      try {
        value = objective(beta);
      } catch (const DomainError&) {
        detail::rethrow_with_context("full-information search");
      }
      sol.grid_trace.push_back({beta, value});
      if (value > best) {
        best = value;
        best_index = idx;
        sol.beta_star = beta;
        sol.pi_star = value;
      }
      std::size_t j = 0;
      while (j < idx.size() && ++idx[j] == opt.points) idx[j++] = 0;
      if (j == idx.size()) break;
    }
    if (round == opt.refinements) break;
    const Eigen::VectorXd half = (hi - lo) / (2.0 * opt.shrink);
    lo = (sol.beta_star.values() - half).cwiseMax(region.lower);
    hi = (sol.beta_star.values() + half).cwiseMin(region.upper);
  }

  for (std::size_t j = 0; j < best_index.size(); ++j)
    if (best_index[j] == 0 || best_index[j] + 1 == opt.points)
      throw SearchError("full-information optimum lies on the edge of the search window in coordinate " +
                        std::to_string(j) + "; expand search region");
  return sol;
}

template <Environment E>
FullInfoSolution solve_full_info(const E& env, const RunConfig& cfg, const FullInfoOptions& opt = {}) {
  validate_config(cfg);
  return solve_full_info(MonteCarloObjective<E>(env, cfg.eval_reps, evaluation_stream(cfg.seed)), opt);
}

/// Deploys the full-information optimum for every step.
template <Environment E>
Trajectory run_full_info(const E& env, const RunConfig& cfg, const LearnOptions& opt = {},
                         const std::optional<FullInfoSolution>& solved = std::nullopt) {
  validate_config(cfg);
  const FullInfoSolution sol = solved ? *solved : solve_full_info(env, cfg);
  const std::optional<double> eval_pi = opt.evaluate ? std::optional<double>(sol.pi_star) : std::nullopt;

  Trajectory traj{E::kind, Method::full_info, RunStatus::completed, {}};
  traj.steps.reserve(cfg.t_max);
  for (std::size_t t = 1; t <= cfg.t_max; ++t) {
    try {
      const auto agents = sample_types(env, cfg.n, detail::step_agents(cfg.seed, t));
      const BatchResponses batch = respond_all<E>(env, sol.beta_star, agents);
      traj.steps.push_back(Step{t, sol.beta_star, std::nullopt, batch.mean_objective(), eval_pi});
    } catch (const Error&) {
      detail::rethrow_with_context("step " + std::to_string(t));
    }
  }
  return traj;
}

/// Runs cfg.method in cfg.env.
inline Trajectory run_method(const RunConfig& cfg, const LearnOptions& opt = {}) {
  return visit_environment(cfg.env, [&](const auto& env) {
    switch (cfg.method) {
      case Method::iterative: return run_iterative(env, cfg, opt);
      case Method::rrm: return run_rrm(env, cfg, opt);
      case Method::naive: return run_naive(env, cfg, opt);
      case Method::full_info: return run_full_info(env, cfg, opt);
    }
    throw std::logic_error("unknown method");
  });
}

}  // namespace stratpol
