#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/learn.hpp"
#include "stratpol/objective.hpp"

namespace stratpol {

/// Pi-hat(beta^t) for every step.
template <Environment E>
std::vector<double> step_values(const Trajectory& traj, const MonteCarloObjective<E>& objective) {
  std::vector<double> out;
  out.reserve(traj.steps.size());
  for (const auto& s : traj.steps) out.push_back(objective(s.beta));
  return out;
}

/// The stored eval_pi series. A diverged run's final step is never evaluated
/// and is skipped.
inline std::vector<double> stored_step_values(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.steps.size());
  for (const auto& s : traj.steps) {
    if (!s.eval_pi && traj.status == RunStatus::diverged && &s == &traj.steps.back()) break;
    if (!s.eval_pi) throw std::invalid_argument("trajectory step " + std::to_string(s.t) + " has no eval_pi");
    out.push_back(*s.eval_pi);
  }
  return out;
}

/// (1/T) sum_t (Pi(beta^t) - Pi(beta*)); negative for shortfalls.
inline double avg_regret(std::span<const double> values, double pi_star) {
  if (values.empty()) throw std::invalid_argument("avg_regret: empty trajectory");
  double sum = 0.0;
  for (double v : values) sum += v - pi_star;
  return sum / static_cast<double>(values.size());
}

/// (1/T) sum_t t (Pi(beta_ref) - Pi(beta^t)). The weights are positional, so
/// the statistic is not invariant to reordering the steps.
inline double weighted_regret(std::span<const double> values, double pi_ref) {
  if (values.empty()) throw std::invalid_argument("weighted_regret: empty trajectory");
  double sum = 0.0;
  for (std::size_t t = 0; t < values.size(); ++t) sum += static_cast<double>(t + 1) * (pi_ref - values[t]);
  return sum / static_cast<double>(values.size());
}

template <Environment E>
double avg_regret(const Trajectory& traj, const PolicyParams& beta_star, const MonteCarloObjective<E>& objective) {
  return avg_regret(step_values(traj, objective), objective(beta_star));
}

template <Environment E>
double weighted_regret(const Trajectory& traj, const PolicyParams& beta_ref, const MonteCarloObjective<E>& objective) {
  return weighted_regret(step_values(traj, objective), objective(beta_ref));
}

/// max_t |gamma_hat^t|, the observed gradient bound.
inline double max_gradient_norm(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& s : traj.steps)
    if (s.gamma_hat) m = std::max(m, s.gamma_hat->norm());
  return m;
}

/// True when every step in the second half of the run moves beta by at least
/// `threshold`, i.e. the sequence keeps flipping instead of settling.
inline bool detect_oscillation(const Trajectory& traj, double threshold = 0.05) {
  const std::size_t n = traj.steps.size();
  if (n < 4) return false;
  for (std::size_t t = n / 2; t < n; ++t) {
    const double move = (traj.steps[t].beta.values() - traj.steps[t - 1].beta.values()).norm();
    if (move < threshold) return false;
  }
  return true;
}

inline double squared_error(const PolicyParams& a, const PolicyParams& b) {
  return (a.values() - b.values()).squaredNorm();
}

struct RunSummary {
  Method method = Method::iterative;
  RunStatus status = RunStatus::completed;
  double avg_objective = 0.0;
  double avg_regret = 0.0;           // mean of Pi(beta*) - Pi(beta^t), >= 0 up to MC error
  double relative_objective = 0.0;   // -avg_regret: the signed shortfall against full information
  double weighted_regret = 0.0;
  PolicyParams terminal_beta{0.0};
  double terminal_error = 0.0;       // |beta* - beta^T|^2
  bool oscillating = false;
  std::optional<double> avg_mse;     // classification only, -avg_objective
};

/// One row per trajectory, scored against the full-information optimum.
/// Steps must carry eval_pi computed on the same panel as pi_star.
inline std::vector<RunSummary> summarize(std::span<const Trajectory> trajs, const FullInfoSolution& full) {
  std::vector<RunSummary> out;
  if (trajs.empty()) return out;
  const EnvKind env = trajs.front().env;
  for (const auto& traj : trajs) {
    if (traj.env != env) throw std::invalid_argument("summarize: trajectories come from different environments");
    const auto values = stored_step_values(traj);
    RunSummary row;
    row.method = traj.method;
    row.status = traj.status;
    double sum = 0.0;
    for (double v : values) sum += v;
    row.avg_objective = sum / static_cast<double>(values.size());
    row.relative_objective = avg_regret(values, full.pi_star);
    row.avg_regret = -row.relative_objective;
    row.weighted_regret = weighted_regret(values, full.pi_star);
    row.terminal_beta = traj.terminal_beta();
    row.terminal_error = squared_error(full.beta_star, row.terminal_beta);
    row.oscillating = detect_oscillation(traj);
    if (env == EnvKind::classification) row.avg_mse = -row.avg_objective;
    out.push_back(row);
  }
  return out;
}

}  // namespace stratpol
