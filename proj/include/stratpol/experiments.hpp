#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/gradient.hpp"
#include "stratpol/learn.hpp"
#include "stratpol/metrics.hpp"
#include "stratpol/objective.hpp"

namespace stratpol {

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = first + i;
  return out;
}

// ---------------------------------------------------------------------------
// Table suites: every method, every seed, scored against that seed's optimum.

struct SeedRun {
  std::uint64_t seed = 0;
  FullInfoSolution full;
  std::vector<Trajectory> trajectories;  // one per method, in the requested order
  std::vector<RunSummary> summaries;
};

struct MethodMedian {
  Method method = Method::iterative;
  double avg_objective = 0.0;
  double relative_objective = 0.0;
  double terminal_error = 0.0;
  std::optional<double> avg_mse;
  std::size_t oscillating_seeds = 0;
  std::size_t diverged_seeds = 0;
};

struct SuiteResult {
  RunConfig config;  // seed field holds the first seed
  std::vector<Method> methods;
  std::vector<SeedRun> runs;
  std::vector<MethodMedian> medians;
};

inline const std::vector<Method>& all_methods() {
  static const std::vector<Method> m{Method::full_info, Method::iterative, Method::rrm, Method::naive};
  return m;
}

template <Environment E>
SeedRun run_seed(const E& env, RunConfig cfg, std::uint64_t seed, const std::vector<Method>& methods) {
  cfg.seed = seed;
  SeedRun run{seed, solve_full_info(env, cfg), {}, {}};
  for (Method m : methods) {
    cfg.method = m;
    switch (m) {
      case Method::iterative: run.trajectories.push_back(run_iterative(env, cfg)); break;
      case Method::rrm: run.trajectories.push_back(run_rrm(env, cfg)); break;
      case Method::naive: run.trajectories.push_back(run_naive(env, cfg)); break;
      case Method::full_info: run.trajectories.push_back(run_full_info(env, cfg, {}, run.full)); break;
    }
  }
  run.summaries = summarize(run.trajectories, run.full);
  return run;
}

inline SuiteResult run_suite(const RunConfig& cfg, const std::vector<std::uint64_t>& seeds,
                             const std::vector<Method>& methods = all_methods()) {
  if (seeds.empty()) throw std::invalid_argument("run_suite: no seeds");
  SuiteResult out{cfg, methods, {}, {}};
  out.config.seed = seeds.front();
  visit_environment(cfg.env, [&](const auto& env) {
    for (auto seed : seeds) out.runs.push_back(run_seed(env, cfg, seed, methods));
    return 0;
  });
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::vector<double> obj, rel, err, mse;
    MethodMedian row;
    row.method = methods[m];
    for (const auto& run : out.runs) {
      const auto& s = run.summaries[m];
      obj.push_back(s.avg_objective);
      rel.push_back(s.relative_objective);
      err.push_back(s.terminal_error);
      if (s.avg_mse) mse.push_back(*s.avg_mse);
      row.oscillating_seeds += s.oscillating ? 1 : 0;
      row.diverged_seeds += s.status == RunStatus::diverged ? 1 : 0;
    }
    row.avg_objective = median(obj);
    row.relative_objective = median(rel);
    row.terminal_error = median(err);
    if (!mse.empty()) row.avg_mse = median(mse);
    out.medians.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient consistency: one perturbed batch against a finite-difference oracle.

struct GradientCheckOptions {
  PolicyParams beta{0.0, 0.5};
  std::size_t seeds = 20;
  std::uint64_t first_seed = 0;
  std::size_t n_small = 1000;
  std::size_t n_large = 100000;
  PerturbationSchedule schedule{2.5, 0.25};
  bool demean = true;
  double h_fd = 0.01;
  std::size_t oracle_reps = 1000000;
};

struct GradientCheckResult {
  FiniteDifferenceGradient oracle;
  std::vector<double> error_small;  // |gamma_hat - oracle| per seed
  std::vector<double> error_large;
  double median_small = 0.0;
  double median_large = 0.0;
  double relative_large = 0.0;      // median_large / |oracle|
};

/// Gamma-hat from a single batch of n agents facing beta.
template <Environment E>
GradientEstimate one_batch_gradient(const E& env, const PolicyParams& beta, std::size_t n,
                                    PerturbationSchedule schedule, bool demean, std::uint64_t seed) {
  const auto agents = sample_types(env, n, Stream(seed).child(Purpose::agents).child(1));
  const auto design = design_perturbations(n, beta.size(), schedule, Stream(seed).child(Purpose::perturbation).child(1));
  const auto batch = simulate_perturbed_batch<E>(env, beta, design, agents);
  const Eigen::VectorXd pi = batch.objective_values();
  return estimate_gradient(design, {pi.data(), static_cast<std::size_t>(pi.size())}, demean);
}

template <Environment E>
GradientCheckResult check_gradients(const E& env, const GradientCheckOptions& opt = {}) {
  GradientCheckResult out;
  out.oracle = fd_oracle(env, opt.beta, opt.h_fd, opt.oracle_reps, Stream(opt.first_seed).child(Purpose::oracle));
  for (std::size_t s = 0; s < opt.seeds; ++s) {
    const std::uint64_t seed = opt.first_seed + s;
    const auto small = one_batch_gradient(env, opt.beta, opt.n_small, opt.schedule, opt.demean, seed);
    const auto large = one_batch_gradient(env, opt.beta, opt.n_large, opt.schedule, opt.demean, seed);
    out.error_small.push_back((small.gamma_hat - out.oracle.value).norm());
    out.error_large.push_back((large.gamma_hat - out.oracle.value).norm());
  }
  out.median_small = median(out.error_small);
  out.median_large = median(out.error_large);
  out.relative_large = out.median_large / out.oracle.value.norm();
  return out;
}

// ---------------------------------------------------------------------------
// Regret bound: weighted regret against eta * M^2 / 2, M = max_t |gamma_hat^t|.

struct RegretBoundRow {
  std::uint64_t seed = 0;
  double weighted_regret = 0.0;
  double max_gradient = 0.0;
  double bound = 0.0;
  bool holds() const { return weighted_regret <= bound; }
};

/// Needs iterative runs with their full-information optimum; uses the largest
/// step-size coordinate when eta is a vector.
inline std::vector<RegretBoundRow> check_regret_bound(const SuiteResult& suite) {
  const auto it = std::find(suite.methods.begin(), suite.methods.end(), Method::iterative);
  if (it == suite.methods.end()) throw std::invalid_argument("check_regret_bound: suite has no iterative runs");
  const auto m = static_cast<std::size_t>(it - suite.methods.begin());
  const double eta = *std::max_element(suite.config.eta.begin(), suite.config.eta.end());
  std::vector<RegretBoundRow> out;
  for (const auto& run : suite.runs) {
    RegretBoundRow row;
    row.seed = run.seed;
    row.weighted_regret = run.summaries[m].weighted_regret;
    row.max_gradient = max_gradient_norm(run.trajectories[m]);
    row.bound = eta * row.max_gradient * row.max_gradient / 2.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace stratpol
