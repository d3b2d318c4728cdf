#include <gtest/gtest.h>

#include "stratpol/stratpol.hpp"

using namespace stratpol;

namespace {

Trajectory constant_trajectory(EnvKind env, Method m, const PolicyParams& beta, std::size_t steps, double pi) {
  Trajectory traj{env, m, RunStatus::completed, {}};
  for (std::size_t t = 1; t <= steps; ++t) traj.steps.push_back(Step{t, beta, std::nullopt, pi, pi});
  return traj;
}

}  // namespace

TEST(McObjective, ClassificationAtOrigin) {
  const auto e = mc_objective(Classification{}, {0.0, 0.0}, 1000000, Stream(1));
  EXPECT_NEAR(e.mean, -2.0, 4.0 * e.se);
  EXPECT_LT(e.se, 0.005);
}

TEST(McObjective, PricingUniformPrice) {
  const auto e = mc_objective(Pricing{}, {10.0, 0.0}, 1000000, Stream(2));
  EXPECT_NEAR(e.mean, 100.0, 4.0 * e.se);
  EXPECT_LT(e.se, 0.1);
}

TEST(McObjective, StandardErrorScaling) {
  for (EnvKind env : {EnvKind::classification, EnvKind::pricing}) {
    visit_environment(env, [&](const auto& e) {
      const PolicyParams beta = e.initial_policy();
      const double small = mc_objective(e, beta, 100000, Stream(3)).se;
      const double large = mc_objective(e, beta, 200000, Stream(4)).se;
      EXPECT_NEAR(large / small, 1.0 / std::sqrt(2.0), 0.1 / std::sqrt(2.0)) << to_string(env);
      return 0;
    });
  }
}

TEST(McObjective, CommonRandomNumbers) {
  const MonteCarloObjective<Pricing> obj(Pricing{}, 50000, evaluation_stream(9));
  const PolicyParams beta{8.0, 0.15};
  EXPECT_EQ(obj(beta), obj(beta));
  const auto d = obj.difference(beta, beta);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_EQ(d.se, 0.0);
  const MonteCarloObjective<Pricing> again(Pricing{}, 50000, evaluation_stream(9));
  EXPECT_EQ(obj(beta), again(beta));
}

TEST(McObjective, PairedDifferenceIsTighter) {
  const MonteCarloObjective<Classification> obj(Classification{}, 100000, Stream(5));
  const PolicyParams a{-0.48, 0.80}, b{-0.57, 0.87};
  const auto paired = obj.difference(b, a);
  const double unpaired = std::hypot(obj.estimate(a).se, obj.estimate(b).se);
  EXPECT_NEAR(paired.mean, obj(b) - obj(a), 1e-9);
  EXPECT_LT(paired.se, unpaired / 3.0);
}

TEST(AvgRegret, FullInformationIsExactlyZero) {
  RunConfig cfg = RunConfig::defaults(EnvKind::pricing);
  cfg.t_max = 20;
  const auto sol = solve_full_info(Pricing{}, cfg);
  const auto traj = run_full_info(Pricing{}, cfg, {}, sol);
  const MonteCarloObjective<Pricing> obj(Pricing{}, cfg.eval_reps, evaluation_stream(cfg.seed));
  EXPECT_EQ(avg_regret(traj, sol.beta_star, obj), 0.0);
  EXPECT_EQ(avg_regret(stored_step_values(traj), sol.pi_star), 0.0);
}

TEST(AvgRegret, PricingIterativeNearZero) {
  const RunConfig cfg = RunConfig::defaults(EnvKind::pricing);
  const auto sol = solve_full_info(Pricing{}, cfg);
  const auto traj = run_iterative(Pricing{}, cfg);
  const double regret = avg_regret(stored_step_values(traj), sol.pi_star);
  EXPECT_NEAR(regret, -0.25, 0.5);
  EXPECT_LE(regret, 0.0);
}

TEST(AvgRegret, EmptyTrajectoryRejected) {
  EXPECT_THROW(avg_regret(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST(WeightedRegret, ConstantAtReferenceIsZero) {
  const std::vector<double> values(10, 3.5);
  EXPECT_EQ(weighted_regret(values, 3.5), 0.0);
}

TEST(WeightedRegret, PositionalWeights) {
  const std::vector<double> values{1.0, 2.0, 3.0};
  const std::vector<double> reversed{3.0, 2.0, 1.0};
  EXPECT_DOUBLE_EQ(weighted_regret(values, 3.0), (1 * 2.0 + 2 * 1.0 + 3 * 0.0) / 3.0);
  EXPECT_NE(weighted_regret(values, 3.0), weighted_regret(reversed, 3.0));
}

TEST(WeightedRegret, ClassificationIterativeWithinBound) {
  RunConfig cfg = RunConfig::defaults(EnvKind::classification);
  cfg.seed = 7;
  const auto sol = solve_full_info(Classification{}, cfg);
  const auto traj = run_iterative(Classification{}, cfg);
  const double m = max_gradient_norm(traj);
  EXPECT_LE(weighted_regret(stored_step_values(traj), sol.pi_star), cfg.eta[0] * m * m / 2.0);
}

TEST(DetectOscillation, FlagsPersistentFlipping) {
  Trajectory flip{EnvKind::pricing, Method::rrm, RunStatus::completed, {}};
  for (std::size_t t = 1; t <= 20; ++t)
    flip.steps.push_back(Step{t, t % 2 ? PolicyParams{2.5, 0.5} : PolicyParams{10.0, 0.0}, std::nullopt, 0.0, 0.0});
  EXPECT_TRUE(detect_oscillation(flip));
  const auto flat = constant_trajectory(EnvKind::pricing, Method::rrm, {10.0, 0.0}, 20, 0.0);
  EXPECT_FALSE(detect_oscillation(flat));
}

TEST(Summarize, ClassificationTableRows) {
  RunConfig cfg = RunConfig::defaults(EnvKind::classification);
  cfg.t_max = 50;
  cfg.eval_reps = 20000;
  const auto sol = solve_full_info(Classification{}, cfg);
  std::vector<Trajectory> trajs;
  for (Method m : all_methods()) {
    cfg.method = m;
    trajs.push_back(m == Method::full_info ? run_full_info(Classification{}, cfg, {}, sol) : run_method(cfg));
  }
  const auto rows = summarize(trajs, sol);
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].method, all_methods()[i]);
    ASSERT_TRUE(rows[i].avg_mse.has_value());
    EXPECT_EQ(*rows[i].avg_mse, -rows[i].avg_objective);
    EXPECT_EQ(rows[i].avg_regret, -rows[i].relative_objective);
    EXPECT_GE(rows[i].avg_regret, 0.0);
  }
  EXPECT_EQ(rows[0].avg_regret, 0.0);
  EXPECT_EQ(rows[0].terminal_error, 0.0);
}

TEST(Summarize, PricingRegretColumn) {
  RunConfig cfg = RunConfig::defaults(EnvKind::pricing);
  cfg.t_max = 40;
  cfg.eval_reps = 20000;
  const auto sol = solve_full_info(Pricing{}, cfg);
  std::vector<Trajectory> trajs;
  for (Method m : all_methods()) {
    cfg.method = m;
    trajs.push_back(m == Method::full_info ? run_full_info(Pricing{}, cfg, {}, sol) : run_method(cfg));
  }
  const auto rows = summarize(trajs, sol);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].relative_objective, 0.0);
  for (const auto& r : rows) {
    EXPECT_FALSE(r.avg_mse.has_value());
    EXPECT_LE(r.relative_objective, 0.0);
  }
}

TEST(Summarize, SingleNaiveRun) {
  RunConfig cfg = RunConfig::defaults(EnvKind::classification);
  cfg.t_max = 10;
  cfg.eval_reps = 5000;
  cfg.method = Method::naive;
  const auto sol = solve_full_info(Classification{}, cfg);
  const std::vector<Trajectory> trajs{run_method(cfg)};
  const auto rows = summarize(trajs, sol);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].terminal_beta, fit_naive(Classification{}, cfg));
}

TEST(Summarize, MixedEnvironmentsRejected) {
  const FullInfoSolution sol{PolicyParams{0.0, 0.0}, 0.0, {}};
  const std::vector<Trajectory> trajs{
      constant_trajectory(EnvKind::classification, Method::naive, {0.0, 1.0}, 3, -1.0),
      constant_trajectory(EnvKind::pricing, Method::naive, {10.0, 0.0}, 3, 100.0)};
  EXPECT_THROW(summarize(trajs, sol), std::invalid_argument);
}

TEST(Summarize, DivergedRunSkipsUnevaluatedStep) {
  Trajectory traj = constant_trajectory(EnvKind::classification, Method::rrm, {0.0, 1.0}, 3, -2.0);
  traj.steps.push_back(Step{4, PolicyParams{0.0, 5000.0}, std::nullopt, -1e6, std::nullopt});
  traj.status = RunStatus::diverged;
  const FullInfoSolution sol{PolicyParams{0.0, 1.0}, -1.0, {}};
  const std::vector<Trajectory> trajs{traj};
  const auto rows = summarize(trajs, sol);
  EXPECT_EQ(rows[0].status, RunStatus::diverged);
  EXPECT_DOUBLE_EQ(rows[0].avg_regret, 1.0);
}
