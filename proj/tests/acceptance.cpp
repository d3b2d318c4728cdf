// Acceptance suite. One PASS/FAIL line per criterion, detail lines indented.
// Usage: acceptance [criterion ...]   (no arguments runs all eight)

#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "stratpol/stratpol.hpp"

using namespace stratpol;

namespace {

// Oracles, computed independently of this library and frozen here.
// Classification optimum: root of the first-order conditions of
// MSE(b) = (1 - b1)^2 + 1 + b0^2 + 1.5 b0 b1^2 + 0.75 b1^4.
const PolicyParams kClassificationOptimum{-0.4855839977, 0.8046398761};

constexpr std::size_t kSeeds = 10;

struct Report {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok    " : "MISS  ") + what);
  }
};

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// Suites are shared between criteria when several run in one process.
const SuiteResult& table1() {
  static const SuiteResult suite = run_suite(RunConfig::defaults(EnvKind::classification), seed_range(0, kSeeds));
  return suite;
}

const SuiteResult& table2() {
  static const SuiteResult suite = run_suite(RunConfig::defaults(EnvKind::pricing), seed_range(0, kSeeds));
  return suite;
}

const MethodMedian& row(const SuiteResult& s, Method m) {
  for (const auto& r : s.medians)
    if (r.method == m) return r;
  throw std::logic_error("method missing from suite");
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// ---------------------------------------------------------------------------

Report criterion1() {
  Report r;
  const auto& s = table1();
  const std::vector<std::tuple<Method, double, double>> targets{{Method::full_info, 1.1176, 0.01},
                                                                {Method::iterative, 1.1180, 0.02},
                                                                {Method::rrm, 1.1261, 0.02},
                                                                {Method::naive, 1.7448, 0.05}};
  for (const auto& [m, target, tol] : targets) {
    const double mse = *row(s, m).avg_mse;
    r.check(within(mse, target, tol), std::string(to_string(m)) + " median avg MSE " + num(mse) + ", target " +
                                          num(target) + " +/- " + num(tol, 2));
  }
  return r;
}

Report criterion2() {
  Report r;
  const auto& s = table2();
  bool exact = true;
  for (const auto& run : s.runs) exact = exact && run.summaries[0].relative_objective == 0.0;
  r.check(exact, "full_info regret exactly 0 on every seed");

  const double it = row(s, Method::iterative).relative_objective;
  r.check(it >= -1.0 && it <= 0.0, "iterative median regret " + num(it) + ", target within [-1, 0]");

  const double naive = row(s, Method::naive).relative_objective;
  r.check(within(naive, -48.21, 0.10 * 48.21), "naive median regret " + num(naive) + ", target -48.21 +/- 10%");

  const auto& rrm = row(s, Method::rrm);
  r.check(within(rrm.relative_objective, -24.45, 0.20 * 24.45),
          "rrm median regret " + num(rrm.relative_objective) + ", target -24.45 +/- 20%");
  r.check(2 * rrm.oscillating_seeds > s.runs.size(),
          "rrm oscillation flag set on " + std::to_string(rrm.oscillating_seeds) + "/" + std::to_string(s.runs.size()) +
              " seeds");
  return r;
}

Report criterion3() {
  Report r;
  const auto slope_error = [](const SuiteResult& s) {
    const auto m = static_cast<std::size_t>(
        std::find(s.methods.begin(), s.methods.end(), Method::iterative) - s.methods.begin());
    std::vector<double> err;
    for (const auto& run : s.runs) err.push_back(std::abs(run.summaries[m].terminal_beta[1] - run.full.beta_star[1]));
    return median(err);
  };
  const double c = slope_error(table1());
  r.check(c <= 0.05, "classification median |beta1^T - beta1*| " + num(c) + ", limit 0.05");
  const double p = slope_error(table2());
  r.check(p <= 0.02, "pricing median |p1^T - p1*| " + num(p) + ", limit 0.02");
  return r;
}

Report criterion4() {
  Report r;
  const auto res = check_gradients(Classification{});
  r.details.push_back("      oracle at (0, 0.5): (" + num(res.oracle.value[0]) + ", " + num(res.oracle.value[1]) + ")");
  r.check(res.median_large < 0.5 * res.median_small, "median error n=1e5 " + num(res.median_large) +
                                                         " < 50% of n=1e3 " + num(res.median_small));
  r.check(res.relative_large < 0.10, "relative error at n=1e5 " + num(100.0 * res.relative_large, 1) + "%, limit 10%");
  return r;
}

Report criterion5() {
  Report r;
  RunConfig cfg = RunConfig::defaults(EnvKind::classification);
  const Classification env;
  const auto full = solve_full_info(env, cfg);
  const auto rrm = run_rrm(env, cfg, {std::nullopt, false});
  Eigen::VectorXd fp = Eigen::VectorXd::Zero(2);
  const std::size_t half = rrm.steps.size() / 2;
  for (std::size_t t = half; t < rrm.steps.size(); ++t) fp += rrm.steps[t].beta.values();
  const PolicyParams beta_fp(fp / static_cast<double>(rrm.steps.size() - half));

  const MonteCarloObjective<Classification> panel(env, 1000000, Stream(1000).child(Purpose::evaluation));
  const Estimate gap = panel.difference(beta_fp, full.beta_star);
  r.details.push_back("      beta_FP (" + num(beta_fp[0]) + ", " + num(beta_fp[1]) + "), beta* (" +
                      num(full.beta_star[0]) + ", " + num(full.beta_star[1]) + ")");
  r.check(gap.mean < 0.0 && -gap.mean > 5.0 * gap.se,
          "Pi(beta_FP) - Pi(beta*) = " + num(gap.mean, 5) + ", paired se " + num(gap.se, 5) + ", need < -5 se");
  return r;
}

Report criterion6() {
  Report r;
  const Classification env;
  std::vector<double> medians;
  for (std::size_t T : {100, 400, 1600}) {
    std::vector<double> e;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
      RunConfig cfg = RunConfig::defaults(EnvKind::classification);
      cfg.seed = seed;
      cfg.t_max = T;
      e.push_back(squared_error(run_iterative(env, cfg, {std::nullopt, false}).terminal_beta(), kClassificationOptimum));
    }
    medians.push_back(median(e));
    r.details.push_back("      T=" + std::to_string(T) + " median e_T " + num(medians.back(), 7));
  }
  r.check(medians[1] <= medians[0] && medians[2] <= medians[1], "median e_T non-increasing in T");
  r.check(medians[2] <= medians[0] / 4.0, "e_1600 / e_100 = " + num(medians[2] / medians[0]) + ", limit 0.25");
  return r;
}

Report criterion7() {
  Report r;
  for (const auto& b : check_regret_bound(table1()))
    r.check(b.holds(), "seed " + std::to_string(b.seed) + ": weighted regret " + num(b.weighted_regret) +
                           " <= eta M^2 / 2 = " + num(b.bound));
  return r;
}

Report criterion8() {
  Report r;
  RunConfig cfg = RunConfig::defaults(EnvKind::classification);
  cfg.t_max = 1;
  cfg.eta = {0.1, 0.2};
  const auto traj = run_iterative(Classification{}, cfg, {std::nullopt, false});
  const auto& s = traj.steps.front();
  const Eigen::VectorXd expected = Eigen::Vector2d(0.1, 0.2).cwiseProduct(*s.gamma_hat);
  r.check(traj.steps.size() == 1 && s.beta.values() == expected, "T=1 vector-eta step equals beta0 + eta (.) gamma_hat");
  const double w = Classification{}.treat(40.0, {-31.43, 0.248});
  r.check(std::abs(w - (-21.51)) < 1e-9, "plug-in treatment -31.43 + 0.248 * 40 = " + num(w, 2));
  return r;
}

const std::map<int, std::pair<std::string, std::function<Report()>>>& criteria() {
  static const std::map<int, std::pair<std::string, std::function<Report()>>> c{
      {1, {"classification table, 10-seed medians", criterion1}},
      {2, {"pricing table, 10-seed medians under common random numbers", criterion2}},
      {3, {"iterative runs converge to the optimal slope", criterion3}},
      {4, {"gradient estimator consistency", criterion4}},
      {5, {"fixed point strictly worse than the optimum", criterion5}},
      {6, {"terminal error rate", criterion6}},
      {7, {"weighted regret bound on every seed", criterion7}},
      {8, {"one-step update and plug-in treatment substitutes", criterion8}},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, v] : criteria()) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    const auto it = criteria().find(k);
    if (it == criteria().end()) {
      std::cerr << "unknown criterion " << k << "\n";
      return 2;
    }
    Report rep;
    try {
      rep = it->second.second();
    } catch (const std::exception& e) {
      rep.check(false, std::string("exception: ") + e.what());
    }
    std::cout << (rep.pass ? "[PASS] " : "[FAIL] ") << "C" << k << " " << it->second.first << "\n";
    for (const auto& d : rep.details) std::cout << "       " << d << "\n";
    failures += rep.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
