#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/random.hpp"

namespace stratpol {

/// Axis-aligned region of policy space.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  std::size_t size() const noexcept { return static_cast<std::size_t>(lower.size()); }

  bool contains(const PolicyParams& beta) const {
    return (beta.values().array() >= lower.array()).all() && (beta.values().array() <= upper.array()).all();
  }

  /// Coordinate-wise clamp into the box shrunk by `margin` on every side.
  PolicyParams clamp(const PolicyParams& beta, double margin = 0.0) const {
    Eigen::VectorXd lo = lower.array() + margin;
    Eigen::VectorXd hi = upper.array() - margin;
    hi = hi.cwiseMax(lo);
    return PolicyParams(beta.values().cwiseMax(lo).cwiseMin(hi));
  }
};

/// w(x; beta) = beta_0 + beta_1 x. Both built-in environments use it.
inline double affine_treatment(double x, const PolicyParams& beta) { return beta[0] + beta[1] * x; }

/// What every environment supplies: the type distribution G, the agents'
/// best-response report, treatment rule, outcome, planner objective and the
/// (known) individual treatment effect dy/dw.
template <class E>
concept Environment = requires(const E& env, const PolicyParams& beta, const typename E::Agent& agent,
                               SplitMix64& rng, double value, std::span<const double> column) {
  typename E::Agent;
  { E::kind } -> std::convertible_to<EnvKind>;
  { env.dimension() } -> std::convertible_to<std::size_t>;
  { env.sample(rng) } -> std::same_as<typename E::Agent>;
  { env.report(beta, agent) } -> std::convertible_to<double>;
  { env.treat(value, beta) } -> std::convertible_to<double>;
  { env.outcome(value, agent) } -> std::convertible_to<double>;
  { env.objective(value, value) } -> std::convertible_to<double>;
  { env.ite(value, agent) } -> std::convertible_to<double>;
  { env.initial_policy() } -> std::same_as<PolicyParams>;
  { env.search_box() } -> std::same_as<Box>;
  { env.fit_exogenous(column, column, column) } -> std::same_as<PolicyParams>;
};

namespace detail {

// Solves sum_i (target_i - b0 - b1 x_i) (1, x_i) = 0.
inline PolicyParams affine_least_squares(std::span<const double> x, std::span<const double> target) {
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += target[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    sxx += dx * dx;
    sxy += dx * (target[i] - my);
  }
  if (x.size() < 2 || !(sxx > 1e-12 * n * (1.0 + mx * mx)))
    throw EstimationError("singular risk-minimization system: reported covariate has no variation");
  const double slope = sxy / sxx;
  return PolicyParams{my - slope * mx, slope};
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// Strategic classification: producers inflate engagement to raise the
/// predicted quality; the planner predicts quality and is scored on -(y - w)^2.
class Classification {
 public:
  using Agent = ClassificationAgent;
  static constexpr EnvKind kind = EnvKind::classification;
  static constexpr double gamma_max = 1.5;

  std::size_t dimension() const noexcept { return 2; }

  Agent sample(SplitMix64& rng) const {
    std::normal_distribution<double> standard(0.0, 1.0);
    std::uniform_real_distribution<double> ability(0.0, gamma_max);
    Agent a;
    a.z = standard(rng);
    a.gamma = ability(rng);
    a.r = standard(rng);
    return a;
  }

  double report(const PolicyParams& beta, const Agent& a) const { return a.z + a.gamma * beta[1]; }
  double treat(double x, const PolicyParams& beta) const { return affine_treatment(x, beta); }
  double outcome(double /*w*/, const Agent& a) const { return a.z + a.r; }
  double objective(double w, double y) const {
    const double err = y - w;
    return -err * err;
  }
  double ite(double /*w*/, const Agent& /*a*/) const { return 0.0; }

  PolicyParams initial_policy() const { return {0.0, 0.0}; }
  Box search_box() const { return {Eigen::Vector2d(-2.0, -2.0), Eigen::Vector2d(2.0, 2.0)}; }

  /// Risk minimizer holding reports fixed: OLS of y on (1, x).
  PolicyParams fit_exogenous(std::span<const double> x, std::span<const double> /*w*/,
                             std::span<const double> y) const {
    return detail::affine_least_squares(x, y);
  }
};

/// Price discrimination on a manipulable search metric with linear demand
/// y = v - w and revenue objective w * y.
class Pricing {
 public:
  using Agent = PricingAgent;
  static constexpr EnvKind kind = EnvKind::pricing;
  static constexpr double gamma_max = 3.0;
  /// Reports are refused when 1 - p1^2 gamma falls to this value or below.
  static constexpr double singularity_margin = 1e-3;
  static constexpr double valuation_sd = 2.0;

  std::size_t dimension() const noexcept { return 2; }

  Agent sample(SplitMix64& rng) const {
    std::uniform_real_distribution<double> search(10.0, 20.0);
    std::normal_distribution<double> noise(0.0, valuation_sd);
    std::uniform_real_distribution<double> ability(0.0, gamma_max);
    Agent a;
    a.z = search(rng);
    a.v = 5.0 + a.z + noise(rng);
    a.gamma = ability(rng);
    return a;
  }

  double report(const PolicyParams& beta, const Agent& a) const {
    const double p0 = beta[0], p1 = beta[1];
    const double denom = 1.0 - p1 * p1 * a.gamma;
    if (!(denom > singularity_margin))
      throw DomainError("pricing report is singular: 1 - p1^2 gamma = " + std::to_string(denom) +
                        " (p1 = " + std::to_string(p1) + ", gamma = " + std::to_string(a.gamma) + ")");
    return (a.z - a.gamma * p1 * (a.v - p0)) / denom;
  }
  double treat(double x, const PolicyParams& beta) const { return affine_treatment(x, beta); }
  double outcome(double w, const Agent& a) const { return a.v - w; }
  double objective(double w, double y) const { return w * y; }
  double ite(double /*w*/, const Agent& /*a*/) const { return -1.0; }

  PolicyParams initial_policy() const { return {10.0, 0.0}; }

  /// Largest |p1| for which every type's report is defined.
  static double admissible_slope() { return (1.0 - singularity_margin) / std::sqrt(gamma_max); }

  /// Optimizer region. The slope bound is tighter than admissible_slope():
  /// perturbed policies near the singular edge produce objective values that
  /// swamp the gradient estimate.
  Box search_box() const { return {Eigen::Vector2d(0.0, -0.45), Eigen::Vector2d(40.0, 0.45)}; }

  /// Risk minimizer holding reports fixed. Valuations are recovered from the
  /// observed demand, v = y - ite * w, and the first-order condition
  /// sum (v - 2 (p0 + p1 x)) (1, x) = 0 is solved.
  PolicyParams fit_exogenous(std::span<const double> x, std::span<const double> w,
                             std::span<const double> y) const {
    std::vector<double> half_value(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) half_value[i] = 0.5 * (y[i] + w[i]);
    return detail::affine_least_squares(x, half_value);
  }
};

static_assert(Environment<Classification>);
static_assert(Environment<Pricing>);

/// Calls f with the environment object for `kind`.
template <class F>
decltype(auto) visit_environment(EnvKind kind, F&& f) {
  if (kind == EnvKind::pricing) return std::forward<F>(f)(Pricing{});
  return std::forward<F>(f)(Classification{});
}

// ---------------------------------------------------------------------------
// Simulation helpers

struct AgentResponse {
  double x = 0.0;
  double w = 0.0;
  double y = 0.0;
  double pi = 0.0;
};

/// One agent facing `beta`: report, treatment, outcome, objective.
template <Environment E>
AgentResponse respond(const E& env, const PolicyParams& beta, const typename E::Agent& agent) {
  AgentResponse r;
  r.x = env.report(beta, agent);
  r.w = env.treat(r.x, beta);
  r.y = env.outcome(r.w, agent);
  r.pi = env.objective(r.w, r.y);
  return r;
}

/// n i.i.d. types; agent i is drawn from its own engine stream.engine(i).
template <Environment E>
std::vector<typename E::Agent> sample_types(const E& env, std::size_t n, const Stream& stream) {
  std::vector<typename E::Agent> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream.engine(i);
    out.push_back(env.sample(rng));
  }
  return out;
}

/// Responses of a batch of agents that all face the same policy.
struct BatchResponses {
  std::vector<double> x, w, y, pi;

  double mean_objective() const {
    double sum = 0.0;
    for (double v : pi) sum += v;
    return pi.empty() ? 0.0 : sum / static_cast<double>(pi.size());
  }
};

template <Environment E>
BatchResponses respond_all(const E& env, const PolicyParams& beta, std::span<const typename E::Agent> agents) {
  BatchResponses out;
  out.x.resize(agents.size());
  out.w.resize(agents.size());
  out.y.resize(agents.size());
  out.pi.resize(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentResponse r;
    try {
      r = respond(env, beta, agents[i]);
    } catch (const DomainError&) {
      detail::rethrow_with_context("agent " + std::to_string(i));
    }
    out.x[i] = r.x;
    out.w[i] = r.w;
    out.y[i] = r.y;
    out.pi[i] = r.pi;
  }
  return out;
}

}  // namespace stratpol
