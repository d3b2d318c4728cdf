#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/random.hpp"

namespace stratpol {

/// A Monte-Carlo mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Pi-hat(beta) over a fixed panel of agents. Every evaluation reuses the same
/// draws, so differences between policies are paired (common random numbers).
template <Environment E>
class MonteCarloObjective {
 public:
  MonteCarloObjective(E env, std::size_t reps, const Stream& stream)
      : env_(std::move(env)), agents_(sample_types(env_, reps, stream)) {
    if (reps < 2) throw std::invalid_argument("MonteCarloObjective: need at least two draws");
  }

  std::size_t reps() const noexcept { return agents_.size(); }
  const E& environment() const noexcept { return env_; }

  double operator()(const PolicyParams& beta) const { return mean(beta); }

  double mean(const PolicyParams& beta) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < agents_.size(); ++i) sum += pi(beta, i);
    return sum / static_cast<double>(agents_.size());
  }

  Estimate estimate(const PolicyParams& beta) const {
    return accumulate([&](std::size_t i) { return pi(beta, i); });
  }

  /// Pi-hat(a) - Pi-hat(b) with the paired standard error.
  Estimate difference(const PolicyParams& a, const PolicyParams& b) const {
    return accumulate([&](std::size_t i) { return pi(a, i) - pi(b, i); });
  }

 private:
  double pi(const PolicyParams& beta, std::size_t i) const {
    try {
      return respond(env_, beta, agents_[i]).pi;
    } catch (const DomainError&) {
      detail::rethrow_with_context("evaluation agent " + std::to_string(i));
    }
  }

  template <class F>
  Estimate accumulate(F&& value) const {
    // Welford, so large objective levels (pricing revenue ~100) do not cost precision.
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const double v = value(i);
      const double d = v - m;
      m += d / static_cast<double>(i + 1);
      s += d * (v - m);
    }
    const double n = static_cast<double>(agents_.size());
    return {m, std::sqrt(s / (n - 1.0) / n)};
  }

  E env_;
  std::vector<typename E::Agent> agents_;
};

/// The evaluation panel shared by every method run with this seed.
inline Stream evaluation_stream(std::uint64_t seed) { return Stream(seed).child(Purpose::evaluation); }

template <Environment E>
Estimate mc_objective(const E& env, const PolicyParams& beta, std::size_t reps, const Stream& stream) {
  return MonteCarloObjective<E>(env, reps, stream).estimate(beta);
}

}  // namespace stratpol
