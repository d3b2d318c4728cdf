#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/environment.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/random.hpp"

namespace stratpol {

/// h = c * n^(-alpha).
inline double perturbation_scale(double c, double alpha, std::size_t n) {
  return PerturbationSchedule{c, alpha}.scale(n);
}

/// Rademacher signs for n agents and k coordinates; agent i takes the low k
/// bits of one draw from stream.engine(i).
inline PerturbationDesign design_perturbations(std::size_t n, std::size_t k, PerturbationSchedule schedule,
                                               const Stream& stream) {
  if (k == 0 || k > 64) throw std::invalid_argument("design_perturbations: need 1 <= k <= 64");
  Eigen::MatrixXd signs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < n; ++i) {
    auto rng = stream.engine(i);
    const std::uint64_t bits = rng();
    for (std::size_t j = 0; j < k; ++j)
      signs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = ((bits >> j) & 1U) ? 1.0 : -1.0;
  }
  return PerturbationDesign(signs, schedule);
}

struct GradientEstimate {
  Eigen::VectorXd gamma_hat;
  std::size_t n_used = 0;
  double h_used = 0.0;
};

/// OLS of the objective values on the perturbation matrix,
/// gamma_hat = (Q'Q)^{-1} Q' pi. With `demean` both pi and the columns of Q
/// are centred first, i.e. the regression gets an intercept.
inline GradientEstimate estimate_gradient(const PerturbationDesign& design, std::span<const double> pi,
                                          bool demean) {
  const auto n = design.rows();
  const auto k = design.cols();
  if (pi.size() != n) throw std::invalid_argument("estimate_gradient: pi length does not match design rows");
  if (n < 2 * k)
    throw EstimationError("gradient OLS needs n >= 2K (n = " + std::to_string(n) + ", K = " + std::to_string(k) +
                          ")");

  Eigen::VectorXd response = Eigen::Map<const Eigen::VectorXd>(pi.data(), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd q = design.q();
  if (demean) {
    response.array() -= response.mean();
    q.rowwise() -= q.colwise().mean();
  }

  const Eigen::MatrixXd gram = q.transpose() * q;
  const Eigen::LLT<Eigen::MatrixXd> chol(gram);
  if (chol.info() != Eigen::Success || chol.rcond() < 1e-10)
    throw EstimationError("perturbation matrix is rank deficient; increase n or resample the design");

  GradientEstimate out;
  out.gamma_hat = chol.solve(q.transpose() * response);
  out.n_used = n;
  out.h_used = design.h();
  if (!out.gamma_hat.allFinite()) throw EstimationError("gradient estimate is not finite");
  return out;
}

/// Central-difference gradient of the Monte-Carlo objective, with common
/// random numbers: the same `reps` agents are scored on both sides.
struct FiniteDifferenceGradient {
  Eigen::VectorXd value;
  Eigen::VectorXd std_error;  // standard error of each coordinate over agents
};

template <Environment E>
FiniteDifferenceGradient fd_oracle(const E& env, const PolicyParams& beta, double h_fd, std::size_t reps,
                                   const Stream& stream) {
  if (!(h_fd > 0.0)) throw std::invalid_argument("fd_oracle: h_fd must be positive");
  if (reps < 2) throw std::invalid_argument("fd_oracle: need at least two draws");
  const auto agents = sample_types(env, reps, stream);
  const auto k = beta.size();

  FiniteDifferenceGradient out{Eigen::VectorXd(static_cast<Eigen::Index>(k)),
                               Eigen::VectorXd(static_cast<Eigen::Index>(k))};
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::VectorXd step = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    step[static_cast<Eigen::Index>(j)] = h_fd;
    const PolicyParams up(beta.values() + step);
    const PolicyParams down(beta.values() - step);

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < reps; ++i) {
      double d = 0.0;
      try {
        d = (respond(env, up, agents[i]).pi - respond(env, down, agents[i]).pi) / (2.0 * h_fd);
      } catch (const DomainError&) {
        detail::rethrow_with_context("agent " + std::to_string(i));
      }
      sum += d;
      sum_sq += d * d;
    }
    const double m = sum / static_cast<double>(reps);
    const double var = std::max(0.0, (sum_sq - static_cast<double>(reps) * m * m) / static_cast<double>(reps - 1));
    out.value[static_cast<Eigen::Index>(j)] = m;
    out.std_error[static_cast<Eigen::Index>(j)] = std::sqrt(var / static_cast<double>(reps));
  }
  return out;
}

/// Simulates one perturbed batch: agent i faces base + h * eps_i.
template <Environment E>
BatchRecord simulate_perturbed_batch(const E& env, const PolicyParams& base, const PerturbationDesign& design,
                                     std::span<const typename E::Agent> agents) {
  if (agents.size() != design.rows()) throw std::invalid_argument("simulate_perturbed_batch: size mismatch");
  if (design.cols() != base.size()) throw std::invalid_argument("simulate_perturbed_batch: dimension mismatch");
  BatchRecord record{base, design.h(), {}};
  record.rows.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::VectorXd eps = design.q().row(row).transpose() / design.h();
    PolicyParams announced(base.values() + design.q().row(row).transpose());
    AgentResponse r;
    try {
      r = respond(env, announced, agents[i]);
    } catch (const DomainError&) {
      detail::rethrow_with_context("agent " + std::to_string(i));
    }
    record.rows.push_back(BatchRow{std::move(eps), std::move(announced), r.x, r.w, r.y, r.pi});
  }
  return record;
}

}  // namespace stratpol
