#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stratpol/errors.hpp"

namespace stratpol {

// ---------------------------------------------------------------------------
// Tags

enum class EnvKind { classification, pricing };

enum class Method { iterative, rrm, naive, full_info };

inline constexpr std::string_view to_string(EnvKind kind) noexcept {
  switch (kind) {
    case EnvKind::classification: return "classification";
    case EnvKind::pricing: return "pricing";
  }
  return "?";
}

inline constexpr std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::iterative: return "iterative";
    case Method::rrm: return "rrm";
    case Method::naive: return "naive";
    case Method::full_info: return "full_info";
  }
  return "?";
}

inline EnvKind parse_env_kind(std::string_view text) {
  if (text == "classification") return EnvKind::classification;
  if (text == "pricing") return EnvKind::pricing;
  throw ConfigError("env", "unknown environment '" + std::string(text) + "' (expected classification or pricing)");
}

inline Method parse_method(std::string_view text) {
  if (text == "iterative") return Method::iterative;
  if (text == "rrm") return Method::rrm;
  if (text == "naive") return Method::naive;
  if (text == "full_info") return Method::full_info;
  throw ConfigError("method", "unknown method '" + std::string(text) +
                                  "' (expected iterative, rrm, naive or full_info)");
}

/// Number of policy coefficients used by each built-in environment.
inline constexpr std::size_t policy_dimension(EnvKind) noexcept { return 2; }

// ---------------------------------------------------------------------------
// PolicyParams

/// Coefficients of the treatment rule w(x; beta). Always non-empty and finite.
class PolicyParams {
 public:
  explicit PolicyParams(Eigen::VectorXd values) : values_(std::move(values)) { check(); }
  PolicyParams(std::initializer_list<double> values) : values_(static_cast<Eigen::Index>(values.size())) {
    Eigen::Index i = 0;
    for (double v : values) values_[i++] = v;
    check();
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t j) const { return values_[static_cast<Eigen::Index>(j)]; }
  const Eigen::VectorXd& values() const noexcept { return values_; }

  friend bool operator==(const PolicyParams& a, const PolicyParams& b) {
    return a.values_.size() == b.values_.size() && (a.values_.array() == b.values_.array()).all();
  }

 private:
  void check() const {
    if (values_.size() < 1) throw std::invalid_argument("PolicyParams: need at least one coefficient");
    if (!values_.allFinite()) throw std::invalid_argument("PolicyParams: coefficients must be finite");
  }

  Eigen::VectorXd values_;
};

// ---------------------------------------------------------------------------
// Agent types

/// Content producer: latent engagement, manipulation ability, outcome noise.
struct ClassificationAgent {
  double z = 0.0;
  double gamma = 0.0;
  double r = 0.0;
};

/// Insurance customer: valuation, latent search metric, manipulation ability.
struct PricingAgent {
  double v = 0.0;
  double z = 0.0;
  double gamma = 0.0;
};

using AgentType = std::variant<ClassificationAgent, PricingAgent>;

inline EnvKind kind_of(const AgentType& agent) noexcept {
  return std::holds_alternative<ClassificationAgent>(agent) ? EnvKind::classification : EnvKind::pricing;
}

inline bool is_valid(const AgentType& agent) noexcept {
  return std::visit([](const auto& a) { return a.gamma >= 0.0 && std::isfinite(a.gamma); }, agent);
}

// ---------------------------------------------------------------------------
// Perturbation design

/// h = c * n^(-alpha).
struct PerturbationSchedule {
  double c = 1.0;
  double alpha = 0.25;

  double scale(std::size_t n) const { return c * std::pow(static_cast<double>(n), -alpha); }
};

/// n x K matrix of signed perturbations, every entry exactly +h or -h.
class PerturbationDesign {
 public:
  /// `signs` must hold only +1/-1; h is taken from the schedule for signs.rows().
  PerturbationDesign(const Eigen::MatrixXd& signs, PerturbationSchedule schedule)
      : h_(schedule.scale(static_cast<std::size_t>(signs.rows()))), schedule_(schedule) {
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("PerturbationDesign: h must be positive");
    if (!((signs.array() == 1.0) || (signs.array() == -1.0)).all())
      throw std::invalid_argument("PerturbationDesign: signs must be +1 or -1");
    q_ = signs.array() * h_;
  }

  const Eigen::MatrixXd& q() const noexcept { return q_; }
  double h() const noexcept { return h_; }
  double c() const noexcept { return schedule_.c; }
  double alpha() const noexcept { return schedule_.alpha; }
  const PerturbationSchedule& schedule() const noexcept { return schedule_; }
  std::size_t rows() const noexcept { return static_cast<std::size_t>(q_.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(q_.cols()); }

  /// The +/-1 sign of entry (i, j).
  double sign(std::size_t i, std::size_t j) const {
    return q_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0 ? 1.0 : -1.0;
  }

 private:
  Eigen::MatrixXd q_;
  double h_;
  PerturbationSchedule schedule_;
};

// ---------------------------------------------------------------------------
// Batch record

struct BatchRow {
  Eigen::VectorXd eps;  // +/-1 per coordinate
  PolicyParams beta;    // announced policy, base + h * eps
  double x = 0.0;
  double w = 0.0;
  double y = 0.0;
  double pi = 0.0;
};

/// Everything observed about one perturbed batch.
struct BatchRecord {
  PolicyParams base;
  double h = 0.0;
  std::vector<BatchRow> rows;

  Eigen::VectorXd objective_values() const {
    Eigen::VectorXd pi(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) pi[static_cast<Eigen::Index>(i)] = rows[i].pi;
    return pi;
  }

  double mean_objective() const {
    double sum = 0.0;
    for (const auto& row : rows) sum += row.pi;
    return rows.empty() ? 0.0 : sum / static_cast<double>(rows.size());
  }
};

// ---------------------------------------------------------------------------
// Trajectory

struct Step {
  std::size_t t = 0;
  PolicyParams beta;
  std::optional<Eigen::VectorXd> gamma_hat;
  double batch_mean_pi = 0.0;
  std::optional<double> eval_pi;
};

enum class RunStatus { completed, diverged };

inline constexpr std::string_view to_string(RunStatus status) noexcept {
  return status == RunStatus::completed ? "completed" : "diverged";
}

struct Trajectory {
  EnvKind env = EnvKind::classification;
  Method method = Method::iterative;
  RunStatus status = RunStatus::completed;
  std::vector<Step> steps;

  const PolicyParams& terminal_beta() const {
    if (steps.empty()) throw std::logic_error("empty trajectory");
    return steps.back().beta;
  }
};

inline bool operator==(const Step& a, const Step& b) {
  const bool gamma_equal =
      a.gamma_hat.has_value() == b.gamma_hat.has_value() &&
      (!a.gamma_hat || (a.gamma_hat->size() == b.gamma_hat->size() &&
                        (a.gamma_hat->array() == b.gamma_hat->array()).all()));
  return a.t == b.t && a.beta == b.beta && gamma_equal && a.batch_mean_pi == b.batch_mean_pi &&
         a.eval_pi == b.eval_pi;
}

inline bool operator==(const Trajectory& a, const Trajectory& b) {
  return a.env == b.env && a.method == b.method && a.status == b.status && a.steps == b.steps;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  EnvKind env = EnvKind::classification;
  Method method = Method::iterative;
  std::size_t n = 1000;
  std::size_t t_max = 1000;
  std::vector<double> eta{0.5};  // scalar, or one entry per coefficient
  double c = 0.7;
  double alpha = 0.25;
  std::uint64_t seed = 0;
  bool demean = true;
  std::size_t eval_reps = 100000;

  /// Tuned defaults for each built-in environment.
  static RunConfig defaults(EnvKind env) {
    RunConfig cfg;
    cfg.env = env;
    if (env == EnvKind::pricing) {
      cfg.t_max = 500;
      cfg.eta = {0.46, 0.0035};
      cfg.c = 1.4;
    }
    return cfg;
  }

  PerturbationSchedule schedule() const { return {c, alpha}; }

  /// eta broadcast to k coordinates.
  Eigen::VectorXd step_sizes(std::size_t k) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) out[static_cast<Eigen::Index>(j)] = eta.size() == 1 ? eta[0] : eta.at(j);
    return out;
  }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Returns cfg unchanged when every invariant holds; otherwise throws a
/// ConfigError naming the first offending field.
inline RunConfig validate_config(const RunConfig& cfg) {
  const std::size_t k = policy_dimension(cfg.env);
  if (cfg.n < 2 * k) throw ConfigError("n", "n too small for K (need n >= " + std::to_string(2 * k) + ")");
  if (cfg.t_max < 1) throw ConfigError("t_max", "t_max must be at least 1");
  if (cfg.eta.size() != 1 && cfg.eta.size() != k)
    throw ConfigError("eta", "eta must be a scalar or have " + std::to_string(k) + " entries");
  for (double e : cfg.eta)
    if (!(e > 0.0) || !std::isfinite(e)) throw ConfigError("eta", "eta entries must be positive and finite");
  if (!(cfg.c > 0.0) || !std::isfinite(cfg.c)) throw ConfigError("c", "c must be positive");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 0.5)) throw ConfigError("alpha", "alpha must lie in (0, 0.5)");
  if (cfg.eval_reps < 2) throw ConfigError("eval_reps", "eval_reps must be at least 2");
  return cfg;
}

}  // namespace stratpol
