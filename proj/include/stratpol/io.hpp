#pragma once

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "stratpol/core.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/learn.hpp"
#include "stratpol/metrics.hpp"

namespace stratpol {

// ---------------------------------------------------------------------------
// Number formatting

/// Shortest text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view text, const std::string& field) {
  text = trim(text);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError(field, "cannot parse '" + std::string(text) + "' as a number");
  return value;
}

inline bool parse_bool(std::string_view text, const std::string& field) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError(field, "expected true or false, got '" + std::string(text) + "'");
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Config files: one `key = value` per line, `#` starts a comment.

/// Comma-separated step sizes, e.g. "0.5" or "0.46,0.0035".
inline std::vector<double> parse_eta(std::string_view text) {
  std::vector<double> out;
  for (auto part : detail::split(text, ',')) out.push_back(detail::parse_number<double>(part, "eta"));
  return out;
}

/// Sets one RunConfig field from its textual value.
inline void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  value = detail::trim(value);
  if (key == "env") {
    cfg.env = parse_env_kind(value);
  } else if (key == "method") {
    cfg.method = parse_method(value);
  } else if (key == "n") {
    cfg.n = detail::parse_number<std::size_t>(value, "n");
  } else if (key == "t_max") {
    cfg.t_max = detail::parse_number<std::size_t>(value, "t_max");
  } else if (key == "eta") {
    cfg.eta = parse_eta(value);
  } else if (key == "c") {
    cfg.c = detail::parse_number<double>(value, "c");
  } else if (key == "alpha") {
    cfg.alpha = detail::parse_number<double>(value, "alpha");
  } else if (key == "seed") {
    cfg.seed = detail::parse_number<std::uint64_t>(value, "seed");
  } else if (key == "demean") {
    cfg.demean = detail::parse_bool(value, "demean");
  } else if (key == "eval_reps") {
    cfg.eval_reps = detail::parse_number<std::size_t>(value, "eval_reps");
  } else {
    throw ConfigError(std::string(key), "unknown config key");
  }
}

/// Parses a config file on top of `base`. An `env` line that changes the
/// environment swaps in that environment's defaults before any other key is
/// applied, wherever it appears in the file.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = detail::trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    entries.emplace_back(std::string(detail::trim(view.substr(0, eq))), std::string(view.substr(eq + 1)));
  }
  for (const auto& [key, value] : entries)
    if (key == "env") {
      const EnvKind env = parse_env_kind(detail::trim(value));
      if (env != base.env) {
        const Method method = base.method;
        const std::uint64_t seed = base.seed;
        base = RunConfig::defaults(env);
        base.method = method;
        base.seed = seed;
      }
    }
  for (const auto& [key, value] : entries) apply_config_value(base, key, value);
  return base;
}

inline void write_config(std::ostream& out, const RunConfig& cfg) {
  std::string eta;
  for (std::size_t j = 0; j < cfg.eta.size(); ++j) eta += (j ? "," : "") + format_double(cfg.eta[j]);
  out << "env = " << to_string(cfg.env) << "\n"
      << "method = " << to_string(cfg.method) << "\n"
      << "n = " << cfg.n << "\n"
      << "t_max = " << cfg.t_max << "\n"
      << "eta = " << eta << "\n"
      << "c = " << format_double(cfg.c) << "\n"
      << "alpha = " << format_double(cfg.alpha) << "\n"
      << "seed = " << cfg.seed << "\n"
      << "demean = " << (cfg.demean ? "true" : "false") << "\n"
      << "eval_reps = " << cfg.eval_reps << "\n";
}

// ---------------------------------------------------------------------------
// Trajectory CSV: t, beta_j..., gamma_hat_j..., batch_mean_pi, eval_pi.
// Missing values are empty fields.

inline std::string trajectory_header(std::size_t k) {
  std::string h = "t";
  for (std::size_t j = 0; j < k; ++j) h += ",beta_" + std::to_string(j);
  for (std::size_t j = 0; j < k; ++j) h += ",gamma_hat_" + std::to_string(j);
  return h + ",batch_mean_pi,eval_pi";
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const std::size_t k = traj.steps.empty() ? policy_dimension(traj.env) : traj.steps.front().beta.size();
  out << trajectory_header(k) << "\n";
  for (const auto& s : traj.steps) {
    out << s.t;
    for (std::size_t j = 0; j < k; ++j) out << ',' << format_double(s.beta[j]);
    for (std::size_t j = 0; j < k; ++j) {
      out << ',';
      if (s.gamma_hat) out << format_double((*s.gamma_hat)[static_cast<Eigen::Index>(j)]);
    }
    out << ',' << format_double(s.batch_mean_pi) << ',';
    if (s.eval_pi) out << format_double(*s.eval_pi);
    out << "\n";
  }
}

inline Trajectory read_trajectory_csv(std::istream& in, EnvKind env, Method method,
                                      RunStatus status = RunStatus::completed) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory CSV is empty");
  const std::size_t columns = detail::split(detail::trim(line), ',').size();
  if (columns < 5 || (columns - 3) % 2 != 0) throw std::runtime_error("malformed trajectory header");
  const std::size_t k = (columns - 3) / 2;
  if (std::string(detail::trim(line)) != trajectory_header(k))
    throw std::runtime_error("unexpected trajectory header: " + line);

  Trajectory traj{env, method, status, {}};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split(detail::trim(line), ',');
    if (fields.size() != columns)
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + " has the wrong number of fields");
    const std::string where = "line " + std::to_string(line_no);
    Step s{detail::parse_number<std::size_t>(fields[0], where), PolicyParams{0.0}, std::nullopt, 0.0, std::nullopt};
    Eigen::VectorXd beta(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) beta[static_cast<Eigen::Index>(j)] = detail::parse_number<double>(fields[1 + j], where);
    s.beta = PolicyParams(beta);
    if (!detail::trim(fields[1 + k]).empty()) {
      Eigen::VectorXd g(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j)
        g[static_cast<Eigen::Index>(j)] = detail::parse_number<double>(fields[1 + k + j], where);
      s.gamma_hat = g;
    }
    s.batch_mean_pi = detail::parse_number<double>(fields[1 + 2 * k], where);
    if (!detail::trim(fields[2 + 2 * k]).empty()) s.eval_pi = detail::parse_number<double>(fields[2 + 2 * k], where);
    traj.steps.push_back(std::move(s));
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Figure data: long format, one row per (method, step).

inline void write_figure_csv(std::ostream& out, std::span<const Trajectory> trajs) {
  const std::size_t k = trajs.empty() || trajs.front().steps.empty() ? 2 : trajs.front().steps.front().beta.size();
  out << "method,t";
  for (std::size_t j = 0; j < k; ++j) out << ",beta_" << j;
  out << "\n";
  for (const auto& traj : trajs)
    for (const auto& s : traj.steps) {
      out << to_string(traj.method) << ',' << s.t;
      for (std::size_t j = 0; j < k; ++j) out << ',' << format_double(s.beta[j]);
      out << "\n";
    }
}

// ---------------------------------------------------------------------------
// Summary JSON

inline nlohmann::ordered_json to_json(const RunConfig& cfg) {
  return {{"env", to_string(cfg.env)}, {"method", to_string(cfg.method)}, {"n", cfg.n},
          {"t_max", cfg.t_max},        {"eta", cfg.eta},                  {"c", cfg.c},
          {"alpha", cfg.alpha},        {"seed", cfg.seed},                {"demean", cfg.demean},
          {"eval_reps", cfg.eval_reps}};
}

inline std::vector<double> to_vector(const PolicyParams& beta) {
  return {beta.values().data(), beta.values().data() + beta.values().size()};
}

inline nlohmann::ordered_json to_json(const RunSummary& row) {
  nlohmann::ordered_json j{{"method", to_string(row.method)},
                           {"status", to_string(row.status)},
                           {"avg_objective", row.avg_objective},
                           {"avg_regret", row.avg_regret},
                           {"relative_objective", row.relative_objective},
                           {"weighted_regret", row.weighted_regret},
                           {"terminal_beta", to_vector(row.terminal_beta)},
                           {"terminal_error", row.terminal_error},
                           {"oscillating", row.oscillating}};
  j["avg_mse"] = row.avg_mse ? nlohmann::ordered_json(*row.avg_mse) : nlohmann::ordered_json(nullptr);
  return j;
}

/// Fields every summary row carries.
inline const std::vector<std::string>& summary_row_fields() {
  static const std::vector<std::string> fields{"method",          "status",         "avg_objective",
                                               "avg_regret",      "relative_objective", "weighted_regret",
                                               "terminal_beta",   "terminal_error", "oscillating",
                                               "avg_mse"};
  return fields;
}

inline nlohmann::ordered_json summary_json(const RunConfig& cfg, const FullInfoSolution& full,
                                           std::span<const RunSummary> rows) {
  nlohmann::ordered_json j;
  j["config"] = to_json(cfg);
  j["beta_star"] = to_vector(full.beta_star);
  j["pi_star"] = full.pi_star;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) j["rows"].push_back(to_json(row));
  return j;
}

}  // namespace stratpol
