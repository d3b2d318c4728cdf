#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "stratpol/core.hpp"
#include "stratpol/errors.hpp"
#include "stratpol/experiments.hpp"
#include "stratpol/io.hpp"
#include "stratpol/learn.hpp"
#include "stratpol/metrics.hpp"

namespace stratpol {

namespace cli {

/// Flag values as typed; only the ones present override the config.
struct Overrides {
  std::optional<std::string> config_path;
  std::map<std::string, std::string> values;  // config key -> text
  std::string out_dir = "out";
};

inline void add_run_flags(CLI::App& app, Overrides& o, bool with_env_method) {
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(name, [&o, key](const std::string& v) { o.values[key] = v; }, help);
  };
  if (with_env_method) {
    flag("--env", "env", "classification or pricing");
    flag("--method", "method", "iterative, rrm, naive or full_info");
  }
  flag("--n", "n", "agents per batch");
  flag("--T", "t_max", "number of steps");
  flag("--eta", "eta", "step size, scalar or comma-separated per coefficient");
  flag("--c", "c", "perturbation constant, h = c n^-alpha");
  flag("--alpha", "alpha", "perturbation decay exponent in (0, 0.5)");
  flag("--seed", "seed", "random seed");
  flag("--demean", "demean", "centre objective values before the gradient regression (true/false)");
  flag("--eval-reps", "eval_reps", "Monte-Carlo draws per evaluated policy");
  app.add_option_function<std::string>("--config", [&o](const std::string& v) { o.config_path = v; },
                                       "flat key = value config file");
  app.add_option("--out-dir", o.out_dir, "output directory")->capture_default_str();
}

/// defaults(env) <- config file <- flags. A forced env wins over both.
inline RunConfig resolve_config(const Overrides& o, std::optional<EnvKind> forced_env = std::nullopt) {
  std::optional<EnvKind> env = forced_env;
  if (!env) {
    if (auto it = o.values.find("env"); it != o.values.end()) env = parse_env_kind(detail::trim(it->second));
  }
  RunConfig cfg = RunConfig::defaults(env.value_or(EnvKind::classification));
  if (o.config_path) {
    std::ifstream in(*o.config_path);
    if (!in) throw ConfigError("config", "cannot open '" + *o.config_path + "'");
    cfg = parse_config(in, cfg);
  }
  for (const auto& [key, value] : o.values) {
    if (key == "env" && forced_env) continue;
    if (key == "env" && parse_env_kind(detail::trim(value)) != cfg.env) {
      const RunConfig previous = cfg;
      cfg = RunConfig::defaults(parse_env_kind(detail::trim(value)));
      cfg.method = previous.method;
      cfg.seed = previous.seed;
    }
  }
  for (const auto& [key, value] : o.values)
    if (key != "env") apply_config_value(cfg, key, value);
  if (forced_env) cfg.env = *forced_env;
  return validate_config(cfg);
}

inline std::filesystem::path prepare_out_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::error_code ec;
  std::filesystem::create_directories(p, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

inline std::string beta_text(const PolicyParams& beta) {
  std::string s = "(";
  for (std::size_t j = 0; j < beta.size(); ++j) s += (j ? ", " : "") + fixed(beta[j], 4);
  return s + ")";
}

inline void print_summary(std::ostream& out, EnvKind env, std::span<const RunSummary> rows) {
  out << std::left << std::setw(11) << "method" << std::right << std::setw(14)
      << (env == EnvKind::classification ? "avg_mse" : "avg_revenue") << std::setw(14) << "vs_full_info"
      << std::setw(14) << "weighted_reg" << "  terminal_beta" << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(11) << to_string(r.method) << std::right << std::setw(14)
        << fixed(r.avg_mse.value_or(r.avg_objective), 4) << std::setw(14) << fixed(r.relative_objective, 4)
        << std::setw(14) << fixed(r.weighted_regret, 4) << "  " << beta_text(r.terminal_beta)
        << (r.oscillating ? "  oscillating" : "") << (r.status == RunStatus::diverged ? "  diverged" : "") << "\n";
  }
}

inline void print_medians(std::ostream& out, const SuiteResult& suite) {
  out << "median over " << suite.runs.size() << " seed(s), " << to_string(suite.config.env) << "\n";
  out << std::left << std::setw(11) << "method" << std::right << std::setw(14)
      << (suite.config.env == EnvKind::classification ? "avg_mse" : "avg_revenue") << std::setw(14)
      << "vs_full_info" << std::setw(16) << "terminal_error" << std::setw(13) << "oscillating" << "\n";
  for (const auto& m : suite.medians) {
    out << std::left << std::setw(11) << to_string(m.method) << std::right << std::setw(14)
        << fixed(m.avg_mse.value_or(m.avg_objective), 4) << std::setw(14) << fixed(m.relative_objective, 4)
        << std::setw(16) << fixed(m.terminal_error, 6) << std::setw(13)
        << (std::to_string(m.oscillating_seeds) + "/" + std::to_string(suite.runs.size())) << "\n";
  }
}

inline nlohmann::ordered_json suite_json(const SuiteResult& suite) {
  nlohmann::ordered_json j;
  j["config"] = to_json(suite.config);
  j["seeds"] = nlohmann::ordered_json::array();
  for (const auto& run : suite.runs) j["seeds"].push_back(run.seed);
  j["medians"] = nlohmann::ordered_json::array();
  for (const auto& m : suite.medians) {
    nlohmann::ordered_json row{{"method", to_string(m.method)},
                               {"avg_objective", m.avg_objective},
                               {"relative_objective", m.relative_objective},
                               {"terminal_error", m.terminal_error},
                               {"oscillating_seeds", m.oscillating_seeds},
                               {"diverged_seeds", m.diverged_seeds}};
    row["avg_mse"] = m.avg_mse ? nlohmann::ordered_json(*m.avg_mse) : nlohmann::ordered_json(nullptr);
    j["medians"].push_back(row);
  }
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& run : suite.runs) {
    RunConfig cfg = suite.config;
    cfg.seed = run.seed;
    j["runs"].push_back(summary_json(cfg, run.full, run.summaries));
  }
  return j;
}

/// Trajectories of the first seed: one CSV per method plus the figure data.
inline void write_suite_bundle(const std::filesystem::path& dir, const SuiteResult& suite) {
  const auto& first = suite.runs.front();
  for (const auto& traj : first.trajectories) {
    auto out = open_output(dir / ("trajectory_" + std::string(to_string(traj.method)) + ".csv"));
    write_trajectory_csv(out, traj);
  }
  {
    auto out = open_output(dir / "summary.json");
    out << suite_json(suite).dump(2) << "\n";
  }
  auto out = open_output(dir / "figure_data.csv");
  write_figure_csv(out, first.trajectories);
}

// ---------------------------------------------------------------------------
// Commands

inline void command_run(const Overrides& o, std::ostream& out) {
  const RunConfig cfg = resolve_config(o);
  const auto dir = prepare_out_dir(o.out_dir);
  visit_environment(cfg.env, [&](const auto& env) {
    const FullInfoSolution full = solve_full_info(env, cfg);
    Trajectory traj;
    switch (cfg.method) {
      case Method::iterative: traj = run_iterative(env, cfg); break;
      case Method::rrm: traj = run_rrm(env, cfg); break;
      case Method::naive: traj = run_naive(env, cfg); break;
      case Method::full_info: traj = run_full_info(env, cfg, {}, full); break;
    }
    const std::vector<Trajectory> trajs{traj};
    const auto rows = summarize(trajs, full);
    {
      auto f = open_output(dir / "trajectory.csv");
      write_trajectory_csv(f, traj);
    }
    {
      auto f = open_output(dir / "summary.json");
      f << summary_json(cfg, full, rows).dump(2) << "\n";
    }
    {
      auto f = open_output(dir / "figure_data.csv");
      write_figure_csv(f, trajs);
    }
    out << to_string(cfg.env) << ": full-information optimum " << beta_text(full.beta_star) << ", objective "
        << fixed(full.pi_star, 4) << "\n";
    print_summary(out, cfg.env, rows);
    return 0;
  });
}

inline void command_reproduce(const std::string& target, const Overrides& o, std::size_t seeds, std::ostream& out) {
  const bool table = target == "table1" || target == "table2";
  const EnvKind env = (target == "table1" || target == "fig1") ? EnvKind::classification : EnvKind::pricing;
  const RunConfig cfg = resolve_config(o, env);
  std::vector<Method> methods = all_methods();
  if (target == "fig2") methods = {Method::full_info, Method::iterative, Method::naive};
  const auto dir = prepare_out_dir(o.out_dir);
  const SuiteResult suite = run_suite(cfg, seed_range(cfg.seed, table ? seeds : 1), methods);
  write_suite_bundle(dir, suite);
  if (table) {
    print_medians(out, suite);
  } else {
    out << to_string(env) << " seed " << cfg.seed << ", terminal coefficients\n";
    print_summary(out, env, suite.runs.front().summaries);
  }
}

inline void command_check_gradients(const Overrides& o, std::size_t seeds, std::ostream& out) {
  const RunConfig cfg = resolve_config(o, EnvKind::classification);
  GradientCheckOptions opt;
  opt.seeds = seeds;
  opt.first_seed = cfg.seed;
  opt.demean = cfg.demean;
  if (o.values.count("c") || o.values.count("alpha")) opt.schedule = cfg.schedule();
  const auto dir = prepare_out_dir(o.out_dir);
  const auto res = check_gradients(Classification{}, opt);

  nlohmann::ordered_json j{{"beta", to_vector(opt.beta)},
                           {"c", opt.schedule.c},
                           {"alpha", opt.schedule.alpha},
                           {"n_small", opt.n_small},
                           {"n_large", opt.n_large},
                           {"oracle", std::vector<double>(res.oracle.value.data(), res.oracle.value.data() + res.oracle.value.size())},
                           {"oracle_se", std::vector<double>(res.oracle.std_error.data(), res.oracle.std_error.data() + res.oracle.std_error.size())},
                           {"median_error_small", res.median_small},
                           {"median_error_large", res.median_large},
                           {"relative_error_large", res.relative_large}};
  {
    auto f = open_output(dir / "summary.json");
    f << j.dump(2) << "\n";
  }
  auto f = open_output(dir / "figure_data.csv");
  f << "seed,error_n_small,error_n_large\n";
  for (std::size_t s = 0; s < res.error_small.size(); ++s)
    f << opt.first_seed + s << ',' << format_double(res.error_small[s]) << ',' << format_double(res.error_large[s])
      << "\n";

  out << "finite-difference gradient at " << beta_text(opt.beta) << ": (" << fixed(res.oracle.value[0], 4) << ", "
      << fixed(res.oracle.value[1], 4) << ")\n"
      << "median |gamma_hat - oracle|: n=" << opt.n_small << " " << fixed(res.median_small, 4) << ", n=" << opt.n_large
      << " " << fixed(res.median_large, 4) << " (relative " << fixed(100.0 * res.relative_large, 1) << "%)\n";
}

inline void command_check_regret_bound(const Overrides& o, std::size_t seeds, std::ostream& out) {
  const RunConfig cfg = resolve_config(o, EnvKind::classification);
  const auto dir = prepare_out_dir(o.out_dir);
  const SuiteResult suite = run_suite(cfg, seed_range(cfg.seed, seeds), {Method::full_info, Method::iterative});
  write_suite_bundle(dir, suite);
  const auto rows = check_regret_bound(suite);
  bool all = true;
  out << std::setw(6) << "seed" << std::setw(16) << "weighted_regret" << std::setw(12) << "max|grad|" << std::setw(12)
      << "bound" << "\n";
  for (const auto& r : rows) {
    all = all && r.holds();
    out << std::setw(6) << r.seed << std::setw(16) << fixed(r.weighted_regret, 4) << std::setw(12)
        << fixed(r.max_gradient, 4) << std::setw(12) << fixed(r.bound, 4) << (r.holds() ? "" : "  VIOLATED") << "\n";
  }
  out << (all ? "bound holds on every seed" : "bound violated") << "\n";
}

}  // namespace cli

/// Entry point of the command-line tool. Returns 0 on success, 1 on a
/// configuration error and 2 on a runtime (environment or solver) error.
inline int run_command(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  CLI::App app{"Policy learning with strategic agents: simulations and reproduction suites"};
  app.require_subcommand(1);

  cli::Overrides run_o, repro_o, grad_o, bound_o;
  std::size_t repro_seeds = 10, grad_seeds = 20, bound_seeds = 10;
  std::string target;

  auto* run = app.add_subcommand("run", "run one method and write its trajectory");
  cli::add_run_flags(*run, run_o, true);

  auto* repro = app.add_subcommand("reproduce", "table and figure suites");
  repro->add_option("target", target, "table1, table2, fig1 or fig2")
      ->required()
      ->check(CLI::IsMember({"table1", "table2", "fig1", "fig2"}));
  cli::add_run_flags(*repro, repro_o, false);
  repro->add_option("--seeds", repro_seeds, "number of consecutive seeds for tables")->capture_default_str();

  auto* check = app.add_subcommand("check", "property checks");
  check->require_subcommand(1);
  auto* grad = check->add_subcommand("gradients", "perturbation gradient against a finite-difference oracle");
  cli::add_run_flags(*grad, grad_o, false);
  grad->add_option("--seeds", grad_seeds, "number of seeds")->capture_default_str();
  auto* bound = check->add_subcommand("regret-bound", "weighted regret against eta M^2 / 2");
  cli::add_run_flags(*bound, bound_o, false);
  bound->add_option("--seeds", bound_seeds, "number of seeds")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) cli::command_run(run_o, out);
    else if (repro->parsed()) cli::command_reproduce(target, repro_o, repro_seeds, out);
    else if (grad->parsed()) cli::command_check_gradients(grad_o, grad_seeds, out);
    else if (bound->parsed()) cli::command_check_regret_bound(bound_o, bound_seeds, out);
    return 0;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace stratpol
