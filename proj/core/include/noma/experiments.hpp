#pragma once

// Benchmark plumbing: run one strategy on one scenario, sweep a parameter
// across seeds and strategies, and read/write the results as CSV.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "noma/scenario.hpp"
#include "noma/solvers.hpp"

namespace noma {

enum class Strategy { bellman_ford, greedy, user_preference, gale_shapley, brute_force };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);  // ParseError on unknown names

enum class SweepKind { groups, users, alpha, iterations };

std::string to_string(SweepKind k);
SweepKind sweep_kind_from_string(const std::string& name);  // ParseError on unknown names

// One benchmark measurement. `stable` is "true", "false", or "error" (the
// cell failed; power fields are 0 and the reason went to stderr).
struct ResultRow {
  std::string strategy;
  std::uint64_t seed = 0;
  int n_users = 0;
  int group_count = 0;
  double alpha = 0.0;  // 0 for strategies that do not use restarts
  double total_power_w = 0.0;
  double total_power_dbm = 0.0;
  int iterations = 0;
  int loops_applied = 0;
  double wall_time_s = 0.0;
  std::string stable;
};

// Exact CSV header emitted and required by the round-trip functions.
inline constexpr const char* kResultCsvHeader =
    "strategy,seed,n_users,group_count,alpha,total_power_w,total_power_dbm,"
    "iterations,loops_applied,wall_time_s,stable";

struct ExperimentConfig {
  SweepKind sweep = SweepKind::groups;
  std::vector<double> values;  // swept values; integral for groups/users/iterations

  // Population rule. groups sweeps need exactly one of n_users (fixed N) or
  // users_per_group (N = k*G); the other sweep kinds need n_users and
  // group_count.
  std::optional<int> n_users;
  std::optional<int> users_per_group;
  std::optional<int> group_count;

  std::vector<std::uint64_t> seeds;
  std::vector<Strategy> strategies;
  SolverConfig solver;  // alpha/max_outer_iters here are the non-swept defaults
  std::string output_path;  // streamed CSV; empty = collect only
  ChannelModelParams params;

  void validate() const;  // ConfigError on violations
};

// Reads the JSON mirror of ExperimentConfig (keys: sweep, values, n_users,
// users_per_group, group_count, seeds, strategies, alpha, max_outer_iters,
// exact_mode_group_cap, output_path). ParseError / IoError on bad input.
ExperimentConfig load_experiment_config(const std::string& path);

// Runs one strategy on one scenario and validates the result before
// reporting: every user's achievable rate must meet its target within 1e-9,
// else ConsistencyError. Deterministic apart from wall_time_s. The optional
// out-params receive the final grouping and the power trajectory (one entry
// per accepted grouping for the solvers, a single entry for one-shot
// strategies).
ResultRow run_single(const Scenario& s, Strategy strategy, const SolverConfig& cfg,
                     Grouping* grouping_out = nullptr,
                     std::vector<double>* trajectory_out = nullptr);

// Full cross product values x seeds x strategies, in that nesting order.
// Rows stream to cfg.output_path (header first, flushed per row) when set, so
// a partial run still leaves valid CSV. A failing cell becomes a row with
// stable="error" and the sweep continues.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg);

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_csv(const std::vector<ResultRow>& rows, std::ostream& out);
std::string format_row(const ResultRow& row);

// Aggregates rows into per-(strategy, x) curves, where x is the column named
// by `group_by` (groups -> group_count, users -> n_users, alpha -> alpha,
// iterations -> iterations). Rows with stable="error" are skipped. Output
// header: strategy,x,n,mean_total_power_w,std_total_power_w,
// mean_total_power_dbm (population std; dbm converts the mean).
void emit_plot_data(const std::vector<ResultRow>& rows, SweepKind group_by,
                    const std::string& path);

std::vector<ResultRow> parse_result_csv(const std::string& path);

}  // namespace noma
