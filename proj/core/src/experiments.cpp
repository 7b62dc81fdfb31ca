#include "noma/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "noma/baselines.hpp"
#include "noma/errors.hpp"
#include "noma/numeric.hpp"

namespace noma {

namespace {

// every reported allocation must meet each user's rate target within this
constexpr double kRateTol = 1e-9;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::bellman_ford: return "bellman_ford";
    case Strategy::greedy: return "greedy";
    case Strategy::user_preference: return "user_preference";
    case Strategy::gale_shapley: return "gale_shapley";
    case Strategy::brute_force: return "brute_force";
  }
  throw ContractViolation("to_string: unknown strategy value");
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "bellman_ford") return Strategy::bellman_ford;
  if (name == "greedy") return Strategy::greedy;
  if (name == "user_preference") return Strategy::user_preference;
  if (name == "gale_shapley") return Strategy::gale_shapley;
  if (name == "brute_force") return Strategy::brute_force;
  throw ParseError("unknown strategy '" + name +
                   "' (expected bellman_ford, greedy, user_preference, gale_shapley "
                   "or brute_force)");
}

std::string to_string(SweepKind k) {
  switch (k) {
    case SweepKind::groups: return "groups";
    case SweepKind::users: return "users";
    case SweepKind::alpha: return "alpha";
    case SweepKind::iterations: return "iterations";
  }
  throw ContractViolation("to_string: unknown sweep kind");
}

SweepKind sweep_kind_from_string(const std::string& name) {
  if (name == "groups") return SweepKind::groups;
  if (name == "users") return SweepKind::users;
  if (name == "alpha") return SweepKind::alpha;
  if (name == "iterations") return SweepKind::iterations;
  throw ParseError("unknown sweep kind '" + name +
                   "' (expected groups, users, alpha or iterations)");
}

void ExperimentConfig::validate() const {
  if (values.empty()) throw ConfigError("experiment config: values must be nonempty");
  if (seeds.empty()) throw ConfigError("experiment config: seeds must be nonempty");
  if (strategies.empty()) throw ConfigError("experiment config: strategies must be nonempty");

  const bool integral_values = sweep != SweepKind::alpha;
  for (double v : values) {
    if (!std::isfinite(v) || v <= 0.0)
      throw ConfigError("experiment config: swept values must be positive and finite");
    if (integral_values && v != std::floor(v))
      throw ConfigError("experiment config: " + to_string(sweep) +
                        " sweep values must be integers");
  }

  switch (sweep) {
    case SweepKind::groups:
      if (n_users.has_value() == users_per_group.has_value())
        throw ConfigError(
            "experiment config: groups sweep needs exactly one of n_users or "
            "users_per_group");
      if (n_users && *n_users < 1)
        throw ConfigError("experiment config: n_users must be >= 1");
      if (users_per_group && *users_per_group < 1)
        throw ConfigError("experiment config: users_per_group must be >= 1");
      break;
    case SweepKind::users:
      if (!group_count || *group_count < 1)
        throw ConfigError("experiment config: users sweep needs group_count >= 1");
      break;
    case SweepKind::alpha:
    case SweepKind::iterations:
      if (!n_users || *n_users < 1 || !group_count || *group_count < 1)
        throw ConfigError("experiment config: " + to_string(sweep) +
                          " sweep needs n_users >= 1 and group_count >= 1");
      break;
  }
  params.validate();
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("experiment config '" + path + "': " + e.what());
  }

  ExperimentConfig cfg;
  try {
    if (!j.contains("sweep")) throw ParseError("experiment config: missing field 'sweep'");
    cfg.sweep = sweep_kind_from_string(j.at("sweep").get<std::string>());
    if (!j.contains("values")) throw ParseError("experiment config: missing field 'values'");
    cfg.values = j.at("values").get<std::vector<double>>();
    if (!j.contains("seeds")) throw ParseError("experiment config: missing field 'seeds'");
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (!j.contains("strategies"))
      throw ParseError("experiment config: missing field 'strategies'");
    for (const auto& name : j.at("strategies").get<std::vector<std::string>>())
      cfg.strategies.push_back(strategy_from_string(name));
    if (j.contains("n_users")) cfg.n_users = j.at("n_users").get<int>();
    if (j.contains("users_per_group"))
      cfg.users_per_group = j.at("users_per_group").get<int>();
    if (j.contains("group_count")) cfg.group_count = j.at("group_count").get<int>();
    if (j.contains("alpha")) cfg.solver.alpha = j.at("alpha").get<double>();
    if (j.contains("max_outer_iters"))
      cfg.solver.max_outer_iters = j.at("max_outer_iters").get<int>();
    if (j.contains("exact_mode_group_cap"))
      cfg.solver.exact_mode_group_cap = j.at("exact_mode_group_cap").get<int>();
    if (j.contains("neg_threshold"))
      cfg.solver.neg_threshold = j.at("neg_threshold").get<double>();
    if (j.contains("output_path")) cfg.output_path = j.at("output_path").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("experiment config '" + path + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

ResultRow run_single(const Scenario& s, Strategy strategy, const SolverConfig& cfg,
                     Grouping* grouping_out, std::vector<double>* trajectory_out) {
  ResultRow row;
  row.strategy = to_string(strategy);
  row.seed = s.seed;
  row.n_users = static_cast<int>(s.users.size());
  row.group_count = s.group_count;
  row.alpha = strategy == Strategy::greedy ? cfg.alpha : 0.0;

  Grouping grouping;
  PowerAllocation alloc;
  switch (strategy) {
    case Strategy::bellman_ford:
    case Strategy::greedy: {
      SolverConfig sc = cfg;
      sc.loop_finder = strategy == Strategy::bellman_ford ? LoopFinder::bellman_ford
                                                          : LoopFinder::greedy;
      const SolveReport rep = solve(s, sc);
      grouping = rep.final_grouping;
      alloc = rep.allocation;
      row.iterations = rep.iterations;
      row.loops_applied = rep.loops_applied;
      row.wall_time_s = rep.wall_time_s;
      row.stable = rep.stable ? "true" : "false";
      if (trajectory_out) *trajectory_out = rep.power_trajectory_w;
      break;
    }
    case Strategy::user_preference:
    case Strategy::gale_shapley: {
      const auto t0 = std::chrono::steady_clock::now();
      std::tie(grouping, alloc) = strategy == Strategy::user_preference
                                      ? baseline_user_preference(s)
                                      : baseline_gale_shapley(s);
      row.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.stable = "false";  // one-shot assignments claim no stability
      break;
    }
    case Strategy::brute_force: {
      const auto t0 = std::chrono::steady_clock::now();
      std::tie(grouping, std::ignore) = brute_force_optimum(s);
      alloc = allocate_all(grouping, s);
      row.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.stable = "true";  // a global optimum admits no improving loop
      break;
    }
  }

  for (const auto& u : s.users) {
    const double rate = achievable_rate(u.id, grouping, alloc, s);
    if (!(rate >= u.target_rate - kRateTol))
      throw ConsistencyError("run_single(" + row.strategy + "): user " +
                             std::to_string(u.id) + " achieves rate " +
                             std::to_string(rate) + " below target " +
                             std::to_string(u.target_rate));
  }

  row.total_power_w = alloc.total_w;
  row.total_power_dbm = watts_to_dbm(alloc.total_w);
  if (grouping_out) *grouping_out = std::move(grouping);
  if (trajectory_out && trajectory_out->empty()) *trajectory_out = {alloc.total_w};
  return row;
}

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::ofstream out;
  const bool streaming = !cfg.output_path.empty();
  if (streaming) {
    out.open(cfg.output_path);
    if (!out) throw IoError("cannot open sweep output '" + cfg.output_path + "'");
    out << kResultCsvHeader << '\n';
    out.flush();
  }

  std::vector<ResultRow> rows;
  for (double v : cfg.values) {
    int n = 0;
    int g = 0;
    SolverConfig sc = cfg.solver;
    switch (cfg.sweep) {
      case SweepKind::groups:
        g = static_cast<int>(v);
        n = cfg.n_users ? *cfg.n_users : *cfg.users_per_group * g;
        break;
      case SweepKind::users:
        n = static_cast<int>(v);
        g = *cfg.group_count;
        break;
      case SweepKind::alpha:
        sc.alpha = v;
        n = *cfg.n_users;
        g = *cfg.group_count;
        break;
      case SweepKind::iterations:
        sc.max_outer_iters = static_cast<int>(v);
        n = *cfg.n_users;
        g = *cfg.group_count;
        break;
    }
    for (std::uint64_t seed : cfg.seeds) {
      for (Strategy strat : cfg.strategies) {
        ResultRow row;
        try {
          const Scenario s = generate_scenario(n, g, seed, cfg.params);
          row = run_single(s, strat, sc);
        } catch (const std::exception& e) {
          std::cerr << "sweep cell failed (strategy=" << to_string(strat) << ", seed="
                    << seed << ", value=" << fmt_double(v) << "): " << e.what() << '\n';
          row = ResultRow{};
          row.strategy = to_string(strat);
          row.seed = seed;
          row.n_users = n;
          row.group_count = g;
          row.alpha = strat == Strategy::greedy ? sc.alpha : 0.0;
          row.stable = "error";
        }
        rows.push_back(row);
        if (streaming) {
          out << format_row(row) << '\n';
          out.flush();
        }
      }
    }
  }
  return rows;
}

std::string format_row(const ResultRow& row) {
  std::ostringstream os;
  os << row.strategy << ',' << row.seed << ',' << row.n_users << ',' << row.group_count
     << ',' << fmt_double(row.alpha) << ',' << fmt_double(row.total_power_w) << ','
     << fmt_double(row.total_power_dbm) << ',' << row.iterations << ','
     << row.loops_applied << ',' << fmt_double(row.wall_time_s) << ',' << row.stable;
  return os.str();
}

void write_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  if (rows.empty()) throw ContractViolation("write_csv: rows must be nonempty");
  out << kResultCsvHeader << '\n';
  for (const auto& row : rows) out << format_row(row) << '\n';
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  if (rows.empty()) throw ContractViolation("emit_csv: rows must be nonempty");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(rows, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

void emit_plot_data(const std::vector<ResultRow>& rows, SweepKind group_by,
                    const std::string& path) {
  if (rows.empty()) throw ContractViolation("emit_plot_data: rows must be nonempty");
  std::map<std::pair<std::string, double>, std::vector<double>> series;
  for (const auto& row : rows) {
    if (row.stable == "error") continue;
    double x = 0.0;
    switch (group_by) {
      case SweepKind::groups: x = row.group_count; break;
      case SweepKind::users: x = row.n_users; break;
      case SweepKind::alpha: x = row.alpha; break;
      case SweepKind::iterations: x = row.iterations; break;
    }
    series[{row.strategy, x}].push_back(row.total_power_w);
  }

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "strategy,x,n,mean_total_power_w,std_total_power_w,mean_total_power_dbm\n";
  for (const auto& [key, powers] : series) {
    const double n = static_cast<double>(powers.size());
    double mean = 0.0;
    for (double p : powers) mean += p;
    mean /= n;
    double var = 0.0;
    for (double p : powers) var += (p - mean) * (p - mean);
    var /= n;  // population variance
    out << key.first << ',' << fmt_double(key.second) << ',' << powers.size() << ','
        << fmt_double(mean) << ',' << fmt_double(std::sqrt(var)) << ','
        << fmt_double(watts_to_dbm(mean)) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::vector<ResultRow> parse_result_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open result CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("result CSV '" + path + "': empty file");
  if (line == std::string(kResultCsvHeader) + "\r") line.pop_back();
  if (line != kResultCsvHeader)
    throw ParseError("result CSV '" + path + "': unexpected header '" + line + "'");

  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11)
      throw ParseError("result CSV '" + path + "' line " + std::to_string(line_no) +
                       ": expected 11 fields, got " + std::to_string(f.size()));
    try {
      ResultRow row;
      row.strategy = f[0];
      row.seed = std::stoull(f[1]);
      row.n_users = std::stoi(f[2]);
      row.group_count = std::stoi(f[3]);
      row.alpha = std::stod(f[4]);
      row.total_power_w = std::stod(f[5]);
      row.total_power_dbm = std::stod(f[6]);
      row.iterations = std::stoi(f[7]);
      row.loops_applied = std::stoi(f[8]);
      row.wall_time_s = std::stod(f[9]);
      row.stable = f[10];
      rows.push_back(std::move(row));
    } catch (const std::exception& e) {
      throw ParseError("result CSV '" + path + "' line " + std::to_string(line_no) +
                       ": " + e.what());
    }
  }
  return rows;
}

}  // namespace noma
