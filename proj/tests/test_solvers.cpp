#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "noma/errors.hpp"
#include "noma/graph.hpp"
#include "noma/power.hpp"
#include "noma/solvers.hpp"

using namespace noma;
using helpers::grouping;
using helpers::hand_scenario;

namespace {

bool close_rel(double a, double b, double rel, double scale = 0.0) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), scale});
}

Scenario swap_scenario() {
  return hand_scenario(
      {{0, 17.0, 4.0}, {1, 1.0, 4.0}, {2, 16.0, 0.5}, {3, 1.1, 0.5}, {4, 5.0, 1.0}}, 2);
}

Grouping swap_grouping() { return grouping({{0, 1}, {1, 1}, {2, 2}, {3, 2}, {4, 1}}); }

// Three nodes in three distinct groups with hand-picked weights. Cycles:
// (0,1) = -9, (0,2) = -2, (1,2) = +12, (0,1,2) = -19, (0,2,1) = +20.
GroupingGraph hand_graph() {
  constexpr double X = std::numeric_limits<double>::quiet_NaN();
  GroupingGraph g;
  g.node_ids = {0, 1, 2};
  g.weights = {X, -10.0, -1.0,  //
               1.0, X, -8.0,    //
               -1.0, 20.0, X};
  return g;
}

ExtendedGrouping hand_eg() {
  ExtendedGrouping eg;
  eg.base = grouping({{0, 1}, {1, 2}, {2, 3}});
  eg.group_count = 3;
  eg.first_virtual_id = 3;
  return eg;
}

GroupingGraph nonneg_graph() {
  GroupingGraph g = hand_graph();
  for (double& w : g.weights)
    if (!std::isnan(w)) w = std::abs(w);
  return g;
}

// exhaustive minimum cycle weight, via the enumeration visitor
double min_cycle_weight(const GroupingGraph& g) {
  double best = std::numeric_limits<double>::infinity();
  for_each_differ_group_cycle(g, [&](std::span<const int>, double w) {
    best = std::min(best, w);
    return true;
  });
  return best;
}

}  // namespace

TEST_CASE("init grouping: frozen six-user fixture") {
  // noise 1 W: PCE-greedy fill order is frozen from an independent
  // reimplementation; the resulting total power is exactly 8 W
  const Scenario s = hand_scenario({{0, 16.0, 2.0},
                                    {1, 8.0, 1.0},
                                    {2, 4.0, 2.0},
                                    {3, 2.0, 1.0},
                                    {4, 1.0, 2.0},
                                    {5, 0.5, 1.0}},
                                   3);
  const Grouping g = init_grouping(s);
  CHECK(g.group_of(0) == 1);
  CHECK(g.group_of(1) == 2);
  CHECK(g.group_of(2) == 3);
  CHECK(g.group_of(3) == 2);
  CHECK(g.group_of(4) == 1);
  CHECK(g.group_of(5) == 2);
  CHECK(allocate_all(g, s).total_w == 8.0);
}

TEST_CASE("init grouping: spare groups give singletons, strongest user first") {
  const Scenario s = generate_scenario(3, 5, 77);
  const Grouping g = init_grouping(s);
  std::set<int> used;
  for (const auto& [uid, gi] : g.assignment) {
    CHECK(used.insert(gi).second);  // all singletons
  }
  // descending gain order claims ascending group indices
  std::vector<UserProfile> by_gain = s.users;
  std::sort(by_gain.begin(), by_gain.end(), [](const auto& a, const auto& b) {
    return a.channel_gain_sq > b.channel_gain_sq;
  });
  CHECK(g.group_of(by_gain[0].id) == 1);
  CHECK(g.group_of(by_gain[1].id) == 2);
  CHECK(g.group_of(by_gain[2].id) == 3);
}

TEST_CASE("exact finder: frozen swap instance") {
  const Scenario s = swap_scenario();
  const ExtendedGrouping eg = extend_with_virtuals(swap_grouping(), s);
  const GroupingGraph g = build_graph(eg, s);

  const auto loop = find_loop_bellman_ford(g, eg, 1e-9);
  REQUIRE(loop.has_value());
  CHECK(loop->users == std::vector<int>{1, 3});
  CHECK(loop->weight_w == doctest::Approx(-28.279178502727916).epsilon(1e-12));
  CHECK(close_rel(loop->weight_w, cycle_weight(loop->users, g), 1e-12));

  // the qualification threshold filters loops that are not negative enough
  CHECK_FALSE(find_loop_bellman_ford(g, eg, 29.0).has_value());
  CHECK(find_loop_bellman_ford(g, eg, 28.0).has_value());
}

TEST_CASE("exact finder: hand matrix picks the most negative cycle") {
  const GroupingGraph g = hand_graph();
  const ExtendedGrouping eg = hand_eg();

  const auto loop = find_loop_bellman_ford(g, eg, 1e-9);
  REQUIRE(loop.has_value());
  CHECK(loop->users == std::vector<int>{0, 1, 2});
  CHECK(loop->weight_w == -19.0);

  CHECK_FALSE(find_loop_bellman_ford(nonneg_graph(), eg, 1e-9).has_value());
}

TEST_CASE("exact finder: group cap raises a capability error") {
  const Scenario s = generate_scenario(13, 13, 5);
  const ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  const GroupingGraph g = build_graph(eg, s);
  CHECK_THROWS_AS(find_loop_bellman_ford(g, eg, 1e-9), CapabilityError);
  CHECK_NOTHROW(find_loop_bellman_ford(g, eg, 1e-9, 13));
}

TEST_CASE("label-correcting finder: returns a valid qualifying loop") {
  const GroupingGraph g = hand_graph();
  const ExtendedGrouping eg = hand_eg();

  // relaxation order makes the first candidate the (0,1) revisit
  const auto loop = find_loop_label_correcting(g, eg, 1e-9);
  REQUIRE(loop.has_value());
  CHECK(loop->users == std::vector<int>{0, 1});
  CHECK(loop->weight_w == -9.0);

  CHECK_FALSE(find_loop_label_correcting(nonneg_graph(), eg, 1e-9).has_value());

  const Scenario s = swap_scenario();
  const ExtendedGrouping seg = extend_with_virtuals(swap_grouping(), s);
  const GroupingGraph sg = build_graph(seg, s);
  const auto sloop = find_loop_label_correcting(sg, seg, 1e-9);
  REQUIRE(sloop.has_value());
  CHECK(sloop->weight_w < -1e-9);
  CHECK(close_rel(sloop->weight_w, cycle_weight(sloop->users, sg), 1e-12));
  std::set<int> groups_seen;
  for (int uid : sloop->users) CHECK(groups_seen.insert(seg.group_of(uid)).second);
}

TEST_CASE("greedy finder: hand matrix walk") {
  const GroupingGraph g = hand_graph();
  const ExtendedGrouping eg = hand_eg();

  // restart 0 starts at the global minimum edge (0,1), extends to 2, and the
  // length-3 closure beats the length-2 one
  const auto loop = find_loop_greedy(g, eg, 5.0, {}, 1e-9);
  REQUIRE(loop.has_value());
  CHECK(loop->users == std::vector<int>{0, 1, 2});
  CHECK(loop->weight_w == -19.0);

  // a single restart suffices: prefix closures are evaluated along the walk
  const auto one = find_loop_greedy(g, eg, 1.0 / 3.0, {}, 1e-9);
  REQUIRE(one.has_value());
  CHECK(one->users == std::vector<int>{0, 1, 2});

  // forbidding node 0 as a start shifts the walk to the (1,2) edge
  const auto forb = find_loop_greedy(g, eg, 5.0, {0}, 1e-9);
  REQUIRE(forb.has_value());
  CHECK(forb->users == std::vector<int>{1, 2, 0});
  CHECK(forb->weight_w == -19.0);

  CHECK_FALSE(find_loop_greedy(g, eg, 5.0, {}, 20.0).has_value());
  CHECK_FALSE(find_loop_greedy(nonneg_graph(), eg, 5.0, {}, 1e-9).has_value());
  CHECK_THROWS_AS(find_loop_greedy(g, eg, 0.0, {}, 1e-9), ConfigError);
}

TEST_CASE("greedy finder: frozen swap instance") {
  const Scenario s = swap_scenario();
  const ExtendedGrouping eg = extend_with_virtuals(swap_grouping(), s);
  const GroupingGraph g = build_graph(eg, s);

  const auto loop = find_loop_greedy(g, eg, 5.0, {}, 1e-9);
  REQUIRE(loop.has_value());
  CHECK(loop->users == std::vector<int>{1, 3});
  CHECK(loop->weight_w == doctest::Approx(-28.279178502727916).epsilon(1e-12));
}

TEST_CASE("cycle enumeration: counts, payloads, early stop, work cap") {
  const Scenario s = swap_scenario();
  const ExtendedGrouping eg = extend_with_virtuals(swap_grouping(), s);
  const GroupingGraph g = build_graph(eg, s);

  // two groups of 4 and 3 nodes: every differ-group pair is one 2-cycle
  int count = 0;
  for_each_differ_group_cycle(g, [&](std::span<const int> users, double w) {
    ++count;
    REQUIRE(users.size() == 2);
    CHECK(close_rel(w, cycle_weight(std::vector<int>(users.begin(), users.end()), g),
                    1e-12, 1.0));
    return true;
  });
  CHECK(count == 12);

  int seen = 0;
  for_each_differ_group_cycle(g, [&](std::span<const int>, double) {
    ++seen;
    return false;  // stop immediately
  });
  CHECK(seen == 1);

  CHECK_THROWS_AS(
      for_each_differ_group_cycle(g, [](std::span<const int>, double) { return true; },
                                  3),
      CapabilityError);
}

TEST_CASE("is_all_stable matches the exact finder verdict") {
  const Scenario s = swap_scenario();
  CHECK_FALSE(is_all_stable(swap_grouping(), s));

  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 4);  // N in 3..6
    const int g_count = 2 + static_cast<int>(rng() % 2);
    const Scenario inst = generate_scenario(n, g_count, 8000 + trial);

    Grouping cand;
    std::uniform_int_distribution<int> pick(1, g_count);
    for (const auto& u : inst.users) cand.assignment[u.id] = pick(rng);

    const ExtendedGrouping eg = extend_with_virtuals(cand, inst);
    const GroupingGraph graph = build_graph(eg, inst);
    const double pt = allocate_all(cand, inst).total_w;
    const double eps = 1e-9 * std::max(1.0, pt);
    const bool finder_none = !find_loop_bellman_ford(graph, eg, eps).has_value();
    CAPTURE(trial);
    CHECK(finder_none == is_all_stable(cand, inst));
    CHECK(finder_none == !(min_cycle_weight(graph) < -eps));
  }
}

TEST_CASE("solve: single user") {
  const Scenario s = hand_scenario({{0, 4.0, 1.0}}, 1);
  const SolveReport rep = solve(s, SolverConfig{});
  CHECK(rep.final_grouping.group_of(0) == 1);
  CHECK(rep.allocation.total_w == 0.25);  // standalone power
  CHECK(rep.loops_applied == 0);
  CHECK(rep.stable);
  REQUIRE(rep.power_trajectory_w.size() == 1);
  CHECK(rep.power_trajectory_w[0] == 0.25);
}

TEST_CASE("solve: exact mode reaches a certified all-stable grouping") {
  for (int seed = 1; seed <= 8; ++seed) {
    const Scenario s = generate_scenario(6, 3, 9000 + seed);
    SolverConfig cfg;
    cfg.loop_finder = LoopFinder::bellman_ford;
    const SolveReport rep = solve(s, cfg);
    CAPTURE(seed);
    CHECK(rep.stable);
    CHECK(is_all_stable(rep.final_grouping, s));

    // strictly decreasing trajectory, each step beating the threshold
    for (std::size_t i = 1; i < rep.power_trajectory_w.size(); ++i) {
      const double eps =
          cfg.neg_threshold * std::max(1.0, rep.power_trajectory_w[i - 1]);
      CHECK(rep.power_trajectory_w[i] < rep.power_trajectory_w[i - 1] - eps);
    }
    CHECK(rep.power_trajectory_w.back() == rep.allocation.total_w);
    CHECK(static_cast<int>(rep.power_trajectory_w.size()) == rep.loops_applied + 1);

    // dominance against the initial grouping and the global optimum
    const double init_pt = allocate_all(init_grouping(s), s).total_w;
    CHECK(rep.allocation.total_w <= init_pt);
    const auto [best_g, best_pt] = brute_force_optimum(s);
    CHECK(best_pt <= rep.allocation.total_w * (1.0 + 1e-12));
  }
}

TEST_CASE("solve: greedy respects the loop budget and stays feasible") {
  const Scenario s = generate_scenario(30, 5, 123);
  SolverConfig cfg;  // greedy by default
  const SolveReport rep = solve(s, cfg);
  CHECK(rep.loops_applied <= 35);  // N + G
  CHECK(rep.stable);
  for (const auto& u : s.users) {
    const double r = achievable_rate(u.id, rep.final_grouping, rep.allocation, s);
    CHECK(close_rel(r, u.target_rate, 1e-9));
  }
  // deterministic across runs (wall time aside)
  const SolveReport rep2 = solve(s, cfg);
  CHECK(rep2.final_grouping.assignment == rep.final_grouping.assignment);
  CHECK(rep2.power_trajectory_w == rep.power_trajectory_w);
}

TEST_CASE("solve: iteration cap reports instability with a diagnostic") {
  // seed picked so the exact solver needs at least two applied loops
  const Scenario s = generate_scenario(12, 3, 9107);
  SolverConfig cfg;
  cfg.loop_finder = LoopFinder::bellman_ford;
  const SolveReport full = solve(s, cfg);
  REQUIRE(full.loops_applied >= 2);

  cfg.max_outer_iters = 1;
  const SolveReport capped = solve(s, cfg);
  CHECK_FALSE(capped.stable);
  CHECK_FALSE(capped.diagnostic.empty());
  CHECK(capped.loops_applied == 1);
}

TEST_CASE("solve: exact mode falls back to label correcting above the group cap") {
  const Scenario s = generate_scenario(12, 4, 321);
  SolverConfig cfg;
  cfg.loop_finder = LoopFinder::bellman_ford;
  cfg.exact_mode_group_cap = 3;  // force the fallback
  const SolveReport rep = solve(s, cfg);
  CHECK(rep.stable);
  CHECK(rep.diagnostic.find("label-correcting") != std::string::npos);
  for (const auto& u : s.users) {
    const double r = achievable_rate(u.id, rep.final_grouping, rep.allocation, s);
    CHECK(close_rel(r, u.target_rate, 1e-9));
  }
}

TEST_CASE("solve: config validation") {
  const Scenario s = generate_scenario(4, 2, 1);
  SolverConfig cfg;
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(solve(s, cfg), ConfigError);
  cfg = SolverConfig{};
  cfg.neg_threshold = -1.0;
  CHECK_THROWS_AS(solve(s, cfg), ConfigError);
  cfg = SolverConfig{};
  cfg.max_outer_iters = 0;
  CHECK_THROWS_AS(solve(s, cfg), ConfigError);
  cfg = SolverConfig{};
  cfg.exact_mode_group_cap = 0;
  CHECK_THROWS_AS(solve(s, cfg), ConfigError);
}

TEST_CASE("brute force: agrees with direct enumeration through allocate_all") {
  const Scenario s = generate_scenario(6, 2, 55);
  const auto [best_g, best_pt] = brute_force_optimum(s);
  CHECK(allocate_all(best_g, s).total_w == best_pt);

  // independent enumeration over all 2^6 assignments
  double want = std::numeric_limits<double>::infinity();
  for (int code = 0; code < 64; ++code) {
    Grouping g;
    for (int k = 0; k < 6; ++k) g.assignment[k] = ((code >> (5 - k)) & 1) + 1;
    want = std::min(want, allocate_all(g, s).total_w);
  }
  CHECK(best_pt == want);
}

TEST_CASE("brute force: lexicographic tie handling and trivial shapes") {
  // spare groups: singletons are optimal; the first optimum in lexicographic
  // assignment order is user k -> group k+1
  const Scenario s = generate_scenario(3, 4, 9);
  const auto [g, pt] = brute_force_optimum(s);
  CHECK(g.group_of(0) == 1);
  CHECK(g.group_of(1) == 2);
  CHECK(g.group_of(2) == 3);
  double standalone = 0.0;
  for (const auto& u : s.users)
    standalone += (std::exp2(u.target_rate) - 1.0) * s.noise_power_w / u.channel_gain_sq;
  CHECK(close_rel(pt, standalone, 1e-12));

  const Scenario pair = hand_scenario({{0, 4.0, 1.0}, {1, 1.0, 1.0}}, 1);
  const auto [pg, ppt] = brute_force_optimum(pair);
  CHECK(pg.group_of(0) == 1);
  CHECK(pg.group_of(1) == 1);
  CHECK(ppt == 1.5);

  CHECK_THROWS_AS(brute_force_optimum(generate_scenario(40, 5, 2)), CapabilityError);
}
