#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "noma/graph.hpp"

namespace noma {

enum class LoopFinder { bellman_ford, greedy };

struct SolverConfig {
  LoopFinder loop_finder = LoopFinder::greedy;
  /// Restart budget factor of the greedy finder: ceil(alpha * (N + G))
  /// restarts per invocation. Clamped into [1/(N+G), N] for the instance.
  double alpha = 5.0;
  /// A loop qualifies when its weight is below
  /// -neg_threshold * max(1 W, current total power).
  double neg_threshold = 1e-9;
  int max_outer_iters = 10000;
  /// Largest group count the exact finder accepts; the label space it
  /// explores is exponential in the number of groups.
  int exact_mode_group_cap = 12;
};

struct SolveReport {
  Grouping final_grouping;
  PowerAllocation allocation;
  /// Total power before any move and after each applied loop; strictly
  /// decreasing by more than the qualification threshold.
  std::vector<double> power_trajectory_w;
  int iterations = 0;     // graph builds, including the final no-loop check
  int loops_applied = 0;
  double wall_time_s = 0.0;
  /// True when the run ended because the loop finder reported no qualifying
  /// loop (a proof of all-stability only for the exact finder), false when
  /// the iteration cap stopped it.
  bool stable = false;
  std::string diagnostic;  // empty unless something noteworthy happened
};

/// Greedy initial partition: users in descending channel gain order, each
/// placed in the group whose total power grows least (smallest PCE), ties
/// to the lowest group index.
Grouping init_grouping(const Scenario& s);

/// Cycle-canceling local search: build the move-delta graph, apply one
/// qualifying negative differ-group loop, rebuild, repeat until the finder
/// reports none or max_outer_iters is reached.
SolveReport solve(const Scenario& s, const SolverConfig& cfg = {});

/// Exact minimum-weight differ-group loop via label-correcting search over
/// (node, set-of-groups-used) states, seeded from every node by zero-weight
/// virtual source edges. Returns the minimum-weight loop if its weight is
/// below -neg_eps_w, otherwise nullopt (then no qualifying loop exists).
/// Throws CapabilityError when the group count exceeds group_cap; use
/// find_loop_greedy (or find_loop_label_correcting) for larger instances.
std::optional<DifferGroupLoop> find_loop_bellman_ford(const GroupingGraph& g,
                                                      const ExtendedGrouping& eg,
                                                      double neg_eps_w,
                                                      int group_cap = 12);

/// Polynomial single-label relaxation over group-disjoint paths from a
/// zero-weight super source; a relaxation that would revisit a node already
/// on its path closes a candidate loop. Finds qualifying loops in practice
/// but cannot certify their absence.
std::optional<DifferGroupLoop> find_loop_label_correcting(const GroupingGraph& g,
                                                          const ExtendedGrouping& eg,
                                                          double neg_eps_w);

/// Greedy randomized-restart-free heuristic: ceil(alpha * (N + G)) restarts,
/// each seeded with the smallest not-yet-used edge whose start is not in
/// `forbidden_start_ids`, extended by minimal outgoing edges into unused
/// groups, closing back to the start at every prefix length. Returns the
/// best loop found if its weight is below -neg_eps_w.
std::optional<DifferGroupLoop> find_loop_greedy(
    const GroupingGraph& g, const ExtendedGrouping& eg, double alpha,
    const std::unordered_set<int>& forbidden_start_ids, double neg_eps_w);

/// Enumerates every differ-group loop (up to rotation, both directions)
/// over the graph's nodes, in deterministic order. The callback returns
/// false to stop early. Throws CapabilityError when more than `work_cap`
/// extension steps would be needed.
void for_each_differ_group_cycle(
    const GroupingGraph& g,
    const std::function<bool(std::span<const int> user_ids, double weight_w)>& visit,
    std::uint64_t work_cap = 10'000'000);

/// Exhaustive certificate: true iff no differ-group loop has weight below
/// -neg_threshold * max(1 W, total power of g). Small instances only.
bool is_all_stable(const Grouping& g, const Scenario& s,
                   double neg_threshold = 1e-9,
                   std::uint64_t work_cap = 10'000'000);

/// Minimum-total-power grouping over all G^N assignments (first minimum in
/// lexicographic assignment order). Throws CapabilityError when G^N exceeds
/// assignment_cap.
std::pair<Grouping, double> brute_force_optimum(
    const Scenario& s, std::uint64_t assignment_cap = 10'000'000);

}  // namespace noma
