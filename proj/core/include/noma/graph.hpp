#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

#include "noma/power.hpp"

namespace noma {

/// A Grouping plus one zero-demand "virtual" user per group. Virtual users
/// turn pure shifts (a user moving into a group without displacing anyone)
/// into exchanges, so a single cycle structure covers both.
/// Virtual ids are first_virtual_id + (g - 1) for group g; the canonical
/// form always keeps exactly one virtual user in each group.
struct ExtendedGrouping {
  Grouping base;  // real users only
  int group_count = 1;
  int first_virtual_id = 0;

  bool is_virtual(int user_id) const {
    return user_id >= first_virtual_id &&
           user_id < first_virtual_id + group_count;
  }
  int virtual_id_of_group(int group) const {
    return first_virtual_id + (group - 1);
  }
  /// Group of a real or virtual user; DomainError on unknown ids.
  int group_of(int user_id) const;
};

/// Throws ConsistencyError when grouping and scenario disagree on the user
/// set. Virtual ids start right after the highest real id.
ExtendedGrouping extend_with_virtuals(const Grouping& g, const Scenario& s);

/// Member lists including the virtual placeholder of each group (always
/// ordered last: its channel gain is 0).
std::vector<std::vector<SicUser>> grouped_members(const ExtendedGrouping& eg,
                                                  const Scenario& s);

/// Same totals as allocate_all on the base grouping; virtual users appear
/// with exactly 0 W.
PowerAllocation allocate_all(const ExtendedGrouping& eg, const Scenario& s);

/// Change of total transmit power when user i replaces user j in j's group
/// (j leaves, i joins; i's old group just loses i): PCE of i evaluated in
/// j's group without j, minus i's current PCE.
/// Throws ContractViolation when i and j share a group.
double move_delta(int user_i, int user_j, const ExtendedGrouping& eg,
                  const Scenario& s);

/// Dense move-delta matrix over real + virtual users. weights[i][j] is
/// move_delta(i, j); pairs inside one group (diagonal included) hold no
/// edge. Row-major, NaN encodes "absent"; no arithmetic is ever performed
/// on the sentinel.
struct GroupingGraph {
  std::vector<int> node_ids;    // real users in scenario order, then virtuals
  std::vector<double> weights;  // size() * size(), row-major

  int size() const { return static_cast<int>(node_ids.size()); }
  bool has_edge(int i, int j) const {
    return !std::isnan(weights[static_cast<std::size_t>(i) * node_ids.size() +
                               static_cast<std::size_t>(j)]);
  }
  /// Unchecked access; may return the NaN sentinel.
  double raw(int i, int j) const {
    return weights[static_cast<std::size_t>(i) * node_ids.size() +
                   static_cast<std::size_t>(j)];
  }
  /// Checked access; ContractViolation on an absent edge.
  double weight(int i, int j) const;
  /// Matrix index of a user id; ContractViolation if unknown.
  int index_of(int user_id) const;
};

GroupingGraph build_graph(const ExtendedGrouping& eg, const Scenario& s);

/// Ordered cycle of users in pairwise distinct groups. Applying it moves
/// every user to the (pre-move) group of its successor. Its weight equals
/// the exact change of total transmit power.
struct DifferGroupLoop {
  std::vector<int> users;  // ids, in cycle order
  double weight_w = 0.0;
};

/// Sum of edge weights along the closed walk (including the closing edge).
/// Throws ContractViolation on unknown ids, fewer than two users, or a
/// missing edge (consecutive users sharing a group).
double cycle_weight(std::span<const int> loop_user_ids, const GroupingGraph& g);

/// Moves every user in the loop to the pre-move group of its successor,
/// simultaneously. Virtual users keep their canonical one-per-group
/// placement, which realizes "the displaced virtual presence returns to its
/// origin group". Throws ContractViolation unless the loop users are
/// pairwise in distinct groups.
ExtendedGrouping apply_cycle(const DifferGroupLoop& loop,
                             const ExtendedGrouping& eg);

/// Debug dump: header row/column of node ids, absent edges as empty cells.
void dump_graph_csv(const GroupingGraph& g, std::ostream& out);

}  // namespace noma
