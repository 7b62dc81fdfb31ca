#include "noma/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>
#include <string>

#include "noma/errors.hpp"
#include "pce_internal.hpp"

namespace noma {

int ExtendedGrouping::group_of(int user_id) const {
  if (is_virtual(user_id)) return user_id - first_virtual_id + 1;
  return base.group_of(user_id);
}

ExtendedGrouping extend_with_virtuals(const Grouping& g, const Scenario& s) {
  if (g.assignment.size() != s.users.size())
    throw ConsistencyError("extend_with_virtuals: grouping covers " +
                           std::to_string(g.assignment.size()) +
                           " users, scenario has " + std::to_string(s.users.size()));
  int max_id = std::numeric_limits<int>::min();
  for (const auto& u : s.users) {
    g.group_of(u.id);  // unassigned -> DomainError
    max_id = std::max(max_id, u.id);
  }
  ExtendedGrouping eg;
  eg.base = g;
  eg.group_count = s.group_count;
  eg.first_virtual_id = max_id + 1;
  return eg;
}

std::vector<std::vector<SicUser>> grouped_members(const ExtendedGrouping& eg,
                                                  const Scenario& s) {
  auto groups = grouped_members(eg.base, s);
  for (int gi = 1; gi <= eg.group_count; ++gi)
    groups[static_cast<std::size_t>(gi - 1)].push_back(
        SicUser{eg.virtual_id_of_group(gi), 0.0, 0.0});
  return groups;
}

PowerAllocation allocate_all(const ExtendedGrouping& eg, const Scenario& s) {
  PowerAllocation a = allocate_all(eg.base, s);
  for (int gi = 1; gi <= eg.group_count; ++gi)
    a.power_w[eg.virtual_id_of_group(gi)] = 0.0;
  return a;
}

namespace {

SicUser sic_user_for(int user_id, const ExtendedGrouping& eg, const Scenario& s) {
  if (eg.is_virtual(user_id)) return SicUser{user_id, 0.0, 0.0};
  const UserProfile& u = s.user_by_id(user_id);
  return SicUser{u.id, u.channel_gain_sq, u.target_rate};
}

}  // namespace

double move_delta(int user_i, int user_j, const ExtendedGrouping& eg,
                  const Scenario& s) {
  const int gi = eg.group_of(user_i);
  const int gj = eg.group_of(user_j);
  if (gi == gj)
    throw ContractViolation("move_delta: users " + std::to_string(user_i) + " and " +
                            std::to_string(user_j) + " share group " + std::to_string(gi));
  const auto groups = grouped_members(eg, s);
  const SicUser me = sic_user_for(user_i, eg, s);
  const double into = internal::pce_skipping(groups[static_cast<std::size_t>(gj - 1)],
                                             user_j, me, s.noise_power_w);
  const double current = internal::pce_skipping(groups[static_cast<std::size_t>(gi - 1)],
                                                user_i, me, s.noise_power_w);
  return into - current;
}

double GroupingGraph::weight(int i, int j) const {
  const double w = raw(i, j);
  if (std::isnan(w))
    throw ContractViolation("graph: no edge between nodes " + std::to_string(i) +
                            " and " + std::to_string(j));
  return w;
}

int GroupingGraph::index_of(int user_id) const {
  for (std::size_t i = 0; i < node_ids.size(); ++i)
    if (node_ids[i] == user_id) return static_cast<int>(i);
  throw ContractViolation("graph: unknown user id " + std::to_string(user_id));
}

GroupingGraph build_graph(const ExtendedGrouping& eg, const Scenario& s) {
  const auto groups = grouped_members(eg, s);
  const int n_real = static_cast<int>(s.users.size());
  const int n = n_real + eg.group_count;

  GroupingGraph g;
  g.node_ids.reserve(static_cast<std::size_t>(n));
  std::vector<SicUser> node_users;
  node_users.reserve(static_cast<std::size_t>(n));
  std::vector<int> node_group(static_cast<std::size_t>(n));
  for (const auto& u : s.users) {
    g.node_ids.push_back(u.id);
    node_users.push_back(SicUser{u.id, u.channel_gain_sq, u.target_rate});
  }
  for (int gi = 1; gi <= eg.group_count; ++gi) {
    g.node_ids.push_back(eg.virtual_id_of_group(gi));
    node_users.push_back(SicUser{eg.virtual_id_of_group(gi), 0.0, 0.0});
  }
  for (int i = 0; i < n; ++i)
    node_group[static_cast<std::size_t>(i)] = eg.group_of(g.node_ids[static_cast<std::size_t>(i)]);

  g.weights.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                   std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < n; ++i) {
    const int gi = node_group[static_cast<std::size_t>(i)];
    const double current = internal::pce_skipping(
        groups[static_cast<std::size_t>(gi - 1)], g.node_ids[static_cast<std::size_t>(i)],
        node_users[static_cast<std::size_t>(i)], s.noise_power_w);
    for (int j = 0; j < n; ++j) {
      const int gj = node_group[static_cast<std::size_t>(j)];
      if (gj == gi) continue;
      const double into = internal::pce_skipping(
          groups[static_cast<std::size_t>(gj - 1)], g.node_ids[static_cast<std::size_t>(j)],
          node_users[static_cast<std::size_t>(i)], s.noise_power_w);
      g.weights[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                static_cast<std::size_t>(j)] = into - current;
    }
  }
  return g;
}

double cycle_weight(std::span<const int> loop_user_ids, const GroupingGraph& g) {
  if (loop_user_ids.size() < 2)
    throw ContractViolation("cycle_weight: a loop needs at least two users");
  double total = 0.0;
  for (std::size_t k = 0; k < loop_user_ids.size(); ++k) {
    const int i = g.index_of(loop_user_ids[k]);
    const int j = g.index_of(loop_user_ids[(k + 1) % loop_user_ids.size()]);
    total += g.weight(i, j);  // absent edge -> ContractViolation
  }
  return total;
}

ExtendedGrouping apply_cycle(const DifferGroupLoop& loop, const ExtendedGrouping& eg) {
  const std::size_t n = loop.users.size();
  if (n < 2) throw ContractViolation("apply_cycle: a loop needs at least two users");
  std::set<int> groups_seen;
  for (int id : loop.users)
    if (!groups_seen.insert(eg.group_of(id)).second)
      throw ContractViolation("apply_cycle: loop users must be in pairwise distinct groups");

  ExtendedGrouping out = eg;
  for (std::size_t k = 0; k < n; ++k) {
    const int cur = loop.users[k];
    if (eg.is_virtual(cur)) continue;  // canonical placement is restored below
    const int dest = eg.group_of(loop.users[(k + 1) % n]);
    out.base.assignment[cur] = dest;
  }
  // Virtual users stay pinned to their canonical group, which re-normalizes
  // the one-virtual-per-group invariant after any virtual "move".
  return out;
}

void dump_graph_csv(const GroupingGraph& g, std::ostream& out) {
  char buf[64];
  out << "node";
  for (int id : g.node_ids) out << ',' << id;
  out << '\n';
  const int n = g.size();
  for (int i = 0; i < n; ++i) {
    out << g.node_ids[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      out << ',';
      if (g.has_edge(i, j)) {
        std::snprintf(buf, sizeof buf, "%.17g", g.raw(i, j));
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace noma
