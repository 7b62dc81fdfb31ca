#include "noma/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "noma/errors.hpp"
#include "noma/numeric.hpp"
#include "pce_internal.hpp"

namespace noma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNoSkip = std::numeric_limits<int>::min();

std::vector<int> zero_based_groups(const GroupingGraph& g, const ExtendedGrouping& eg) {
  std::vector<int> out(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i)
    out[static_cast<std::size_t>(i)] = eg.group_of(g.node_ids[static_cast<std::size_t>(i)]) - 1;
  return out;
}

}  // namespace

Grouping init_grouping(const Scenario& s) {
  s.validate();
  std::vector<SicUser> order;
  order.reserve(s.users.size());
  for (const auto& u : s.users)
    order.push_back(SicUser{u.id, u.channel_gain_sq, u.target_rate});
  std::sort(order.begin(), order.end(), sic_precedes);

  std::vector<std::vector<SicUser>> members(static_cast<std::size_t>(s.group_count));
  Grouping g;
  for (const auto& u : order) {
    int best_group = 1;
    double best_cost = kInf;
    for (int gi = 1; gi <= s.group_count; ++gi) {
      const double cost = internal::pce_skipping(
          members[static_cast<std::size_t>(gi - 1)], kNoSkip, u, s.noise_power_w);
      if (cost < best_cost) {
        best_cost = cost;
        best_group = gi;
      }
    }
    g.assignment[u.id] = best_group;
    auto& m = members[static_cast<std::size_t>(best_group - 1)];
    m.insert(std::upper_bound(m.begin(), m.end(), u, sic_precedes), u);
  }
  return g;
}

std::optional<DifferGroupLoop> find_loop_bellman_ford(const GroupingGraph& g,
                                                      const ExtendedGrouping& eg,
                                                      double neg_eps_w, int group_cap) {
  const int n = g.size();
  const int G = eg.group_count;
  if (G > group_cap)
    throw CapabilityError("find_loop_bellman_ford: " + std::to_string(G) +
                          " groups exceed the exact-search cap of " +
                          std::to_string(group_cap) + "; use the greedy finder");
  if (G > 30)
    throw CapabilityError("find_loop_bellman_ford: exact search supports at most 30 groups");
  const std::uint64_t n_masks = std::uint64_t{1} << G;
  if (static_cast<std::uint64_t>(n) * n_masks > (std::uint64_t{1} << 23))
    throw CapabilityError("find_loop_bellman_ford: state space too large; use the greedy finder");

  const auto node_group = zero_based_groups(g, eg);
  const std::size_t states = static_cast<std::size_t>(n) * static_cast<std::size_t>(n_masks);
  std::vector<double> dist(states);
  std::vector<int> parent(states);
  auto idx = [&](int node, std::uint32_t mask) {
    return static_cast<std::size_t>(mask) * static_cast<std::size_t>(n) +
           static_cast<std::size_t>(node);
  };

  double best_w = kInf;
  std::vector<int> best_cycle;  // node indices, starting at the root

  // Every directed differ-group loop is found exactly once, rooted at its
  // smallest node index; masks grow monotonically, so ascending mask order
  // processes states in dependency order.
  for (int root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), kInf);
    const std::uint32_t root_bit = std::uint32_t{1} << node_group[static_cast<std::size_t>(root)];
    dist[idx(root, root_bit)] = 0.0;
    for (std::uint32_t mask = root_bit; mask < n_masks; ++mask) {
      if (!(mask & root_bit)) continue;
      for (int i = root; i < n; ++i) {
        if (i != root &&
            !((mask >> node_group[static_cast<std::size_t>(i)]) & 1u))
          continue;
        const double di = dist[idx(i, mask)];
        if (!(di < kInf)) continue;
        if (i != root && g.has_edge(i, root)) {
          const double w = di + g.raw(i, root);
          if (w < best_w) {
            best_w = w;
            best_cycle.clear();
            int cur = i;
            std::uint32_t m = mask;
            while (cur != root) {
              best_cycle.push_back(cur);
              const int prev = parent[idx(cur, m)];
              m ^= std::uint32_t{1} << node_group[static_cast<std::size_t>(cur)];
              cur = prev;
            }
            best_cycle.push_back(root);
            std::reverse(best_cycle.begin(), best_cycle.end());
          }
        }
        for (int j = root + 1; j < n; ++j) {
          const std::uint32_t jb = std::uint32_t{1} << node_group[static_cast<std::size_t>(j)];
          if (mask & jb) continue;
          const double wij = g.raw(i, j);
          if (std::isnan(wij)) continue;
          const double nd = di + wij;
          double& slot = dist[idx(j, mask | jb)];
          if (nd < slot) {
            slot = nd;
            parent[idx(j, mask | jb)] = i;
          }
        }
      }
    }
  }

  if (!(best_w < -neg_eps_w)) return std::nullopt;
  DifferGroupLoop loop;
  loop.weight_w = best_w;
  loop.users.reserve(best_cycle.size());
  for (int node : best_cycle)
    loop.users.push_back(g.node_ids[static_cast<std::size_t>(node)]);
  return loop;
}

std::optional<DifferGroupLoop> find_loop_label_correcting(const GroupingGraph& g,
                                                          const ExtendedGrouping& eg,
                                                          double neg_eps_w) {
  const int n = g.size();
  const int G = eg.group_count;
  const auto node_group = zero_based_groups(g, eg);
  const int words = (G + 63) / 64;

  std::vector<double> m_dist(static_cast<std::size_t>(n), 0.0);  // super source
  std::vector<std::vector<int>> path(static_cast<std::size_t>(n));
  std::vector<std::uint64_t> mask(static_cast<std::size_t>(n) * static_cast<std::size_t>(words), 0);
  auto mask_test = [&](int node, int grp) {
    return (mask[static_cast<std::size_t>(node) * static_cast<std::size_t>(words) +
                 static_cast<std::size_t>(grp / 64)] >>
            (grp % 64)) &
           1u;
  };
  auto mask_set = [&](int node, int grp) {
    mask[static_cast<std::size_t>(node) * static_cast<std::size_t>(words) +
         static_cast<std::size_t>(grp / 64)] |= std::uint64_t{1} << (grp % 64);
  };
  for (int i = 0; i < n; ++i) mask_set(i, node_group[static_cast<std::size_t>(i)]);

  std::vector<int> walk;
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double wij = g.raw(i, j);
        if (std::isnan(wij)) continue;
        const double nd = m_dist[static_cast<std::size_t>(i)] + wij;
        if (!(nd < m_dist[static_cast<std::size_t>(j)])) continue;
        const int gj = node_group[static_cast<std::size_t>(j)];
        if (!mask_test(i, gj)) {
          auto& pj = path[static_cast<std::size_t>(j)];
          pj = path[static_cast<std::size_t>(i)];
          pj.push_back(i);
          std::copy_n(mask.begin() + static_cast<std::size_t>(i) * static_cast<std::size_t>(words),
                      static_cast<std::size_t>(words),
                      mask.begin() + static_cast<std::size_t>(j) * static_cast<std::size_t>(words));
          mask_set(j, gj);
          m_dist[static_cast<std::size_t>(j)] = nd;
          changed = true;
          continue;
        }
        // Some node on i's path already uses j's group. Only a revisit of j
        // itself closes a loop; the path is group-disjoint, so that node is
        // unique.
        walk = path[static_cast<std::size_t>(i)];
        walk.push_back(i);
        std::size_t pos = walk.size();
        for (std::size_t t = 0; t < walk.size(); ++t) {
          if (node_group[static_cast<std::size_t>(walk[t])] == gj) {
            pos = t;
            break;
          }
        }
        if (pos == walk.size() || walk[pos] != j) continue;
        double weight = 0.0;
        for (std::size_t t = pos; t + 1 < walk.size(); ++t)
          weight += g.raw(walk[t], walk[t + 1]);
        weight += wij;
        if (weight < -neg_eps_w) {
          DifferGroupLoop loop;
          loop.weight_w = weight;
          for (std::size_t t = pos; t < walk.size(); ++t)
            loop.users.push_back(g.node_ids[static_cast<std::size_t>(walk[t])]);
          return loop;
        }
      }
    }
    if (!changed) break;
  }
  return std::nullopt;
}

std::optional<DifferGroupLoop> find_loop_greedy(
    const GroupingGraph& g, const ExtendedGrouping& eg, double alpha,
    const std::unordered_set<int>& forbidden_start_ids, double neg_eps_w) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("find_loop_greedy: alpha must be positive and finite");
  const int n = g.size();
  const int G = eg.group_count;
  const auto node_group = zero_based_groups(g, eg);

  struct Edge {
    double w;
    int i, j;
  };
  std::vector<Edge> start_edges;
  std::vector<std::vector<std::pair<double, int>>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const bool start_ok =
        forbidden_start_ids.find(g.node_ids[static_cast<std::size_t>(i)]) ==
        forbidden_start_ids.end();
    auto& row = adj[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const double w = g.raw(i, j);
      if (std::isnan(w)) continue;
      row.emplace_back(w, j);
      if (start_ok) start_edges.push_back(Edge{w, i, j});
    }
    std::sort(row.begin(), row.end());
  }
  std::sort(start_edges.begin(), start_edges.end(), [](const Edge& a, const Edge& b) {
    if (a.w != b.w) return a.w < b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });

  const double restarts_d = std::ceil(alpha * static_cast<double>(n));
  const std::uint64_t restarts = static_cast<std::uint64_t>(restarts_d);

  double best_w = kInf;
  std::vector<int> best_nodes;
  std::vector<char> group_used(static_cast<std::size_t>(G));
  std::vector<int> trail;
  std::size_t cursor = 0;  // start edges are consumed in ascending order

  for (std::uint64_t r = 0; r < restarts && cursor < start_edges.size(); ++r) {
    const Edge start = start_edges[cursor++];
    std::fill(group_used.begin(), group_used.end(), 0);
    trail.assign({start.i, start.j});
    group_used[static_cast<std::size_t>(node_group[static_cast<std::size_t>(start.i)])] = 1;
    group_used[static_cast<std::size_t>(node_group[static_cast<std::size_t>(start.j)])] = 1;
    double prefix = start.w;
    // The closing edge back to the start exists at every prefix: all trail
    // members sit in pairwise distinct groups.
    double closed = prefix + g.raw(start.j, start.i);
    if (closed < best_w) {
      best_w = closed;
      best_nodes = trail;
    }
    int cur = start.j;
    for (int len = 3; len <= G; ++len) {
      int pick = -1;
      double pick_w = 0.0;
      for (const auto& [w, j] : adj[static_cast<std::size_t>(cur)]) {
        if (!group_used[static_cast<std::size_t>(node_group[static_cast<std::size_t>(j)])]) {
          pick = j;
          pick_w = w;
          break;
        }
      }
      if (pick < 0) break;
      prefix += pick_w;
      trail.push_back(pick);
      group_used[static_cast<std::size_t>(node_group[static_cast<std::size_t>(pick)])] = 1;
      closed = prefix + g.raw(pick, start.i);
      if (closed < best_w) {
        best_w = closed;
        best_nodes = trail;
      }
      cur = pick;
    }
  }

  if (!(best_w < -neg_eps_w)) return std::nullopt;
  DifferGroupLoop loop;
  loop.weight_w = best_w;
  loop.users.reserve(best_nodes.size());
  for (int node : best_nodes)
    loop.users.push_back(g.node_ids[static_cast<std::size_t>(node)]);
  return loop;
}

void for_each_differ_group_cycle(
    const GroupingGraph& g,
    const std::function<bool(std::span<const int>, double)>& visit,
    std::uint64_t work_cap) {
  const int n = g.size();
  // Absent edges are exactly the same-group pairs, so group classes can be
  // recovered from the adjacency pattern alone.
  std::vector<int> cls(static_cast<std::size_t>(n), -1);
  int n_cls = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) {
      if (!g.has_edge(i, k)) {
        cls[static_cast<std::size_t>(i)] = cls[static_cast<std::size_t>(k)];
        break;
      }
    }
    if (cls[static_cast<std::size_t>(i)] < 0) cls[static_cast<std::size_t>(i)] = n_cls++;
  }

  std::uint64_t work = 0;
  std::vector<char> used(static_cast<std::size_t>(n_cls));
  std::vector<int> path;
  std::vector<int> ids;
  bool stop = false;

  auto dfs = [&](auto&& self, int root, int cur, double prefix) -> void {
    if (stop) return;
    for (int j = root + 1; j < n; ++j) {
      if (stop) return;
      if (used[static_cast<std::size_t>(cls[static_cast<std::size_t>(j)])]) continue;
      if (!g.has_edge(cur, j)) continue;
      if (++work > work_cap)
        throw CapabilityError("for_each_differ_group_cycle: instance too large (work cap " +
                              std::to_string(work_cap) + " exceeded)");
      const double w = prefix + g.raw(cur, j);
      path.push_back(j);
      used[static_cast<std::size_t>(cls[static_cast<std::size_t>(j)])] = 1;
      if (g.has_edge(j, root)) {
        ids.clear();
        for (int node : path) ids.push_back(g.node_ids[static_cast<std::size_t>(node)]);
        if (!visit(std::span<const int>(ids), w + g.raw(j, root))) stop = true;
      }
      if (!stop) self(self, root, j, w);
      used[static_cast<std::size_t>(cls[static_cast<std::size_t>(j)])] = 0;
      path.pop_back();
    }
  };

  for (int root = 0; root < n && !stop; ++root) {
    path.assign({root});
    std::fill(used.begin(), used.end(), 0);
    used[static_cast<std::size_t>(cls[static_cast<std::size_t>(root)])] = 1;
    dfs(dfs, root, root, 0.0);
  }
}

bool is_all_stable(const Grouping& g, const Scenario& s, double neg_threshold,
                   std::uint64_t work_cap) {
  const auto eg = extend_with_virtuals(g, s);
  const auto graph = build_graph(eg, s);
  const double pt = allocate_all(g, s).total_w;
  const double eps = neg_threshold * std::max(1.0, pt);
  bool stable = true;
  for_each_differ_group_cycle(
      graph,
      [&](std::span<const int>, double w) {
        if (w < -eps) {
          stable = false;
          return false;
        }
        return true;
      },
      work_cap);
  return stable;
}

std::pair<Grouping, double> brute_force_optimum(const Scenario& s,
                                                std::uint64_t assignment_cap) {
  s.validate();
  const std::size_t n = s.users.size();
  const int G = s.group_count;
  std::uint64_t count = 1;
  for (std::size_t k = 0; k < n; ++k) {
    count *= static_cast<std::uint64_t>(G);
    if (count > assignment_cap)
      throw CapabilityError("brute_force_optimum: G^N exceeds the cap of " +
                            std::to_string(assignment_cap) + " assignments");
  }

  // Users ascending by id carry the assignment digits; the power recursion
  // walks them in SIC order with one running interference sum per group.
  std::vector<SicUser> id_order;
  id_order.reserve(n);
  for (const auto& u : s.users)
    id_order.push_back(SicUser{u.id, u.channel_gain_sq, u.target_rate});
  std::sort(id_order.begin(), id_order.end(),
            [](const SicUser& a, const SicUser& b) { return a.id < b.id; });
  std::vector<std::size_t> sic_idx(n);
  for (std::size_t k = 0; k < n; ++k) sic_idx[k] = k;
  std::sort(sic_idx.begin(), sic_idx.end(), [&](std::size_t a, std::size_t b) {
    return sic_precedes(id_order[a], id_order[b]);
  });
  std::vector<double> factor(n), base(n);
  for (std::size_t k = 0; k < n; ++k) {
    factor[k] = std::exp2(id_order[k].target_rate) - 1.0;
    base[k] = s.noise_power_w / id_order[k].channel_gain_sq;
  }

  std::vector<int> assign(n, 0);  // group - 1 per id-ordered user
  std::vector<int> best_assign;
  std::vector<double> cum(static_cast<std::size_t>(G));
  double best = kInf;
  while (true) {
    std::fill(cum.begin(), cum.end(), 0.0);
    double total = 0.0;
    for (std::size_t t : sic_idx) {
      const std::size_t gi = static_cast<std::size_t>(assign[t]);
      const double p = factor[t] * (base[t] + cum[gi]);
      cum[gi] += p;
      total += p;
    }
    if (total < best) {
      best = total;
      best_assign = assign;
    }
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++assign[k] < G) break;
      assign[k] = 0;
      if (k == 0) {
        k = n;  // odometer wrapped: done
        break;
      }
    }
    if (k == n) break;
  }

  Grouping g;
  for (std::size_t k = 0; k < n; ++k)
    g.assignment[id_order[k].id] = best_assign[k] + 1;
  return {g, allocate_all(g, s).total_w};
}

SolveReport solve(const Scenario& s, const SolverConfig& cfg) {
  s.validate();
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha))
    throw ConfigError("solver config: alpha must be positive and finite");
  if (!(cfg.neg_threshold >= 0.0) || !std::isfinite(cfg.neg_threshold))
    throw ConfigError("solver config: neg_threshold must be non-negative and finite");
  if (cfg.max_outer_iters < 1)
    throw ConfigError("solver config: max_outer_iters must be >= 1");
  if (cfg.exact_mode_group_cap < 1)
    throw ConfigError("solver config: exact_mode_group_cap must be >= 1");

  const auto t0 = std::chrono::steady_clock::now();
  const int N = static_cast<int>(s.users.size());
  const int G = s.group_count;
  const double alpha_eff =
      std::clamp(cfg.alpha, 1.0 / static_cast<double>(N + G), static_cast<double>(N));

  SolveReport rep;
  ExtendedGrouping eg = extend_with_virtuals(init_grouping(s), s);
  rep.power_trajectory_w.push_back(allocate_all(eg.base, s).total_w);
  std::unordered_set<int> forbidden_starts;

  bool stable = false;
  while (rep.iterations < cfg.max_outer_iters) {
    ++rep.iterations;
    const double pt = rep.power_trajectory_w.back();
    const double eps = cfg.neg_threshold * std::max(1.0, pt);
    const GroupingGraph graph = build_graph(eg, s);
    std::optional<DifferGroupLoop> loop;
    if (cfg.loop_finder == LoopFinder::bellman_ford) {
      if (G <= cfg.exact_mode_group_cap) {
        loop = find_loop_bellman_ford(graph, eg, eps, cfg.exact_mode_group_cap);
      } else {
        // Exact search is exponential in the group count; above the cap the
        // polynomial label-correcting finder runs instead, which cannot
        // certify stability.
        loop = find_loop_label_correcting(graph, eg, eps);
        if (rep.diagnostic.empty())
          rep.diagnostic =
              "group count above exact_mode_group_cap; used the label-correcting "
              "finder (no stability certificate)";
      }
    } else {
      loop = find_loop_greedy(graph, eg, alpha_eff, forbidden_starts, eps);
    }
    if (!loop) {
      stable = true;
      break;
    }
    eg = apply_cycle(*loop, eg);
    if (cfg.loop_finder == LoopFinder::greedy)
      forbidden_starts.insert(loop->users.front());
    ++rep.loops_applied;
    rep.power_trajectory_w.push_back(allocate_all(eg.base, s).total_w);
  }

  rep.stable = stable;
  if (!stable)
    rep.diagnostic = "stopped by max_outer_iters before the finder reported stability";
  rep.final_grouping = eg.base;
  rep.allocation = allocate_all(eg.base, s);
  rep.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace noma
