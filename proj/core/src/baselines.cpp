#include "noma/baselines.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "noma/errors.hpp"
#include "pce_internal.hpp"

namespace noma {

namespace {

constexpr int kNoSkip = std::numeric_limits<int>::min();

int quota_or_throw(const Scenario& s, const char* op) {
  const int n = static_cast<int>(s.users.size());
  if (n % s.group_count != 0)
    throw ConfigError(std::string(op) + ": " + std::to_string(n) +
                      " users cannot be split evenly across " +
                      std::to_string(s.group_count) + " groups");
  return n / s.group_count;
}

std::vector<SicUser> sic_ordered_users(const Scenario& s) {
  std::vector<SicUser> order;
  order.reserve(s.users.size());
  for (const auto& u : s.users)
    order.push_back(SicUser{u.id, u.channel_gain_sq, u.target_rate});
  std::sort(order.begin(), order.end(), sic_precedes);
  return order;
}

void insert_sic_sorted(std::vector<SicUser>& members, const SicUser& u) {
  members.insert(std::upper_bound(members.begin(), members.end(), u, sic_precedes), u);
}

}  // namespace

double gain_distance_affinity(const SicUser& candidate, std::span<const SicUser> held) {
  if (held.empty()) return 0.0;
  double mean = 0.0;
  for (const auto& m : held) mean += m.channel_gain_sq;
  mean /= static_cast<double>(held.size());
  return std::abs(candidate.channel_gain_sq - mean);
}

std::pair<Grouping, PowerAllocation> baseline_user_preference(const Scenario& s) {
  s.validate();
  const int quota = quota_or_throw(s, "baseline_user_preference");
  const int G = s.group_count;

  std::vector<std::vector<SicUser>> members(static_cast<std::size_t>(G));
  Grouping g;
  for (const auto& u : sic_ordered_users(s)) {
    int best_group = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int gi = 1; gi <= G; ++gi) {
      const auto& m = members[static_cast<std::size_t>(gi - 1)];
      if (static_cast<int>(m.size()) >= quota) continue;
      const double cost = internal::pce_skipping(m, kNoSkip, u, s.noise_power_w);
      if (cost < best_cost) {
        best_cost = cost;
        best_group = gi;
      }
    }
    // quota * G == N, so a free slot always exists
    g.assignment[u.id] = best_group;
    insert_sic_sorted(members[static_cast<std::size_t>(best_group - 1)], u);
  }
  return {g, allocate_all(g, s)};
}

std::pair<Grouping, PowerAllocation> baseline_gale_shapley(const Scenario& s,
                                                           const GroupAffinity& affinity) {
  s.validate();
  const int quota = quota_or_throw(s, "baseline_gale_shapley");
  const int G = s.group_count;
  const auto users = sic_ordered_users(s);
  const int n = static_cast<int>(users.size());

  // rejected[k] marks groups that turned user k down; a rejected pair never
  // re-proposes, which bounds the rounds
  std::vector<std::vector<char>> rejected(static_cast<std::size_t>(n),
                                          std::vector<char>(static_cast<std::size_t>(G), 0));
  std::vector<std::vector<int>> held(static_cast<std::size_t>(G));  // indices into users
  std::vector<int> unmatched(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) unmatched[static_cast<std::size_t>(k)] = k;
  std::sort(unmatched.begin(), unmatched.end(),
            [&](int a, int b) { return users[static_cast<std::size_t>(a)].id <
                                       users[static_cast<std::size_t>(b)].id; });

  std::vector<std::vector<SicUser>> held_pre(static_cast<std::size_t>(G));
  const int round_cap = n * G + 1;
  for (int round = 0; round < round_cap && !unmatched.empty(); ++round) {
    for (int gi = 0; gi < G; ++gi) {
      auto& snap = held_pre[static_cast<std::size_t>(gi)];
      snap.clear();
      for (int k : held[static_cast<std::size_t>(gi)]) snap.push_back(users[static_cast<std::size_t>(k)]);
      std::sort(snap.begin(), snap.end(), sic_precedes);
    }

    std::vector<std::vector<int>> pool(static_cast<std::size_t>(G));
    for (int gi = 0; gi < G; ++gi) pool[static_cast<std::size_t>(gi)] = held[static_cast<std::size_t>(gi)];
    for (int k : unmatched) {
      const auto& u = users[static_cast<std::size_t>(k)];
      int best_group = -1;
      double best_cost = std::numeric_limits<double>::infinity();
      for (int gi = 1; gi <= G; ++gi) {
        if (rejected[static_cast<std::size_t>(k)][static_cast<std::size_t>(gi - 1)]) continue;
        const double cost =
            internal::pce_skipping(held_pre[static_cast<std::size_t>(gi - 1)], kNoSkip, u,
                                   s.noise_power_w);
        if (cost < best_cost) {
          best_cost = cost;
          best_group = gi;
        }
      }
      if (best_group < 0)
        throw ConsistencyError("baseline_gale_shapley: user " + std::to_string(u.id) +
                               " was rejected by every group");
      pool[static_cast<std::size_t>(best_group - 1)].push_back(k);
    }

    std::vector<int> next_unmatched;
    for (int gi = 0; gi < G; ++gi) {
      auto& cand = pool[static_cast<std::size_t>(gi)];
      if (static_cast<int>(cand.size()) > quota) {
        std::vector<SicUser> ref;  // held snapshot minus the candidate itself
        auto score = [&](int k) {
          const auto& u = users[static_cast<std::size_t>(k)];
          ref.clear();
          for (const auto& m : held_pre[static_cast<std::size_t>(gi)])
            if (m.id != u.id) ref.push_back(m);
          return affinity(u, ref);
        };
        std::sort(cand.begin(), cand.end(), [&](int a, int b) {
          const double sa = score(a);
          const double sb = score(b);
          if (sa != sb) return sa < sb;
          return users[static_cast<std::size_t>(a)].id < users[static_cast<std::size_t>(b)].id;
        });
        for (std::size_t t = static_cast<std::size_t>(quota); t < cand.size(); ++t) {
          rejected[static_cast<std::size_t>(cand[t])][static_cast<std::size_t>(gi)] = 1;
          next_unmatched.push_back(cand[t]);
        }
        cand.resize(static_cast<std::size_t>(quota));
      }
      held[static_cast<std::size_t>(gi)] = cand;
    }
    std::sort(next_unmatched.begin(), next_unmatched.end(), [&](int a, int b) {
      return users[static_cast<std::size_t>(a)].id < users[static_cast<std::size_t>(b)].id;
    });
    unmatched = std::move(next_unmatched);
  }
  if (!unmatched.empty())
    throw ConsistencyError("baseline_gale_shapley: matching did not terminate");

  Grouping g;
  for (int gi = 0; gi < G; ++gi)
    for (int k : held[static_cast<std::size_t>(gi)])
      g.assignment[users[static_cast<std::size_t>(k)].id] = gi + 1;
  return {g, allocate_all(g, s)};
}

}  // namespace noma
