#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "noma/errors.hpp"
#include "noma/numeric.hpp"
#include "noma/power.hpp"
#include "noma/scenario.hpp"

using namespace noma;
using helpers::grouping;
using helpers::hand_scenario;

namespace {

// |a - b| within rel of the larger magnitude, with `scale` as the floor for
// identities whose true value can be near zero on a much larger instance
bool close_rel(double a, double b, double rel, double scale = 0.0) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), scale});
}

// independent oracle: solve the rate equation for the minimal power by
// bisection instead of the closed form
double bisect_power(double gain, double rate, double interference, double noise) {
  auto achieved = [&](double p) {
    return std::log2(1.0 + gain * p / (gain * interference + noise));
  };
  double lo = 0.0, hi = 1.0;
  while (achieved(hi) < rate) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (achieved(mid) < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<SicUser> sic_members(const Scenario& s, const Grouping& g, int group) {
  std::vector<SicUser> m;
  for (const auto& u : s.users)
    if (g.group_of(u.id) == group)
      m.push_back(SicUser{u.id, u.channel_gain_sq, u.target_rate});
  sic_sort(m);
  return m;
}

Grouping random_grouping(const Scenario& s, std::mt19937& rng) {
  Grouping g;
  std::uniform_int_distribution<int> pick(1, s.group_count);
  for (const auto& u : s.users) g.assignment[u.id] = pick(rng);
  return g;
}

}  // namespace

TEST_CASE("SIC order sorts by descending gain, then ascending id") {
  std::vector<SicUser> v{{2, 1.0, 1.0}, {0, 4.0, 1.0}, {3, 4.0, 2.0}, {1, 9.0, 1.0}};
  CHECK_FALSE(is_sic_sorted(v));
  sic_sort(v);
  REQUIRE(is_sic_sorted(v));
  CHECK(v[0].id == 1);
  CHECK(v[1].id == 0);  // gain tie 4.0: lower id first
  CHECK(v[2].id == 3);
  CHECK(v[3].id == 2);
}

TEST_CASE("two-user group allocation matches the frozen closed form") {
  // gains 4 and 1, both rate 1, noise 1: p1 = 1/4, p2 = (1 + 1/4)
  std::vector<SicUser> m{{1, 4.0, 1.0}, {2, 1.0, 1.0}};
  const auto p = allocate_group_power(m, 1.0);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 1.25);

  CHECK_THROWS_AS(
      allocate_group_power(std::vector<SicUser>{{2, 1.0, 1.0}, {1, 4.0, 1.0}}, 1.0),
      ContractViolation);
}

TEST_CASE("zero-rate members draw zero power even with zero gain") {
  std::vector<SicUser> m{{0, 4.0, 1.0}, {9, 0.0, 0.0}};  // virtual-style trailer
  const auto p = allocate_group_power(m, 1.0);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.0);

  // a demanding user with no channel is infeasible
  std::vector<SicUser> bad{{0, 4.0, 1.0}, {9, 0.0, 0.5}};
  CHECK_THROWS_AS(allocate_group_power(bad, 1.0), DomainError);
  std::vector<SicUser> neg{{0, 4.0, -1.0}};
  CHECK_THROWS_AS(allocate_group_power(neg, 1.0), DomainError);
}

TEST_CASE("closed-form allocation agrees with a bisection oracle") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario s = generate_scenario(8, 2, 1000 + trial);
    const Grouping g = random_grouping(s, rng);
    const PowerAllocation alloc = allocate_all(g, s);
    for (int gi = 1; gi <= s.group_count; ++gi) {
      const auto members = sic_members(s, g, gi);
      double interference = 0.0;
      for (const auto& m : members) {
        const double have = alloc.power_w.at(m.id);
        const double want = bisect_power(m.channel_gain_sq, m.target_rate,
                                         interference, s.noise_power_w);
        CAPTURE(trial);
        CAPTURE(m.id);
        CHECK(close_rel(have, want, 1e-9));
        interference += have;
      }
    }
  }
}

TEST_CASE("achievable rate closes on the target for every user") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario s = generate_scenario(10, 3, 2000 + trial);
    const Grouping g = random_grouping(s, rng);
    const PowerAllocation alloc = allocate_all(g, s);
    for (const auto& u : s.users) {
      const double r = achievable_rate(u.id, g, alloc, s);
      CHECK(close_rel(r, u.target_rate, 1e-9));
    }
  }
}

TEST_CASE("allocate_all bookkeeping") {
  const Scenario s = hand_scenario({{0, 16.0, 2.0}, {1, 4.0, 1.0}, {2, 1.0, 1.0}}, 3);
  const Grouping g = grouping({{0, 1}, {1, 1}, {2, 3}});
  const PowerAllocation a = allocate_all(g, s);

  // group 1: p0 = 3/16, p1 = 1*(1/4 + 3/16); group 3: p2 = 1
  CHECK(a.power_w.at(0) == 3.0 / 16.0);
  CHECK(a.power_w.at(1) == 0.25 + 3.0 / 16.0);
  CHECK(a.power_w.at(2) == 1.0);
  CHECK(a.per_group_total_w.at(1) == 3.0 / 16.0 + 0.25 + 3.0 / 16.0);
  CHECK(a.per_group_total_w.at(2) == 0.0);  // empty groups report zero
  CHECK(a.per_group_total_w.at(3) == 1.0);
  double sum = 0.0;
  for (const auto& [gi, p] : a.per_group_total_w) sum += p;
  CHECK(a.total_w == doctest::Approx(sum).epsilon(1e-15));

  Grouping missing = grouping({{0, 1}, {1, 1}});
  CHECK_THROWS_AS(allocate_all(missing, s), ConsistencyError);
  Grouping unknown = grouping({{0, 1}, {1, 1}, {7, 2}});
  CHECK_THROWS_AS(allocate_all(unknown, s), ConsistencyError);
  Grouping range = grouping({{0, 1}, {1, 1}, {2, 4}});
  CHECK_THROWS_AS(allocate_all(range, s), DomainError);
}

TEST_CASE("externalities: frozen three-user fixture") {
  // gains 4,2,1, all rate 1, noise 1: powers 0.25, 0.75, 2.0
  std::vector<SicUser> m{{1, 4.0, 1.0}, {2, 2.0, 1.0}, {3, 1.0, 1.0}};
  const auto p = allocate_group_power(m, 1.0);
  REQUIRE(p.size() == 3);
  CHECK(p[0] == 0.25);
  CHECK(p[1] == 0.75);
  CHECK(p[2] == 2.0);

  // adjacent: eps(1,2) = p1 * f2; skipping: eps(1,3) = p1 * f3 * 2^{r2}
  CHECK(externality_pair(1, 2, m, p) == 0.25);
  CHECK(externality_pair(1, 3, m, p) == 0.5);
  CHECK(externality_pair(2, 3, m, p) == 0.75);
  CHECK(externality_sum(1, m, p) == 0.75);  // p1 * (2^{r2+r3} - 1)
  CHECK(externality_sum(2, m, p) == 0.75);
  CHECK(externality_sum(3, m, p) == 0.0);  // last user harms nobody

  CHECK_THROWS_AS(externality_pair(2, 2, m, p), ContractViolation);
  CHECK_THROWS_AS(externality_pair(2, 1, m, p), ContractViolation);
  CHECK_THROWS_AS(externality_pair(0, 2, m, p), ContractViolation);
  CHECK_THROWS_AS(externality_pair(2, 4, m, p), ContractViolation);
  const std::vector<double> short_p{0.25};
  CHECK_THROWS_AS(externality_sum(1, m, short_p), ContractViolation);
}

TEST_CASE("externality closure: pairwise sum equals the closed form and the group recompute") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);  // group size 2..8
    const Scenario s = generate_scenario(n, 1, 3000 + trial);
    Grouping g;
    for (const auto& u : s.users) g.assignment[u.id] = 1;
    const auto members = sic_members(s, g, 1);
    const auto p = allocate_group_power(members, s.noise_power_w);
    const double group_total = std::accumulate(p.begin(), p.end(), 0.0);
    for (int k = 1; k <= n; ++k) {
      double pair_sum = 0.0;
      for (int j = k + 1; j <= n; ++j) pair_sum += externality_pair(k, j, members, p);
      const double closed = externality_sum(k, members, p);
      CHECK(close_rel(closed, pair_sum, 1e-12, group_total * 1e-6));

      // recompute oracle: E_k = P(with k) - P(without k) - p_k
      const double without =
          group_power_without(members[static_cast<std::size_t>(k - 1)].id, g, s);
      const double via_power = group_total - without - p[static_cast<std::size_t>(k - 1)];
      CHECK(close_rel(closed, via_power, 1e-9, group_total * 1e-6));
    }
  }
}

TEST_CASE("PCE: frozen two-user fixture and zero-rate candidates") {
  const Scenario s = hand_scenario({{1, 4.0, 1.0}, {2, 1.0, 1.0}}, 1);
  const Grouping others = grouping({{2, 1}});
  // joining {user2}: own power 0.25, externality 0.25
  CHECK(pce(1, 1, others, s) == 0.5);

  // zero-rate candidate costs nothing anywhere
  std::vector<SicUser> members{{1, 4.0, 1.0}, {2, 1.0, 1.0}};
  sic_sort(members);
  const SicUser virt{9, 0.0, 0.0};
  CHECK(pce_of_candidate(members, virt, 1.0) == 0.0);

  CHECK_THROWS_AS(pce(1, 0, others, s), DomainError);
  CHECK_THROWS_AS(pce(1, 2, others, s), DomainError);
}

TEST_CASE("PCE identity: cost equals the group power delta") {
  std::mt19937 rng(14);
  for (int trial = 0; trial < 60; ++trial) {
    const Scenario s = generate_scenario(9, 3, 4000 + trial);
    const Grouping full = random_grouping(s, rng);
    for (const auto& u : s.users) {
      Grouping others = full;
      others.assignment.erase(u.id);
      for (int gi = 1; gi <= s.group_count; ++gi) {
        Grouping with = others;
        with.assignment[u.id] = gi;
        const PowerAllocation a_with = allocate_all(with, s);
        const double p_without = group_power_without(u.id, with, s);
        const double delta = a_with.per_group_total_w.at(gi) - p_without;
        const double cost = pce(u.id, gi, others, s);
        CAPTURE(trial);
        CAPTURE(u.id);
        CAPTURE(gi);
        CHECK(close_rel(cost, delta, 1e-9, a_with.total_w * 1e-6));
      }
    }
  }
}

TEST_CASE("single-move identity: total power delta equals the PCE delta") {
  std::mt19937 rng(15);
  for (int trial = 0; trial < 60; ++trial) {
    const Scenario s = generate_scenario(8 + static_cast<int>(rng() % 5), 3, 5000 + trial);
    const Grouping from = random_grouping(s, rng);
    const double p_from = allocate_all(from, s).total_w;
    for (const auto& u : s.users) {
      const int gi = from.group_of(u.id);
      Grouping others = from;
      others.assignment.erase(u.id);
      for (int gj = 1; gj <= s.group_count; ++gj) {
        if (gj == gi) continue;
        Grouping to = from;
        to.assignment[u.id] = gj;
        const double p_to = allocate_all(to, s).total_w;
        const double pce_delta = pce(u.id, gj, others, s) - pce(u.id, gi, others, s);
        CHECK(close_rel(p_to - p_from, pce_delta, 1e-9, p_from * 1e-6));
      }
    }
  }
}

TEST_CASE("PCE is at least the standalone power") {
  std::mt19937 rng(16);
  for (int trial = 0; trial < 40; ++trial) {
    const Scenario s = generate_scenario(6, 2, 6000 + trial);
    const Grouping g = random_grouping(s, rng);
    for (const auto& u : s.users) {
      Grouping others = g;
      others.assignment.erase(u.id);
      const double standalone =
          (std::exp2(u.target_rate) - 1.0) * s.noise_power_w / u.channel_gain_sq;
      for (int gi = 1; gi <= s.group_count; ++gi)
        CHECK(pce(u.id, gi, others, s) >= standalone * (1.0 - 1e-12));
    }
  }
}

TEST_CASE("pce_of_candidate rejects malformed calls") {
  std::vector<SicUser> unsorted{{2, 1.0, 1.0}, {1, 4.0, 1.0}};
  CHECK_THROWS_AS(pce_of_candidate(unsorted, SicUser{3, 2.0, 1.0}, 1.0),
                  ContractViolation);
  std::vector<SicUser> m{{1, 4.0, 1.0}};
  CHECK_THROWS_AS(pce_of_candidate(m, SicUser{1, 4.0, 1.0}, 1.0), ContractViolation);
}
