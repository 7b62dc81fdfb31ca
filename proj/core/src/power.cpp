#include "noma/power.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noma/errors.hpp"
#include "pce_internal.hpp"

namespace noma {

namespace {

double rate_factor(double rate) {
  if (rate < 0.0 || !std::isfinite(rate))
    throw DomainError("target_rate must be finite and non-negative");
  return std::exp2(rate) - 1.0;
}

}  // namespace

double internal::pce_skipping(std::span<const SicUser> members, int skip_id,
                              const SicUser& cand, double noise_power_w) {
  const double f = rate_factor(cand.target_rate);
  if (f == 0.0) return 0.0;  // zero-demand candidate costs nothing
  if (cand.channel_gain_sq <= 0.0)
    throw DomainError("pce: demanding user " + std::to_string(cand.id) +
                      " has non-positive channel gain");
  double earlier_power = 0.0;
  double later_rate_product = 1.0;
  for (const auto& m : members) {
    if (m.id == skip_id) continue;
    if (sic_precedes(m, cand)) {
      const double fm = rate_factor(m.target_rate);
      if (fm != 0.0) {
        if (m.channel_gain_sq <= 0.0)
          throw DomainError("pce: demanding user " + std::to_string(m.id) +
                            " has non-positive channel gain");
        earlier_power += fm * (noise_power_w / m.channel_gain_sq + earlier_power);
      }
    } else {
      later_rate_product *= std::exp2(m.target_rate);
    }
  }
  return f * (earlier_power + noise_power_w / cand.channel_gain_sq) * later_rate_product;
}

bool is_sic_sorted(std::span<const SicUser> members) {
  for (std::size_t i = 1; i < members.size(); ++i)
    if (!sic_precedes(members[i - 1], members[i])) return false;
  return true;
}

void sic_sort(std::vector<SicUser>& members) {
  std::sort(members.begin(), members.end(), sic_precedes);
}

int Grouping::group_of(int user_id) const {
  auto it = assignment.find(user_id);
  if (it == assignment.end())
    throw DomainError("grouping: user " + std::to_string(user_id) + " is unassigned");
  return it->second;
}

std::vector<double> allocate_group_power(std::span<const SicUser> members,
                                         double noise_power_w) {
  if (!is_sic_sorted(members))
    throw ContractViolation("allocate_group_power: members not in SIC order");
  std::vector<double> powers;
  powers.reserve(members.size());
  double cum = 0.0;
  for (const auto& m : members) {
    const double f = rate_factor(m.target_rate);
    double p = 0.0;
    if (f != 0.0) {
      if (m.channel_gain_sq <= 0.0)
        throw DomainError("allocate_group_power: demanding user " +
                          std::to_string(m.id) + " has non-positive channel gain");
      p = f * (noise_power_w / m.channel_gain_sq + cum);
    }
    powers.push_back(p);
    cum += p;
  }
  return powers;
}

std::vector<std::vector<SicUser>> grouped_members(const Grouping& g,
                                                  const Scenario& s) {
  std::vector<std::vector<SicUser>> groups(static_cast<std::size_t>(s.group_count));
  for (const auto& u : s.users) {
    const int gi = g.group_of(u.id);
    if (gi < 1 || gi > s.group_count)
      throw DomainError("grouping: user " + std::to_string(u.id) + " in group " +
                        std::to_string(gi) + ", valid range is [1.." +
                        std::to_string(s.group_count) + "]");
    groups[static_cast<std::size_t>(gi - 1)].push_back(
        SicUser{u.id, u.channel_gain_sq, u.target_rate});
  }
  for (auto& members : groups) sic_sort(members);
  return groups;
}

PowerAllocation allocate_all(const Grouping& g, const Scenario& s) {
  if (g.assignment.size() != s.users.size())
    throw ConsistencyError("allocate_all: grouping covers " +
                           std::to_string(g.assignment.size()) + " users, scenario has " +
                           std::to_string(s.users.size()));
  for (const auto& [id, group] : g.assignment) {
    (void)group;
    try {
      s.user_by_id(id);
    } catch (const DomainError&) {
      throw ConsistencyError("allocate_all: grouping assigns user " +
                             std::to_string(id) + " that the scenario does not contain");
    }
  }
  PowerAllocation out;
  const auto groups = grouped_members(g, s);
  double total = 0.0;
  for (int gi = 1; gi <= s.group_count; ++gi) {
    const auto& members = groups[static_cast<std::size_t>(gi - 1)];
    const auto powers = allocate_group_power(members, s.noise_power_w);
    double group_total = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.power_w[members[i].id] = powers[i];
      group_total += powers[i];
    }
    out.per_group_total_w[gi] = group_total;
    total += group_total;
  }
  out.total_w = total;
  return out;
}

double achievable_rate(int user_id, const Grouping& g, const PowerAllocation& a,
                       const Scenario& s) {
  const UserProfile& u = s.user_by_id(user_id);
  const int gi = g.group_of(user_id);
  const auto groups = grouped_members(g, s);
  const auto& members = groups[static_cast<std::size_t>(gi - 1)];
  const SicUser self{u.id, u.channel_gain_sq, u.target_rate};
  double interference = 0.0;
  for (const auto& m : members) {
    if (m.id == user_id) break;
    if (sic_precedes(m, self)) interference += a.power_w.at(m.id);
  }
  const double p = a.power_w.at(user_id);
  return std::log2(1.0 + u.channel_gain_sq * p /
                             (u.channel_gain_sq * interference + s.noise_power_w));
}

double externality_pair(std::size_t k, std::size_t j,
                        std::span<const SicUser> members,
                        std::span<const double> powers_w) {
  if (k < 1 || j <= k || j > members.size())
    throw ContractViolation("externality_pair: need 1 <= k < j <= group size");
  if (powers_w.size() != members.size())
    throw ContractViolation("externality_pair: powers/members size mismatch");
  const double pk = powers_w[k - 1];
  const double f = rate_factor(members[j - 1].target_rate);
  double between = 1.0;
  for (std::size_t i = k + 1; i < j; ++i)
    between *= std::exp2(members[i - 1].target_rate);
  return pk * f * between;
}

double externality_sum(std::size_t k, std::span<const SicUser> members,
                       std::span<const double> powers_w) {
  if (k < 1 || k > members.size())
    throw ContractViolation("externality_sum: position out of range");
  if (powers_w.size() != members.size())
    throw ContractViolation("externality_sum: powers/members size mismatch");
  const double pk = powers_w[k - 1];
  double later = 1.0;
  for (std::size_t j = k + 1; j <= members.size(); ++j)
    later *= std::exp2(members[j - 1].target_rate);
  return pk * later - pk;
}

double pce_of_candidate(std::span<const SicUser> members, const SicUser& candidate,
                        double noise_power_w) {
  if (!is_sic_sorted(members))
    throw ContractViolation("pce_of_candidate: members not in SIC order");
  for (const auto& m : members)
    if (m.id == candidate.id)
      throw ContractViolation("pce_of_candidate: candidate " +
                              std::to_string(candidate.id) + " already in group");
  return internal::pce_skipping(members, candidate.id, candidate, noise_power_w);
}

double pce(int user_id, int target_group, const Grouping& others, const Scenario& s) {
  if (target_group < 1 || target_group > s.group_count)
    throw DomainError("pce: group index " + std::to_string(target_group) +
                      " outside [1.." + std::to_string(s.group_count) + "]");
  const UserProfile& u = s.user_by_id(user_id);
  std::vector<SicUser> members;
  for (const auto& [id, group] : others.assignment) {
    if (id == user_id || group != target_group) continue;
    const UserProfile& m = s.user_by_id(id);
    members.push_back(SicUser{m.id, m.channel_gain_sq, m.target_rate});
  }
  sic_sort(members);
  return pce_of_candidate(members, SicUser{u.id, u.channel_gain_sq, u.target_rate},
                          s.noise_power_w);
}

double group_power_without(int user_id, const Grouping& g, const Scenario& s) {
  const int gi = g.group_of(user_id);
  std::vector<SicUser> members;
  for (const auto& [id, group] : g.assignment) {
    if (id == user_id || group != gi) continue;
    const UserProfile& m = s.user_by_id(id);
    members.push_back(SicUser{m.id, m.channel_gain_sq, m.target_rate});
  }
  sic_sort(members);
  const auto powers = allocate_group_power(members, s.noise_power_w);
  double total = 0.0;
  for (double p : powers) total += p;
  return total;
}

}  // namespace noma
