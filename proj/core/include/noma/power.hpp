#pragma once

#include <map>
#include <span>
#include <vector>

#include "noma/scenario.hpp"

namespace noma {

/// One participant of a SIC decoding chain: exactly what the power
/// recursion needs to know.
struct SicUser {
  int id = 0;
  double channel_gain_sq = 0.0;  // 0 only for virtual placeholders
  double target_rate = 0.0;      // bps/Hz; 0 marks a zero-demand placeholder
};

/// Strict decoding order: better channel first, ties by ascending id.
/// Every formula below sums over "users decoded earlier", so the order must
/// be total even when gains collide.
inline bool sic_precedes(const SicUser& a, const SicUser& b) {
  if (a.channel_gain_sq != b.channel_gain_sq)
    return a.channel_gain_sq > b.channel_gain_sq;
  return a.id < b.id;
}

bool is_sic_sorted(std::span<const SicUser> members);
void sic_sort(std::vector<SicUser>& members);

/// Partition of the real users into groups 1..G.
struct Grouping {
  std::map<int, int> assignment;  // user id -> group index in [1..G]

  /// Throws DomainError if the id is unassigned.
  int group_of(int user_id) const;

  bool operator==(const Grouping&) const = default;
};

struct PowerAllocation {
  std::map<int, double> power_w;            // per user
  std::map<int, double> per_group_total_w;  // per group, empty groups at 0
  double total_w = 0.0;
};

/// Minimal per-user transmit powers for one group under in-group SIC, in
/// member order. Every member exactly meets its target rate: a member's
/// power is (2^r - 1) * (noise / gain + sum of all earlier powers).
/// Members with target_rate 0 draw exactly 0 W.
/// Throws ContractViolation if `members` is not in SIC order, DomainError on
/// a non-positive gain (for a demanding member) or a negative rate.
std::vector<double> allocate_group_power(std::span<const SicUser> members,
                                         double noise_power_w);

/// SIC-ordered member lists, indexed by group-1.
std::vector<std::vector<SicUser>> grouped_members(const Grouping& g,
                                                  const Scenario& s);

/// Group-by-group minimal allocation for a full partition.
/// Throws ConsistencyError when the grouping and the scenario disagree on
/// the user set, DomainError on a group index outside [1..G].
PowerAllocation allocate_all(const Grouping& g, const Scenario& s);

/// Rate user n actually reaches under allocation `a`:
/// log2(1 + gain * p_n / (gain * interference + noise)) where interference
/// is the summed power of same-group users decoded after n (better channel).
double achievable_rate(int user_id, const Grouping& g,
                       const PowerAllocation& a, const Scenario& s);

/// Extra power the k-th member of a SIC-ordered group forces onto the j-th
/// (1-based positions, k < j):
///   j == k+1: p_k * (2^{r_j} - 1)
///   j >  k+1: p_k * (2^{r_j} - 1) * prod_{k<i<j} 2^{r_i}
double externality_pair(std::size_t k, std::size_t j,
                        std::span<const SicUser> members,
                        std::span<const double> powers_w);

/// Closed-form total of externality_pair(k, j) over all j > k:
/// p_k * prod_{j>k} 2^{r_j} - p_k. Zero for the last member.
double externality_sum(std::size_t k, std::span<const SicUser> members,
                       std::span<const double> powers_w);

/// Power cost and externality (PCE) of `candidate` hypothetically joining
/// the SIC-ordered group `members` (which must not contain it): the
/// candidate's own minimal power plus the extra power it forces onto every
/// member decoded after it,
///   (2^r - 1) * (sum of earlier powers + noise / gain) * prod_later 2^{r_i}.
/// Equals the group's total power with the candidate minus without it.
double pce_of_candidate(std::span<const SicUser> members,
                        const SicUser& candidate, double noise_power_w);

/// PCE of user n inserted into `target_group` with everyone else assigned
/// per `others`; any existing assignment of n itself is ignored.
/// Throws DomainError on an unknown user or a group index outside [1..G].
double pce(int user_id, int target_group, const Grouping& others,
           const Scenario& s);

/// Total power of n's group after n is removed, other members unchanged.
/// Throws DomainError if n has no group in `g`.
double group_power_without(int user_id, const Grouping& g, const Scenario& s);

}  // namespace noma
