#pragma once

// Reference grouping strategies used as comparison points for the loop
// solvers. Both assume equal group sizes (N divisible by G) and fill every
// group to exactly N/G users.

#include <functional>
#include <span>
#include <utility>

#include "noma/power.hpp"
#include "noma/scenario.hpp"

namespace noma {

// Group-side ranking hook for baseline_gale_shapley. Receives a candidate and
// the group's held members from the start of the round (candidate excluded).
// Lower score = more preferred; ties resolve by ascending user id.
using GroupAffinity =
    std::function<double(const SicUser& candidate, std::span<const SicUser> held)>;

// Default affinity: absolute distance between the candidate's channel gain
// and the mean gain of the held members (0 when no members are held yet), so
// groups prefer users that resemble their current population.
double gain_distance_affinity(const SicUser& candidate, std::span<const SicUser> held);

// Greedy list assignment: users in descending channel-gain order each join the
// cheapest (lowest PCE against the group's current members) group that still
// has a free slot. Capacity is N/G per group.
//
// Throws ConfigError when N is not divisible by G.
std::pair<Grouping, PowerAllocation> baseline_user_preference(const Scenario& s);

// Deferred acceptance between users and capacity-N/G groups. Unmatched users
// propose each round to their cheapest group (ascending PCE against the
// group's held members at the start of the round) that has not rejected them;
// each group keeps the N/G best proposals-plus-holds under `affinity` and
// rejects the rest. Terminates with a full matching.
//
// Throws ConfigError when N is not divisible by G, ConsistencyError if the
// matching fails to terminate (cannot happen with consistent inputs).
std::pair<Grouping, PowerAllocation> baseline_gale_shapley(
    const Scenario& s, const GroupAffinity& affinity = gain_distance_affinity);

}  // namespace noma
