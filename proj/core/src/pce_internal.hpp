#pragma once

#include <span>

#include "noma/power.hpp"

namespace noma::internal {

/// PCE of `cand` joining the SIC-sorted `members` with the member whose id
/// equals `skip_id` removed (pass an id that does not occur to skip nobody).
/// This is the single evaluation path behind pce_of_candidate, move_delta
/// and build_graph, so per-move and per-edge values agree bit for bit.
double pce_skipping(std::span<const SicUser> members, int skip_id,
                    const SicUser& cand, double noise_power_w);

}  // namespace noma::internal
