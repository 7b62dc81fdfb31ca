#pragma once

// Hand-built fixtures shared by the unit tests. Noise defaults to 1 W so the
// expected powers stay exact in binary floating point.

#include <initializer_list>

#include "noma/power.hpp"
#include "noma/scenario.hpp"

namespace helpers {

struct HandUser {
  int id;
  double gain;
  double rate;
};

inline noma::Scenario hand_scenario(std::initializer_list<HandUser> users, int groups,
                                    double noise = 1.0) {
  noma::Scenario s;
  s.group_count = groups;
  s.noise_power_w = noise;
  s.seed = 0;
  for (const auto& u : users) {
    noma::UserProfile p;
    p.id = u.id;
    p.channel_gain_sq = u.gain;
    p.target_rate = u.rate;
    s.users.push_back(p);
  }
  return s;
}

inline noma::Grouping grouping(std::initializer_list<std::pair<const int, int>> assign) {
  noma::Grouping g;
  g.assignment = std::map<int, int>(assign);
  return g;
}

}  // namespace helpers
