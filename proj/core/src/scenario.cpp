#include "noma/scenario.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include "noma/errors.hpp"

namespace noma {

void ChannelModelParams::validate() const {
  auto bad = [](const std::string& what) { throw ConfigError("channel model: " + what); };
  if (!(cell_radius_m > 0.0) || !std::isfinite(cell_radius_m)) bad("cell_radius_m must be positive");
  if (!(min_distance_m > 0.0) || !std::isfinite(min_distance_m)) bad("min_distance_m must be positive");
  if (!(min_distance_m < cell_radius_m)) bad("min_distance_m must be below cell_radius_m");
  if (!std::isfinite(pathloss_const_db)) bad("pathloss_const_db must be finite");
  if (!std::isfinite(pathloss_slope_db)) bad("pathloss_slope_db must be finite");
  if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) bad("bandwidth_hz must be positive");
  if (!std::isfinite(noise_psd_dbm_hz)) bad("noise_psd_dbm_hz must be finite");
  if (!(rate_min_bps_hz > 0.0) || !std::isfinite(rate_min_bps_hz)) bad("rate_min_bps_hz must be positive");
  if (!(rate_max_bps_hz >= rate_min_bps_hz) || !std::isfinite(rate_max_bps_hz))
    bad("rate_max_bps_hz must be >= rate_min_bps_hz");
}

void Scenario::validate() const {
  params.validate();
  if (group_count < 1) throw ConfigError("scenario: group_count must be >= 1");
  if (!(noise_power_w > 0.0) || !std::isfinite(noise_power_w))
    throw ConfigError("scenario: noise_power_w must be positive");
  if (users.empty()) throw ConfigError("scenario: needs at least one user");
  std::set<int> seen;
  for (const auto& u : users) {
    if (u.is_virtual) throw ConfigError("scenario: user " + std::to_string(u.id) + " is virtual; scenarios hold real users only");
    if (!seen.insert(u.id).second)
      throw ConfigError("scenario: duplicate user id " + std::to_string(u.id));
    if (!(u.channel_gain_sq > 0.0) || !std::isfinite(u.channel_gain_sq))
      throw ConfigError("scenario: user " + std::to_string(u.id) + ": channel_gain_sq must be positive and finite");
    if (!(u.target_rate > 0.0) || !std::isfinite(u.target_rate))
      throw ConfigError("scenario: user " + std::to_string(u.id) + ": target_rate must be positive for real users");
    if (u.distance_m && !(*u.distance_m > 0.0))
      throw ConfigError("scenario: user " + std::to_string(u.id) + ": distance_m must be positive when present");
  }
}

const UserProfile& Scenario::user_by_id(int id) const {
  for (const auto& u : users)
    if (u.id == id) return u;
  throw DomainError("scenario: unknown user id " + std::to_string(id));
}

double noise_power(const ChannelModelParams& p) {
  return std::pow(10.0, (p.noise_psd_dbm_hz + 10.0 * std::log10(p.bandwidth_hz)) / 10.0) / 1000.0;
}

namespace {

// Top 53 bits mapped to the open interval (0,1); midpoints keep log() finite.
double uniform01(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Scenario generate_scenario(int n_users, int group_count, std::uint64_t seed,
                           const ChannelModelParams& params) {
  if (n_users < 1) throw ConfigError("generate_scenario: n_users must be >= 1");
  if (group_count < 1) throw ConfigError("generate_scenario: group_count must be >= 1");
  params.validate();

  Scenario s;
  s.group_count = group_count;
  s.seed = seed;
  s.params = params;
  s.noise_power_w = noise_power(params);
  s.users.reserve(static_cast<std::size_t>(n_users));

  std::mt19937_64 rng(seed);
  const double r2_min = params.min_distance_m * params.min_distance_m;
  const double r2_max = params.cell_radius_m * params.cell_radius_m;
  for (int id = 0; id < n_users; ++id) {
    const double u_dist = uniform01(rng);
    const double u_fade1 = uniform01(rng);
    const double u_fade2 = uniform01(rng);
    const double u_rate = uniform01(rng);

    const double d = std::sqrt(r2_min + u_dist * (r2_max - r2_min));
    const double mag = std::sqrt(-2.0 * std::log(u_fade1));
    const double z0 = mag * std::cos(2.0 * std::numbers::pi * u_fade2);
    const double z1 = mag * std::sin(2.0 * std::numbers::pi * u_fade2);
    const double fade = 0.5 * (z0 * z0 + z1 * z1);  // |beta|^2, unit mean
    const double pl_db = params.pathloss_const_db + params.pathloss_slope_db * std::log10(d / 1000.0);

    UserProfile u;
    u.id = id;
    u.distance_m = d;
    u.channel_gain_sq = std::pow(10.0, -pl_db / 10.0) * fade;
    u.target_rate = params.rate_min_bps_hz + u_rate * (params.rate_max_bps_hz - params.rate_min_bps_hz);
    s.users.push_back(u);
  }
  s.validate();
  return s;
}

}  // namespace noma
