#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace noma {

/// Physical-layer constants of the simulated single cell.
struct ChannelModelParams {
  double cell_radius_m = 500.0;
  double min_distance_m = 35.0;
  double pathloss_const_db = 128.1;  // fixed term of the distance law
  double pathloss_slope_db = 37.6;   // dB per decade of distance in km
  double bandwidth_hz = 180e3;
  double noise_psd_dbm_hz = -174.0;
  double rate_min_bps_hz = 0.5;
  double rate_max_bps_hz = 8.0;

  /// Throws ConfigError on non-physical values.
  void validate() const;

  bool operator==(const ChannelModelParams&) const = default;
};

struct UserProfile {
  int id = 0;
  /// Metadata only; absent for hand-built users.
  std::optional<double> distance_m;
  /// |h|^2, dimensionless linear power gain. Strictly positive for real
  /// users; exactly 0 for virtual placeholders.
  double channel_gain_sq = 0.0;
  /// Demanded rate in bps/Hz. Exactly 0 iff the user is virtual.
  double target_rate = 0.0;
  bool is_virtual = false;

  bool operator==(const UserProfile&) const = default;
};

/// One problem instance: the real users, the group budget and the noise
/// power. Treated as immutable once built.
struct Scenario {
  std::vector<UserProfile> users;  // real users only
  int group_count = 1;
  double noise_power_w = 0.0;
  std::uint64_t seed = 0;
  ChannelModelParams params;

  /// Throws ConfigError on duplicate ids, non-positive gains/rates/noise.
  void validate() const;

  /// Throws DomainError if the id is unknown.
  const UserProfile& user_by_id(int id) const;

  bool operator==(const Scenario&) const = default;
};

/// Noise power sigma^2 = bandwidth * noise PSD, in linear watts.
double noise_power(const ChannelModelParams& params);

/// Draws a reproducible instance. Users get ids 0..n_users-1. The random
/// stream is fixed so independent reimplementations can match it exactly:
/// for each user in id order draw, from a mersenne-twister-64 seeded with
/// `seed`, four doubles (distance, fading-1, fading-2, rate), each mapped
/// from the top 53 bits of one engine output as (k + 0.5) * 2^-53.
///   distance: area-uniform over the annulus [min_distance, cell_radius],
///             d = sqrt(min^2 + u * (radius^2 - min^2))
///   fading:   |beta|^2 with beta circularly-symmetric complex normal of
///             unit variance, via the Box-Muller transform of (u1, u2)
///   rate:     uniform in [rate_min, rate_max]
/// channel_gain_sq = 10^(-PL(d)/10) * |beta|^2 with
/// PL(d) = pathloss_const_db + pathloss_slope_db * log10(d / 1000 m).
Scenario generate_scenario(int n_users, int group_count, std::uint64_t seed,
                           const ChannelModelParams& params = {});

}  // namespace noma
