#include "noma/scenario_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "noma/errors.hpp"

namespace noma {

namespace {

constexpr int kSchemaVersion = 1;

using nlohmann::json;

json params_to_json(const ChannelModelParams& p) {
  return json{{"cell_radius_m", p.cell_radius_m},
              {"min_distance_m", p.min_distance_m},
              {"pathloss_const_db", p.pathloss_const_db},
              {"pathloss_slope_db", p.pathloss_slope_db},
              {"bandwidth_hz", p.bandwidth_hz},
              {"noise_psd_dbm_hz", p.noise_psd_dbm_hz},
              {"rate_min_bps_hz", p.rate_min_bps_hz},
              {"rate_max_bps_hz", p.rate_max_bps_hz}};
}

// Fetches `key` or throws ParseError naming the missing field.
const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

template <typename T>
T need_as(const json& j, const char* key, const std::string& where) {
  try {
    return need(j, key, where).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(where + ": field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = s.seed;
  j["group_count"] = s.group_count;
  j["noise_power_w"] = s.noise_power_w;
  j["params"] = params_to_json(s.params);
  json users = json::array();
  for (const auto& u : s.users) {
    json ju{{"id", u.id},
            {"channel_gain_sq", u.channel_gain_sq},
            {"target_rate", u.target_rate}};
    if (u.distance_m) ju["distance_m"] = *u.distance_m;
    users.push_back(std::move(ju));
  }
  j["users"] = std::move(users);
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("scenario file: ") + e.what());
  }
  const std::string where = "scenario file";
  const int version = need_as<int>(j, "schema_version", where);
  if (version != kSchemaVersion)
    throw ParseError(where + ": unsupported schema_version " + std::to_string(version));

  Scenario s;
  s.seed = need_as<std::uint64_t>(j, "seed", where);
  s.group_count = need_as<int>(j, "group_count", where);
  s.noise_power_w = need_as<double>(j, "noise_power_w", where);

  const json& jp = need(j, "params", where);
  ChannelModelParams p;
  p.cell_radius_m = need_as<double>(jp, "cell_radius_m", where + ".params");
  p.min_distance_m = need_as<double>(jp, "min_distance_m", where + ".params");
  p.pathloss_const_db = need_as<double>(jp, "pathloss_const_db", where + ".params");
  p.pathloss_slope_db = need_as<double>(jp, "pathloss_slope_db", where + ".params");
  p.bandwidth_hz = need_as<double>(jp, "bandwidth_hz", where + ".params");
  p.noise_psd_dbm_hz = need_as<double>(jp, "noise_psd_dbm_hz", where + ".params");
  p.rate_min_bps_hz = need_as<double>(jp, "rate_min_bps_hz", where + ".params");
  p.rate_max_bps_hz = need_as<double>(jp, "rate_max_bps_hz", where + ".params");
  s.params = p;

  const json& ju = need(j, "users", where);
  if (!ju.is_array()) throw ParseError(where + ": field 'users' must be an array");
  for (std::size_t i = 0; i < ju.size(); ++i) {
    const std::string uw = where + ".users[" + std::to_string(i) + "]";
    UserProfile u;
    u.id = need_as<int>(ju[i], "id", uw);
    u.channel_gain_sq = need_as<double>(ju[i], "channel_gain_sq", uw);
    u.target_rate = need_as<double>(ju[i], "target_rate", uw);
    if (ju[i].contains("distance_m") && !ju[i]["distance_m"].is_null())
      u.distance_m = need_as<double>(ju[i], "distance_m", uw);
    s.users.push_back(u);
  }
  s.validate();
  return s;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << scenario_to_json(s);
  if (!out) throw IoError("write failed: " + path.string());
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void export_users_csv(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "id,distance_m,channel_gain_sq,target_rate\n";
  char buf[64];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& u : s.users) {
    out << u.id << ',';
    if (u.distance_m) out << fmt(*u.distance_m);
    out << ',' << fmt(u.channel_gain_sq) << ',' << fmt(u.target_rate) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace noma
