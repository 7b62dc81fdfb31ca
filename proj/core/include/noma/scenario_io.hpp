#pragma once

#include <filesystem>
#include <string>

#include "noma/scenario.hpp"

namespace noma {

/// JSON serialization. Floating-point fields are written with enough decimal
/// digits that load(save(s)) == s holds bit for bit.
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& text);

void save_scenario(const Scenario& s, const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

/// Users as CSV with header "id,distance_m,channel_gain_sq,target_rate".
/// The distance cell is empty when the profile carries none.
void export_users_csv(const Scenario& s, const std::filesystem::path& path);

}  // namespace noma
