#pragma once

// JSON conversions shared between modules; kept out of the public headers.

#include <string>

#include <json.hpp>

#include "corn/episim.hpp"

namespace corn {

SimConfig sim_config_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::ordered_json sim_config_to_json(const SimConfig& cfg);

}  // namespace corn
