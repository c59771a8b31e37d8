#pragma once

#include <json.hpp>

#include "livqual/config.hpp"

namespace livqual::detail {

nlohmann::json config_to_json(const Config &config);
Config config_from_json(const nlohmann::json &j);

} // namespace livqual::detail
