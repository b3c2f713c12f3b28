#pragma once

#include "tws/syntree.hpp"

#include <json.hpp>

namespace tws {

nlohmann::ordered_json tree_to_json_value(const SynTree& tree);
SynTree tree_from_json_value(const nlohmann::ordered_json& json);

} // namespace tws
