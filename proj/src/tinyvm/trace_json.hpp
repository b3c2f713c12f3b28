#pragma once

#include "tws/tinyvm.hpp"

#include <json.hpp>

namespace tws::vm {

nlohmann::ordered_json step_json(const StepRecord& record);
nlohmann::ordered_json trap_json(const Trap& trap);

} // namespace tws::vm
