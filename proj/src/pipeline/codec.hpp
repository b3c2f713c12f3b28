#pragma once

// JSON forms of pipeline values shared by the workspace logic and persistence.

#include "tws/codegen.hpp"
#include "tws/pipeline.hpp"

#include <json.hpp>

namespace tws::pipeline::detail {

using nlohmann::ordered_json;

ordered_json diagnostic_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const ordered_json& j);

/// [["LIT", 5], ["BINOP", "ADD"], ["HALT"]]
ordered_json code_json(const codegen::MachineCode& code);
codegen::MachineCode code_from_json(const ordered_json& j);

ordered_json artifact_json(const Artifact& a);
Artifact artifact_from_json(const ordered_json& j);

} // namespace tws::pipeline::detail
