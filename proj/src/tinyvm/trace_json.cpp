#include "trace_json.hpp"

namespace tws::vm {

using nlohmann::ordered_json;

ordered_json step_json(const StepRecord& r)
{
    ordered_json j;
    j["step"] = r.step;
    j["pc"] = r.pc;
    j["instruction"] = to_string(r.instruction);
    j["stack"] = r.stack;
    if (r.write)
        j["write"] = {{"addr", r.write->addr}, {"value", r.write->value}};
    else
        j["write"] = nullptr;
    if (!r.io)
        j["io"] = nullptr;
    else if (r.io->kind == IoEvent::Kind::Read)
        j["io"] = {{"read", r.io->value}};
    else
        j["io"] = {{"wrote", r.io->text}};
    return j;
}

ordered_json trap_json(const Trap& t)
{
    ordered_json j;
    j["trap"] = std::string(trap_name(t.kind));
    j["pc"] = t.pc;
    j["step"] = t.step;
    return j;
}

std::string to_json_line(const StepRecord& r)
{
    return step_json(r).dump();
}

std::string to_json_line(const Trap& t)
{
    return trap_json(t).dump();
}

} // namespace tws::vm
