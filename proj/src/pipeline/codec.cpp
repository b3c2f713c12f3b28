#include "codec.hpp"

#include <stdexcept>

namespace tws::pipeline::detail {

ordered_json diagnostic_json(const Diagnostic& d)
{
    return {{"code", d.code}, {"message", d.message}, {"line", d.pos.line}, {"col", d.pos.col}};
}

Diagnostic diagnostic_from_json(const ordered_json& j)
{
    return {j.at("code").get<std::string>(), j.at("message").get<std::string>(),
            {j.at("line").get<int>(), j.at("col").get<int>()}};
}

ordered_json code_json(const codegen::MachineCode& code)
{
    ordered_json instrs = ordered_json::array();
    for (const auto& ins : code.code) {
        ordered_json one = ordered_json::array({std::string(opcode_name(ins.op))});
        switch (operand_kind(ins.op)) {
        case OperandKind::None:
            break;
        case OperandKind::BinOp:
            one.push_back(std::string(binop_name(static_cast<BinOp>(ins.operand))));
            break;
        case OperandKind::UnOp:
            one.push_back(std::string(unop_name(static_cast<UnOp>(ins.operand))));
            break;
        default:
            one.push_back(ins.operand);
        }
        instrs.push_back(std::move(one));
    }
    return {{"instructions", std::move(instrs)}, {"strings", code.strings}};
}

codegen::MachineCode code_from_json(const ordered_json& j)
{
    codegen::MachineCode out;
    for (const auto& one : j.at("instructions")) {
        auto name = one.at(0).get<std::string>();
        auto op = opcode_from_name(name);
        if (!op)
            throw std::invalid_argument("unknown opcode " + name);
        Instruction ins{*op, 0};
        switch (operand_kind(*op)) {
        case OperandKind::None:
            break;
        case OperandKind::BinOp: {
            auto b = binop_from_name(one.at(1).get<std::string>());
            if (!b)
                throw std::invalid_argument("unknown BINOP operator");
            ins.operand = static_cast<std::int64_t>(*b);
            break;
        }
        case OperandKind::UnOp: {
            auto u = unop_from_name(one.at(1).get<std::string>());
            if (!u)
                throw std::invalid_argument("unknown UNOP operator");
            ins.operand = static_cast<std::int64_t>(*u);
            break;
        }
        default:
            ins.operand = one.at(1).get<std::int64_t>();
        }
        out.code.push_back(ins);
    }
    out.strings = j.at("strings").get<std::vector<std::string>>();
    return out;
}

ordered_json artifact_json(const Artifact& a)
{
    ordered_json diags = ordered_json::array();
    for (const auto& d : a.diagnostics)
        diags.push_back(diagnostic_json(d));
    return {{"hash", a.hash},
            {"failed", a.failed},
            {"diagnostics", std::move(diags)},
            {"payload", ordered_json::parse(a.payload)}};
}

Artifact artifact_from_json(const ordered_json& j)
{
    Artifact a;
    a.hash = j.at("hash").get<std::string>();
    a.failed = j.at("failed").get<bool>();
    for (const auto& d : j.at("diagnostics"))
        a.diagnostics.push_back(diagnostic_from_json(d));
    a.payload = j.at("payload").dump();
    return a;
}

} // namespace tws::pipeline::detail
