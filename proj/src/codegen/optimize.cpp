#include "tws/codegen.hpp"

#include <algorithm>
#include <stdexcept>

namespace tws::codegen {

namespace {

class Peephole
{
  public:
    explicit Peephole(SymbolicCode code) : c_(std::move(code)) {}

    SymbolicCode run()
    {
        std::size_t i = 0;
        while (i < c_.code.size()) {
            if (rewrite_at(i))
                i = i >= 2 ? i - 2 : 0;
            else
                ++i;
        }
        return std::move(c_);
    }

  private:
    SymbolicCode c_;

    bool label_at(std::size_t pos) const
    {
        return std::any_of(c_.labels.begin(), c_.labels.end(), [pos](const auto& l) { return l.second == pos; });
    }

    bool is(std::size_t i, Opcode op) const { return i < c_.code.size() && c_.code[i].op == op; }

    /// Keeps instruction `i` as `keep` (or deletes it when absent) and drops the
    /// `extra` instructions after it.
    void replace(std::size_t i, std::optional<Instruction> keep, std::size_t extra)
    {
        std::size_t removed = extra;
        auto first = c_.code.begin() + static_cast<std::ptrdiff_t>(i);
        if (keep) {
            *first = *keep;
            c_.code.erase(first + 1, first + 1 + static_cast<std::ptrdiff_t>(extra));
        } else {
            c_.code.erase(first, first + 1 + static_cast<std::ptrdiff_t>(extra));
            ++removed;
        }
        for (auto& l : c_.labels) {
            if (l.second > i)
                l.second -= removed;
        }
    }

    bool rewrite_at(std::size_t i)
    {
        const Instruction& ins = c_.code[i];
        // P1: LIT a; LIT b; BINOP op
        if (ins.op == Opcode::LIT && is(i + 1, Opcode::LIT) && is(i + 2, Opcode::BINOP) && !label_at(i + 1)
            && !label_at(i + 2)) {
            auto op = static_cast<BinOp>(c_.code[i + 2].operand);
            if (auto v = apply_binop(op, ins.operand, c_.code[i + 1].operand)) {
                replace(i, Instruction{Opcode::LIT, *v}, 2);
                return true;
            }
        }
        // P2: LIT a; UNOP op
        if (ins.op == Opcode::LIT && is(i + 1, Opcode::UNOP) && !label_at(i + 1)) {
            auto op = static_cast<UnOp>(c_.code[i + 1].operand);
            replace(i, Instruction{Opcode::LIT, apply_unop(op, ins.operand)}, 1);
            return true;
        }
        // P3: UJP to the next instruction
        if (ins.op == Opcode::UJP) {
            auto target = c_.labels.find(ins.operand);
            if (target != c_.labels.end() && target->second == i + 1) {
                replace(i, std::nullopt, 0);
                return true;
            }
        }
        // P4: NOP
        if (ins.op == Opcode::NOP) {
            replace(i, std::nullopt, 0);
            return true;
        }
        return false;
    }
};

std::string escape(const std::string& s)
{
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            out += c;
        }
    }
    return out + "\"";
}

void append_strings(std::string& out, const std::vector<std::string>& strings)
{
    for (std::size_t k = 0; k < strings.size(); ++k)
        out += ".str " + std::to_string(k) + " " + escape(strings[k]) + "\n";
}

} // namespace

SymbolicCode optimize(const SymbolicCode& code)
{
    return Peephole(code).run();
}

MachineCode assemble(const SymbolicCode& code)
{
    MachineCode out;
    out.code = code.code;
    out.strings = code.strings;
    bool needs_halt = false;
    for (auto& ins : out.code) {
        if (operand_kind(ins.op) != OperandKind::Target)
            continue;
        auto it = code.labels.find(ins.operand);
        if (it == code.labels.end())
            throw std::invalid_argument("label L" + std::to_string(ins.operand) + " is never placed");
        if (it->second == code.code.size())
            needs_halt = true;
        ins.operand = static_cast<std::int64_t>(it->second);
    }
    if (needs_halt)
        out.code.push_back({Opcode::HALT, 0});
    return out;
}

std::string listing(const SymbolicCode& code)
{
    std::multimap<std::size_t, std::int64_t> at;
    for (const auto& [id, pos] : code.labels)
        at.emplace(pos, id);
    std::string out;
    auto labels_before = [&](std::size_t i) {
        auto [lo, hi] = at.equal_range(i);
        for (auto it = lo; it != hi; ++it)
            out += "L" + std::to_string(it->second) + ":\n";
    };
    for (std::size_t i = 0; i < code.code.size(); ++i) {
        labels_before(i);
        const auto& ins = code.code[i];
        out += std::to_string(i) + ": ";
        if (operand_kind(ins.op) == OperandKind::Target)
            out += std::string(opcode_name(ins.op)) + " L" + std::to_string(ins.operand);
        else
            out += to_string(ins);
        out += "\n";
    }
    labels_before(code.code.size());
    append_strings(out, code.strings);
    return out;
}

std::string listing(const MachineCode& code)
{
    std::string out;
    for (std::size_t i = 0; i < code.code.size(); ++i)
        out += std::to_string(i) + ": " + to_string(code.code[i]) + "\n";
    append_strings(out, code.strings);
    return out;
}

std::size_t memory_needed(const MachineCode& code)
{
    std::size_t need = 0;
    for (const auto& ins : code.code) {
        if (operand_kind(ins.op) == OperandKind::Addr && ins.operand >= 0)
            need = std::max(need, static_cast<std::size_t>(ins.operand) + 1);
    }
    return need;
}

} // namespace tws::codegen
