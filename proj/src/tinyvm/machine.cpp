#include "tws/tinyvm.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace tws::vm {

namespace {

constexpr std::array<std::string_view, 6> trap_names = {"StackUnderflow", "PcOutOfRange",   "DivByZero",
                                                        "InputExhausted", "InputMalformed", "StepLimit"};

std::size_t pops(const Instruction& ins)
{
    switch (ins.op) {
    case Opcode::STORE:
    case Opcode::UNOP:
    case Opcode::FJP:
    case Opcode::WRITE:
        return 1;
    case Opcode::BINOP:
        return 2;
    default:
        return 0;
    }
}

} // namespace

std::string_view trap_name(TrapKind kind)
{
    return trap_names[static_cast<std::size_t>(kind)];
}

std::optional<TrapKind> trap_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < trap_names.size(); ++i) {
        if (trap_names[i] == name)
            return static_cast<TrapKind>(i);
    }
    return std::nullopt;
}

MachineState load(codegen::MachineCode code, std::size_t memory_size)
{
    for (std::size_t i = 0; i < code.code.size(); ++i) {
        const auto& ins = code.code[i];
        auto bad = [&](const std::string& why) {
            throw std::invalid_argument("instruction " + std::to_string(i) + " (" + to_string(ins) + "): " + why);
        };
        switch (operand_kind(ins.op)) {
        case OperandKind::Addr:
            if (ins.operand < 0)
                bad("negative address");
            if (static_cast<std::uint64_t>(ins.operand) >= memory_size)
                bad("address outside memory of size " + std::to_string(memory_size));
            break;
        case OperandKind::String:
            if (ins.operand < 0 || static_cast<std::uint64_t>(ins.operand) >= code.strings.size())
                bad("no such string");
            break;
        case OperandKind::BinOp:
            if (ins.operand < 0 || ins.operand > static_cast<std::int64_t>(BinOp::OR))
                bad("unknown operator");
            break;
        case OperandKind::UnOp:
            if (ins.operand < 0 || ins.operand > static_cast<std::int64_t>(UnOp::NOT))
                bad("unknown operator");
            break;
        default:
            break;
        }
    }
    MachineState s;
    s.code = std::move(code);
    s.memory.assign(memory_size, 0);
    return s;
}

std::variant<StepRecord, Trap> step(MachineState& state, std::deque<std::int64_t>& input)
{
    if (state.halted)
        throw std::logic_error("step on a halted machine");
    auto trap = [&](TrapKind k) { return Trap{k, state.pc, state.steps}; };
    if (state.pc >= state.code.code.size())
        return trap(TrapKind::PcOutOfRange);

    const Instruction ins = state.code.code[state.pc];
    auto& st = state.stack;
    if (st.size() < pops(ins))
        return trap(TrapKind::StackUnderflow);

    StepRecord rec;
    rec.step = state.steps;
    rec.pc = state.pc;
    rec.instruction = ins;
    std::size_t next = state.pc + 1;

    switch (ins.op) {
    case Opcode::LIT:
        st.push_back(ins.operand);
        break;
    case Opcode::LOAD:
        st.push_back(state.memory[static_cast<std::size_t>(ins.operand)]);
        break;
    case Opcode::STORE: {
        auto addr = static_cast<std::size_t>(ins.operand);
        state.memory[addr] = st.back();
        rec.write = MemoryWrite{addr, st.back()};
        st.pop_back();
        break;
    }
    case Opcode::BINOP: {
        std::int64_t b = st[st.size() - 1];
        std::int64_t a = st[st.size() - 2];
        auto v = apply_binop(static_cast<BinOp>(ins.operand), a, b);
        if (!v)
            return trap(TrapKind::DivByZero);
        st.pop_back();
        st.back() = *v;
        break;
    }
    case Opcode::UNOP:
        st.back() = apply_unop(static_cast<UnOp>(ins.operand), st.back());
        break;
    case Opcode::FJP:
        if (st.back() == 0)
            next = static_cast<std::size_t>(ins.operand);
        st.pop_back();
        break;
    case Opcode::UJP:
        next = static_cast<std::size_t>(ins.operand);
        break;
    case Opcode::READ:
        if (input.empty())
            return trap(TrapKind::InputExhausted);
        st.push_back(input.front());
        rec.io = IoEvent{IoEvent::Kind::Read, input.front(), {}};
        input.pop_front();
        break;
    case Opcode::WRITE:
        rec.io = IoEvent{IoEvent::Kind::Wrote, 0, std::to_string(st.back()) + "\n"};
        st.pop_back();
        break;
    case Opcode::WRITES:
        rec.io = IoEvent{IoEvent::Kind::Wrote, 0, state.code.strings[static_cast<std::size_t>(ins.operand)]};
        break;
    case Opcode::NOP:
        break;
    case Opcode::HALT:
        state.halted = true;
        break;
    }
    state.pc = next;
    ++state.steps;
    rec.stack = st;
    return rec;
}

RunResult run(MachineState& state, std::deque<std::int64_t>& input, std::uint64_t max_steps, std::size_t max_trace)
{
    RunResult r;
    while (!state.halted) {
        if (state.steps >= max_steps) {
            r.trap = Trap{TrapKind::StepLimit, state.pc, state.steps};
            break;
        }
        auto out = step(state, input);
        if (auto* t = std::get_if<Trap>(&out)) {
            r.trap = *t;
            break;
        }
        auto& rec = std::get<StepRecord>(out);
        ++r.steps;
        if (rec.io && rec.io->kind == IoEvent::Kind::Wrote)
            r.output += rec.io->text;
        if (r.trace.size() < max_trace)
            r.trace.push_back(std::move(rec));
        else
            r.trace_truncated = true;
    }
    return r;
}

std::optional<std::vector<std::int64_t>> parse_input(std::string_view text)
{
    std::vector<std::int64_t> values;
    std::size_t i = 0;
    while (i < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])))
            ++j;
        std::string_view word = text.substr(i, j - i);
        std::int64_t v = 0;
        auto [end, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
        if (ec != std::errc() || end != word.data() + word.size())
            return std::nullopt;
        values.push_back(v);
        i = j;
    }
    return values;
}

} // namespace tws::vm
