#pragma once

// The stack machine: flat 64-bit memory, operand stack, integer input queue,
// text output, and a full per-step trace.

#include "tws/codegen.hpp"
#include "tws/isa.hpp"

#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tws::vm {

enum class TrapKind
{
    StackUnderflow,
    PcOutOfRange,
    DivByZero,
    InputExhausted,
    InputMalformed,
    StepLimit,
};

std::string_view trap_name(TrapKind kind);
std::optional<TrapKind> trap_from_name(std::string_view name);

struct Trap
{
    TrapKind kind = TrapKind::StackUnderflow;
    std::size_t pc = 0;
    std::uint64_t step = 0;

    friend bool operator==(const Trap&, const Trap&) = default;
};

struct MemoryWrite
{
    std::size_t addr = 0;
    std::int64_t value = 0;

    friend bool operator==(const MemoryWrite&, const MemoryWrite&) = default;
};

struct IoEvent
{
    enum class Kind
    {
        Read,
        Wrote,
    };

    Kind kind = Kind::Read;
    std::int64_t value = 0; // Read
    std::string text;       // Wrote

    friend bool operator==(const IoEvent&, const IoEvent&) = default;
};

struct StepRecord
{
    std::uint64_t step = 0;
    std::size_t pc = 0;
    Instruction instruction;
    std::vector<std::int64_t> stack;
    std::optional<MemoryWrite> write;
    std::optional<IoEvent> io;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct MachineState
{
    codegen::MachineCode code;
    std::size_t pc = 0;
    std::vector<std::int64_t> stack;
    std::vector<std::int64_t> memory;
    bool halted = false;
    std::uint64_t steps = 0;

    friend bool operator==(const MachineState&, const MachineState&) = default;
};

/// Throws std::invalid_argument when memory_size does not cover every
/// LOAD/STORE operand, or when an operand is otherwise out of range.
MachineState load(codegen::MachineCode code, std::size_t memory_size);

/// Executes one instruction. A trap leaves the state untouched, so the same
/// step can be retried (e.g. after more input arrives). Requires !halted.
std::variant<StepRecord, Trap> step(MachineState& state, std::deque<std::int64_t>& input);

struct RunResult
{
    std::vector<StepRecord> trace;
    std::string output;
    std::optional<Trap> trap; // empty = halted
    std::uint64_t steps = 0;  // executed by this call
    bool trace_truncated = false;
};

/// Steps until HALT, a trap, or the state's step counter reaching max_steps
/// (StepLimit). Only the first max_trace records are kept.
RunResult run(MachineState& state, std::deque<std::int64_t>& input, std::uint64_t max_steps,
              std::size_t max_trace = std::numeric_limits<std::size_t>::max());

/// Whitespace-separated signed decimal integers; empty on malformed text.
std::optional<std::vector<std::int64_t>> parse_input(std::string_view text);

/// One JSON object per record, no trailing newline.
std::string to_json_line(const StepRecord& record);
std::string to_json_line(const Trap& trap);

} // namespace tws::vm
