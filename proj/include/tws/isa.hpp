#pragma once

// Stack-machine instruction set shared by the code generator, the optimizer
// and the VM, including the one definition of its integer arithmetic.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tws {

enum class Opcode : std::uint8_t
{
    LIT,
    LOAD,
    STORE,
    BINOP,
    UNOP,
    FJP,
    UJP,
    READ,
    WRITE,
    WRITES,
    NOP,
    HALT,
};

enum class BinOp : std::uint8_t
{
    ADD,
    SUB,
    MUL,
    DIV,
    MOD,
    EQ,
    NE,
    LT,
    LE,
    GT,
    GE,
    AND,
    OR,
};

enum class UnOp : std::uint8_t
{
    NEG,
    NOT,
};

enum class OperandKind
{
    None,
    Int,    // LIT value
    Addr,   // LOAD/STORE memory cell
    BinOp,  // BINOP operator
    UnOp,   // UNOP operator
    Target, // FJP/UJP: label id in symbolic code, instruction index in machine code
    String, // WRITES string pool index
};

OperandKind operand_kind(Opcode op);

std::string_view opcode_name(Opcode op);
std::optional<Opcode> opcode_from_name(std::string_view name);
std::string_view binop_name(BinOp op);
std::optional<BinOp> binop_from_name(std::string_view name);
std::string_view unop_name(UnOp op);
std::optional<UnOp> unop_from_name(std::string_view name);

struct Instruction
{
    Opcode op = Opcode::NOP;
    /// Meaning depends on operand_kind(op); BINOP/UNOP store the enum value.
    std::int64_t operand = 0;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// `OPCODE` or `OPCODE operand`; jump targets print as plain numbers.
std::string to_string(const Instruction& ins);

/// Two's-complement wrap-around; DIV and MOD truncate toward zero.
/// Empty for DIV or MOD by zero.
std::optional<std::int64_t> apply_binop(BinOp op, std::int64_t a, std::int64_t b);
std::int64_t apply_unop(UnOp op, std::int64_t a);

} // namespace tws
