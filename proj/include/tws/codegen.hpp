#pragma once

// Template-driven code generation from the decorated tree, peephole
// optimization over symbolic code, and label assembly.

#include "tws/common.hpp"
#include "tws/isa.hpp"
#include "tws/syntree.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tws::codegen {

struct OperandExpr
{
    enum class Kind
    {
        None,
        IntConst,
        LexemeAsInt,
        AddrOfChild,
        AddrOfSelf,
        LabelRef,
        StringOfSelf,
        OpName, // BINOP / UNOP operator
    };

    Kind kind = Kind::None;
    std::int64_t value = 0; // IntConst value, child index, or operator enum value
    std::string label;      // LabelRef

    friend bool operator==(const OperandExpr&, const OperandExpr&) = default;
};

struct GenAction
{
    enum class Kind
    {
        GenChild,
        GenAll,
        Emit,
        FreshLabel,
        PlaceLabel,
    };

    Kind kind = Kind::GenAll;
    std::size_t child = 0; // GenChild
    Opcode op = Opcode::NOP;
    OperandExpr operand;
    std::string label; // FreshLabel, PlaceLabel
    SourcePos pos;

    friend bool operator==(const GenAction& a, const GenAction& b)
    {
        return a.kind == b.kind && a.child == b.child && a.op == b.op && a.operand == b.operand && a.label == b.label;
    }
};

/// Kinds without a template generate their children in order.
struct GenSpec
{
    std::map<std::string, std::vector<GenAction>> templates;
};

GenSpec parse_codegen_spec(std::string_view text);

/// Jump operands hold label ids; `labels` maps label id to the index of the
/// instruction it precedes (may equal the code length).
struct SymbolicCode
{
    std::vector<Instruction> code;
    std::map<std::int64_t, std::size_t> labels;
    std::vector<std::string> strings;

    friend bool operator==(const SymbolicCode&, const SymbolicCode&) = default;
};

struct MachineCode
{
    std::vector<Instruction> code;
    std::vector<std::string> strings;

    friend bool operator==(const MachineCode&, const MachineCode&) = default;
};

class GenError : public std::runtime_error
{
  public:
    GenError(SourcePos pos, const std::string& reason);
    SourcePos position() const noexcept { return pos_; }
    const std::string& reason() const noexcept { return reason_; }

  private:
    SourcePos pos_;
    std::string reason_;
};

SymbolicCode generate(const GenSpec& spec, const SynTree& decorated);

SymbolicCode optimize(const SymbolicCode& code);

/// Throws std::invalid_argument on an unplaced label.
MachineCode assemble(const SymbolicCode& code);

/// `idx: OPCODE operand` lines, `Lk:` before each label target, then `.str k "text"`.
std::string listing(const SymbolicCode& code);
std::string listing(const MachineCode& code);

/// Largest LOAD/STORE address plus one.
std::size_t memory_needed(const MachineCode& code);

/// Undoes the escaping of a double-quoted string literal; text without
/// surrounding quotes is returned unchanged.
std::string unquote(std::string_view lexeme);

} // namespace tws::codegen
