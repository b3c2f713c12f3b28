#include "tws/isa.hpp"

#include <array>
#include <limits>

namespace tws {

namespace {

constexpr std::array<std::string_view, 12> opcode_names = {"LIT", "LOAD", "STORE", "BINOP", "UNOP", "FJP",
                                                           "UJP", "READ", "WRITE", "WRITES", "NOP", "HALT"};
constexpr std::array<std::string_view, 13> binop_names = {"ADD", "SUB", "MUL", "DIV", "MOD", "EQ", "NE",
                                                          "LT",  "LE",  "GT",  "GE",  "AND", "OR"};
constexpr std::array<std::string_view, 2> unop_names = {"NEG", "NOT"};

template <typename E, std::size_t N>
std::optional<E> find_name(const std::array<std::string_view, N>& names, std::string_view name)
{
    for (std::size_t i = 0; i < N; ++i) {
        if (names[i] == name)
            return static_cast<E>(i);
    }
    return std::nullopt;
}

std::int64_t wrap(std::uint64_t v)
{
    return static_cast<std::int64_t>(v);
}

} // namespace

OperandKind operand_kind(Opcode op)
{
    switch (op) {
    case Opcode::LIT:
        return OperandKind::Int;
    case Opcode::LOAD:
    case Opcode::STORE:
        return OperandKind::Addr;
    case Opcode::BINOP:
        return OperandKind::BinOp;
    case Opcode::UNOP:
        return OperandKind::UnOp;
    case Opcode::FJP:
    case Opcode::UJP:
        return OperandKind::Target;
    case Opcode::WRITES:
        return OperandKind::String;
    default:
        return OperandKind::None;
    }
}

std::string_view opcode_name(Opcode op)
{
    return opcode_names[static_cast<std::size_t>(op)];
}

std::optional<Opcode> opcode_from_name(std::string_view name)
{
    return find_name<Opcode>(opcode_names, name);
}

std::string_view binop_name(BinOp op)
{
    return binop_names[static_cast<std::size_t>(op)];
}

std::optional<BinOp> binop_from_name(std::string_view name)
{
    return find_name<BinOp>(binop_names, name);
}

std::string_view unop_name(UnOp op)
{
    return unop_names[static_cast<std::size_t>(op)];
}

std::optional<UnOp> unop_from_name(std::string_view name)
{
    return find_name<UnOp>(unop_names, name);
}

std::string to_string(const Instruction& ins)
{
    std::string out(opcode_name(ins.op));
    switch (operand_kind(ins.op)) {
    case OperandKind::None:
        break;
    case OperandKind::BinOp:
        out += ' ';
        out += binop_name(static_cast<BinOp>(ins.operand));
        break;
    case OperandKind::UnOp:
        out += ' ';
        out += unop_name(static_cast<UnOp>(ins.operand));
        break;
    default:
        out += ' ';
        out += std::to_string(ins.operand);
        break;
    }
    return out;
}

std::optional<std::int64_t> apply_binop(BinOp op, std::int64_t a, std::int64_t b)
{
    auto ua = static_cast<std::uint64_t>(a);
    auto ub = static_cast<std::uint64_t>(b);
    switch (op) {
    case BinOp::ADD:
        return wrap(ua + ub);
    case BinOp::SUB:
        return wrap(ua - ub);
    case BinOp::MUL:
        return wrap(ua * ub);
    case BinOp::DIV:
        if (b == 0)
            return std::nullopt;
        if (a == std::numeric_limits<std::int64_t>::min() && b == -1)
            return a;
        return a / b;
    case BinOp::MOD:
        if (b == 0)
            return std::nullopt;
        if (b == -1)
            return 0;
        return a % b;
    case BinOp::EQ:
        return a == b;
    case BinOp::NE:
        return a != b;
    case BinOp::LT:
        return a < b;
    case BinOp::LE:
        return a <= b;
    case BinOp::GT:
        return a > b;
    case BinOp::GE:
        return a >= b;
    case BinOp::AND:
        return a != 0 && b != 0;
    case BinOp::OR:
        return a != 0 || b != 0;
    }
    return std::nullopt;
}

std::int64_t apply_unop(UnOp op, std::int64_t a)
{
    if (op == UnOp::NEG)
        return wrap(0 - static_cast<std::uint64_t>(a));
    return a == 0 ? 1 : 0;
}

} // namespace tws
