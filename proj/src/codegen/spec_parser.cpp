#include "tws/codegen.hpp"

#include "../common/dsl_lexer.hpp"

#include <set>

namespace tws::codegen {

using tws::detail::DslCursor;
using tws::detail::DslTok;

namespace {

bool operand_fits(OperandKind want, OperandExpr::Kind have)
{
    using K = OperandExpr::Kind;
    switch (want) {
    case OperandKind::None:
        return have == K::None;
    case OperandKind::Int:
        return have == K::IntConst || have == K::LexemeAsInt;
    case OperandKind::Addr:
        return have == K::IntConst || have == K::AddrOfChild || have == K::AddrOfSelf;
    case OperandKind::BinOp:
    case OperandKind::UnOp:
        return have == K::OpName;
    case OperandKind::Target:
        return have == K::LabelRef;
    case OperandKind::String:
        return have == K::StringOfSelf;
    }
    return false;
}

class GenSpecReader
{
  public:
    explicit GenSpecReader(std::string_view text) : cur_(tws::detail::lex_dsl(text)) {}

    GenSpec read()
    {
        while (!cur_.at_end()) {
            cur_.expect_word("node");
            const auto& kind_tok = cur_.peek();
            if (kind_tok.kind != DslTok::Ident && kind_tok.kind != DslTok::Quoted)
                cur_.fail("expected node kind");
            std::string kind = kind_tok.text;
            SourcePos kind_pos = kind_tok.pos;
            cur_.next();
            if (spec_.templates.count(kind))
                throw SpecError("duplicate template for node " + kind, kind_pos);
            spec_.templates.emplace(std::move(kind), body());
        }
        return std::move(spec_);
    }

  private:
    DslCursor cur_;
    GenSpec spec_;
    std::set<std::string> labels_;

    std::vector<GenAction> body()
    {
        labels_.clear();
        std::vector<GenAction> actions;
        cur_.expect_punct("{");
        while (!cur_.accept_punct("}")) {
            if (cur_.at_end())
                cur_.fail("missing '}'");
            if (cur_.accept_punct(";"))
                continue;
            actions.push_back(action());
            if (!cur_.is_punct("}"))
                cur_.expect_punct(";");
        }
        return actions;
    }

    std::size_t index_in_parens()
    {
        cur_.expect_punct("(");
        const auto& i = cur_.expect_int();
        long value = std::stol(i.text);
        if (value < 0)
            throw SpecError("negative child index", i.pos);
        cur_.expect_punct(")");
        return static_cast<std::size_t>(value);
    }

    const std::string& known_label(const tws::detail::DslToken& tok)
    {
        if (!labels_.count(tok.text))
            throw SpecError("label " + tok.text + " used before 'label " + tok.text + "'", tok.pos);
        return tok.text;
    }

    GenAction action()
    {
        const auto& name = cur_.expect_ident("action");
        GenAction a;
        a.pos = name.pos;
        if (name.text == "gen") {
            a.kind = GenAction::Kind::GenChild;
            a.child = index_in_parens();
        } else if (name.text == "gen_all") {
            a.kind = GenAction::Kind::GenAll;
        } else if (name.text == "label") {
            a.kind = GenAction::Kind::FreshLabel;
            const auto& l = cur_.expect_ident("label name");
            if (!labels_.insert(l.text).second)
                throw SpecError("label " + l.text + " introduced twice", l.pos);
            a.label = l.text;
        } else if (name.text == "place") {
            a.kind = GenAction::Kind::PlaceLabel;
            a.label = known_label(cur_.expect_ident("label name"));
        } else if (name.text == "emit") {
            a.kind = GenAction::Kind::Emit;
            const auto& op_tok = cur_.expect_ident("opcode");
            auto op = opcode_from_name(op_tok.text);
            if (!op)
                throw SpecError("unknown opcode " + op_tok.text, op_tok.pos);
            a.op = *op;
            SourcePos operand_pos = cur_.peek().pos;
            if (!cur_.is_punct(";") && !cur_.is_punct("}"))
                a.operand = operand(*op);
            if (!operand_fits(operand_kind(*op), a.operand.kind))
                throw SpecError("operand does not fit opcode " + op_tok.text, operand_pos);
        } else {
            throw SpecError("unknown action '" + name.text + "'", name.pos);
        }
        return a;
    }

    OperandExpr operand(Opcode op)
    {
        OperandExpr e;
        const auto& t = cur_.peek();
        if (t.kind == DslTok::Int) {
            e.kind = OperandExpr::Kind::IntConst;
            try {
                e.value = std::stoll(t.text);
            } catch (const std::out_of_range&) {
                throw SpecError("integer operand out of range", t.pos);
            }
            cur_.next();
            return e;
        }
        if (cur_.accept_punct("$")) {
            const auto& w = cur_.expect_ident("int or str");
            if (w.text == "int")
                e.kind = OperandExpr::Kind::LexemeAsInt;
            else if (w.text == "str")
                e.kind = OperandExpr::Kind::StringOfSelf;
            else
                throw SpecError("unknown operand $" + w.text, w.pos);
            return e;
        }
        if (cur_.is_ident("addr") && cur_.is_punct("(", 1)) {
            cur_.next();
            cur_.next();
            if (cur_.is_ident("self")) {
                cur_.next();
                e.kind = OperandExpr::Kind::AddrOfSelf;
            } else {
                const auto& i = cur_.expect_int();
                long value = std::stol(i.text);
                if (value < 0)
                    throw SpecError("negative child index", i.pos);
                e.kind = OperandExpr::Kind::AddrOfChild;
                e.value = value;
            }
            cur_.expect_punct(")");
            return e;
        }
        const auto& w = cur_.expect_ident("operand");
        if (op == Opcode::BINOP || op == Opcode::UNOP) {
            std::optional<std::int64_t> code;
            if (op == Opcode::BINOP) {
                if (auto b = binop_from_name(w.text))
                    code = static_cast<std::int64_t>(*b);
            } else if (auto u = unop_from_name(w.text)) {
                code = static_cast<std::int64_t>(*u);
            }
            if (!code)
                throw SpecError("unknown operator " + w.text + " for " + std::string(opcode_name(op)), w.pos);
            e.kind = OperandExpr::Kind::OpName;
            e.value = *code;
            return e;
        }
        e.kind = OperandExpr::Kind::LabelRef;
        e.label = known_label(w);
        return e;
    }
};

} // namespace

GenSpec parse_codegen_spec(std::string_view text)
{
    return GenSpecReader(text).read();
}

} // namespace tws::codegen
