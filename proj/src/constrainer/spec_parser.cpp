#include "tws/constrainer.hpp"

#include "../common/dsl_lexer.hpp"

#include <algorithm>
#include <set>

namespace tws::constrainer {

using tws::detail::DslCursor;
using tws::detail::DslTok;

namespace {

const std::set<std::string> known_codes = {codes::undeclared, codes::redeclared, codes::type_mismatch,
                                           codes::bad_rule, codes::unknown_node};

class ConstrainSpecReader
{
  public:
    explicit ConstrainSpecReader(std::string_view text) : cur_(tws::detail::lex_dsl(text)) {}

    ConstrainSpec read()
    {
        bool seen_types = false;
        while (!cur_.at_end()) {
            if (cur_.is_ident("types")) {
                if (seen_types)
                    cur_.fail("duplicate 'types' line");
                seen_types = true;
                cur_.next();
                while (cur_.peek().kind == DslTok::Ident && !cur_.is_ident("node")) {
                    const auto& t = cur_.next();
                    if (std::find(spec_.types.begin(), spec_.types.end(), t.text) != spec_.types.end())
                        throw SpecError("type " + t.text + " declared twice", t.pos);
                    spec_.types.push_back(t.text);
                }
                continue;
            }
            if (cur_.accept_punct("%")) {
                const auto& name = cur_.expect_ident("directive name");
                if (name.text != "strict")
                    throw SpecError("unknown directive %" + name.text, name.pos);
                const auto& value = cur_.expect_ident("on or off");
                if (value.text == "on")
                    spec_.strict = true;
                else if (value.text == "off")
                    spec_.strict = false;
                else
                    throw SpecError("expected on or off", value.pos);
                continue;
            }
            if (cur_.is_ident("node")) {
                cur_.next();
                node_rule();
                continue;
            }
            cur_.fail("expected 'types', '%strict' or 'node' but found " + tws::detail::describe(cur_.peek()));
        }
        for (const auto& u : pending_types_) {
            if (std::find(spec_.types.begin(), spec_.types.end(), u.name) == spec_.types.end())
                throw SpecError("undeclared type " + u.name, u.pos);
        }
        return std::move(spec_);
    }

  private:
    struct TypeUse
    {
        std::string name;
        SourcePos pos;
    };

    DslCursor cur_;
    ConstrainSpec spec_;
    std::vector<TypeUse> pending_types_;

    void node_rule()
    {
        const auto& kind_tok = cur_.peek();
        if (kind_tok.kind != DslTok::Ident && kind_tok.kind != DslTok::Quoted)
            cur_.fail("expected node kind");
        std::string kind = kind_tok.text;
        SourcePos kind_pos = kind_tok.pos;
        cur_.next();
        if (spec_.rules.count(kind))
            throw SpecError("duplicate rule for node " + kind, kind_pos);
        NodeRule rule;
        cur_.expect_punct("{");
        std::vector<ConstrainAction>* section = nullptr;
        while (!cur_.accept_punct("}")) {
            if (cur_.at_end())
                cur_.fail("missing '}'");
            if ((cur_.is_ident("enter") || cur_.is_ident("exit")) && cur_.is_punct(":", 1)) {
                section = cur_.peek().text == "enter" ? &rule.enter : &rule.exit;
                cur_.next();
                cur_.next();
                continue;
            }
            if (cur_.accept_punct(";"))
                continue;
            if (!section)
                cur_.fail("action outside an 'enter:' or 'exit:' section");
            section->push_back(action());
            if (!cur_.is_punct("}"))
                cur_.expect_punct(";");
        }
        spec_.rules.emplace(std::move(kind), std::move(rule));
    }

    ConstrainAction action()
    {
        const auto& name = cur_.expect_ident("action");
        ConstrainAction a;
        a.pos = name.pos;
        if (name.text == "open_scope") {
            a.kind = ConstrainAction::Kind::OpenScope;
        } else if (name.text == "close_scope") {
            a.kind = ConstrainAction::Kind::CloseScope;
        } else if (name.text == "declare") {
            a.kind = ConstrainAction::Kind::Declare;
            cur_.expect_word("child");
            a.child = index_in_parens();
            cur_.expect_punct(":");
            a.type = type_expr();
        } else if (name.text == "check") {
            a.kind = ConstrainAction::Kind::Check;
            a.type = type_expr();
            cur_.expect_punct("==");
            a.other = type_expr();
            cur_.expect_word("else");
            const auto& code = cur_.expect_ident("diagnostic code");
            if (!known_codes.count(code.text))
                throw SpecError("unknown diagnostic code " + code.text, code.pos);
            a.code = code.text;
        } else if (name.text == "synth") {
            a.kind = ConstrainAction::Kind::Synth;
            a.type = type_expr();
        } else {
            throw SpecError("unknown action '" + name.text + "'", name.pos);
        }
        return a;
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

    TypeExpr type_expr()
    {
        const auto& t = cur_.expect_ident("type");
        TypeExpr e;
        if (t.text == "lookup") {
            e.kind = TypeExpr::Kind::Lookup;
        } else if (t.text == "type" && cur_.is_punct("(")) {
            e.kind = TypeExpr::Kind::ChildType;
            e.index = index_in_parens();
        } else {
            e.kind = TypeExpr::Kind::Named;
            e.name = t.text;
            pending_types_.push_back({t.text, t.pos});
        }
        return e;
    }
};

} // namespace

ConstrainSpec parse_constrain_spec(std::string_view text)
{
    return ConstrainSpecReader(text).read();
}

} // namespace tws::constrainer
