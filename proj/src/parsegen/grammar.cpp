#include "tws/parsegen.hpp"

#include "../common/dsl_lexer.hpp"

#include <algorithm>
#include <cctype>

namespace tws::parsegen {

using tws::detail::DslCursor;
using tws::detail::DslTok;

std::string GrammarSymbol::key() const
{
    return kind == Kind::LiteralTerminal ? "'" + name + "'" : name;
}

int Production::push_count() const
{
    int total = 0;
    for (const auto& s : rhs)
        total += s.push_count();
    return total;
}

std::string Production::to_string() const
{
    std::string out = lhs + " ->";
    for (const auto& s : rhs)
        out += " " + s.key();
    if (directive)
        out += " => " + directive->node + "(" + std::to_string(directive->arity) + ")";
    return out;
}

std::vector<GrammarSymbol> GrammarSpec::terminals() const
{
    std::vector<GrammarSymbol> out;
    for (const auto& p : productions) {
        for (const auto& s : p.rhs) {
            if (s.is_terminal() && std::find(out.begin(), out.end(), s) == out.end())
                out.push_back(s);
        }
    }
    return out;
}

std::vector<std::string> GrammarSpec::nonterminals() const
{
    std::vector<std::string> out;
    for (const auto& p : productions) {
        if (std::find(out.begin(), out.end(), p.lhs) == out.end())
            out.push_back(p.lhs);
    }
    return out;
}

namespace {

struct RawSymbol
{
    bool quoted;
    std::string text;
    SourcePos pos;
};

struct RawAlternative
{
    std::string lhs;
    std::vector<RawSymbol> rhs;
    std::optional<TreeDirective> directive;
    SourcePos pos;
};

bool starts_rule(const DslCursor& cur)
{
    return cur.peek().kind == DslTok::Ident && cur.is_punct("->", 1);
}

bool ends_alternative(const DslCursor& cur)
{
    return cur.at_end() || cur.is_punct("|") || cur.is_punct("=>") || cur.is_punct(";") || cur.is_punct("%")
           || starts_rule(cur);
}

} // namespace

GrammarSpec parse_grammar_spec(std::string_view text)
{
    DslCursor cur(tws::detail::lex_dsl(text));
    GrammarSpec spec;
    std::optional<SourcePos> start_pos;
    std::vector<RawAlternative> raw;

    while (!cur.at_end()) {
        if (cur.accept_punct("%")) {
            const auto& name = cur.expect_ident("directive name");
            if (name.text == "start") {
                if (start_pos)
                    throw SpecError("duplicate %start", name.pos);
                start_pos = name.pos;
                spec.start = cur.expect_ident("start symbol").text;
            } else if (name.text == "mode") {
                const auto& mode = cur.expect_ident("mode");
                if (mode.text == "strict")
                    spec.mode = ResolutionMode::Strict;
                else if (mode.text == "permissive")
                    spec.mode = ResolutionMode::Permissive;
                else
                    throw SpecError("unknown mode '" + mode.text + "'", mode.pos);
            } else {
                throw SpecError("unknown directive %" + name.text, name.pos);
            }
            continue;
        }
        if (cur.accept_punct(";"))
            continue;
        if (!starts_rule(cur))
            cur.fail("expected rule 'Name -> ...' but found " + tws::detail::describe(cur.peek()));

        const auto lhs = cur.next();
        cur.expect_punct("->");
        for (;;) {
            RawAlternative alt{lhs.text, {}, std::nullopt, lhs.pos};
            while (!ends_alternative(cur)) {
                const auto& t = cur.next();
                if (t.kind == DslTok::Ident)
                    alt.rhs.push_back({false, t.text, t.pos});
                else if (t.kind == DslTok::Quoted)
                    alt.rhs.push_back({true, t.text, t.pos});
                else
                    throw SpecError("unexpected " + tws::detail::describe(t) + " in rule body", t.pos);
            }
            if (cur.accept_punct("=>")) {
                const auto& node = cur.expect_ident("node name");
                cur.expect_punct("(");
                const auto& k = cur.expect_int();
                long arity = std::stol(k.text);
                if (arity < 0)
                    throw SpecError("negative directive arity", k.pos);
                cur.expect_punct(")");
                alt.directive = TreeDirective{node.text, static_cast<std::size_t>(arity)};
            }
            raw.push_back(std::move(alt));
            if (!cur.accept_punct("|"))
                break;
        }
    }

    if (!start_pos)
        throw SpecError("missing %start");

    std::set<std::string> defined;
    for (const auto& alt : raw)
        defined.insert(alt.lhs);
    if (!defined.count(spec.start))
        throw SpecError("start symbol " + spec.start + " has no rules", *start_pos);

    for (auto& alt : raw) {
        Production p;
        p.index = spec.productions.size();
        p.lhs = alt.lhs;
        p.directive = alt.directive;
        p.pos = alt.pos;
        for (const auto& s : alt.rhs) {
            GrammarSymbol sym;
            sym.name = s.text;
            if (s.quoted) {
                if (s.text == end_marker)
                    throw SpecError("'$' is reserved", s.pos);
                sym.kind = GrammarSymbol::Kind::LiteralTerminal;
            } else if (defined.count(s.text)) {
                sym.kind = GrammarSymbol::Kind::Nonterminal;
            } else if (std::isupper(static_cast<unsigned char>(s.text.front()))) {
                sym.kind = GrammarSymbol::Kind::NamedTerminal;
            } else {
                throw SpecError("undefined nonterminal " + s.text, s.pos);
            }
            p.rhs.push_back(std::move(sym));
        }
        spec.productions.push_back(std::move(p));
    }
    return spec;
}

GrammarSets compute_nullable_first_follow(const GrammarSpec& grammar)
{
    GrammarSets sets;
    for (const auto& nt : grammar.nonterminals()) {
        sets.first[nt];
        sets.follow[nt];
    }
    sets.follow[grammar.start].insert(end_marker);

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : grammar.productions) {
            bool all_nullable = true;
            auto& first_lhs = sets.first[p.lhs];
            for (const auto& s : p.rhs) {
                if (s.is_terminal()) {
                    changed |= first_lhs.insert(s.key()).second;
                    all_nullable = false;
                    break;
                }
                for (const auto& t : sets.first[s.name])
                    changed |= first_lhs.insert(t).second;
                if (!sets.nullable.count(s.name)) {
                    all_nullable = false;
                    break;
                }
            }
            if (all_nullable)
                changed |= sets.nullable.insert(p.lhs).second;
        }
    }

    changed = true;
    while (changed) {
        changed = false;
        for (const auto& p : grammar.productions) {
            // trailer = FIRST of what follows position i, plus FOLLOW(lhs) while nullable
            std::set<std::string> trailer = sets.follow[p.lhs];
            for (auto it = p.rhs.rbegin(); it != p.rhs.rend(); ++it) {
                if (it->is_terminal()) {
                    trailer = {it->key()};
                    continue;
                }
                auto& follow = sets.follow[it->name];
                for (const auto& t : trailer)
                    changed |= follow.insert(t).second;
                const auto& first = sets.first[it->name];
                if (sets.nullable.count(it->name))
                    trailer.insert(first.begin(), first.end());
                else
                    trailer = first;
            }
        }
    }
    return sets;
}

} // namespace tws::parsegen
