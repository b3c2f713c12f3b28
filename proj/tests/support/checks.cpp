#include "checks.hpp"

#include "fixtures.hpp"
#include "regex_oracle.hpp"
#include "tiny_oracle.hpp"

#include "tws/service.hpp"
#include "tws/tinyvm.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <latch>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>

namespace tws::testing {

using nlohmann::ordered_json;
using pipeline::Slot;
using pipeline::Status;
using pipeline::Subfase;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt_seconds(double s)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f s", s);
    return buf;
}

std::string show(const std::optional<lexgen::Match>& m)
{
    return m ? "(" + std::to_string(m->length) + "," + std::to_string(m->rule) + ")" : "none";
}

// ---------------------------------------------------------------- scanner

struct ScannerCase
{
    std::string name;
    std::string spec;
    std::u32string alphabet;
    std::vector<std::u32string> words;
};

std::vector<ScannerCase> scanner_cases()
{
    std::vector<ScannerCase> out;
    out.push_back({"tiny",
                   tiny_specs().scanner,
                   U"abeginrtwhdlosfvxyz_ABXZ0123456789 \t\r\n:=<>+-*/%();#\"\\",
                   {U"begin", U"end", U"while", U"do", U":=", U"<=", U">=", U"<>", U"\"hi\\n\"", U"\"a\\\"b\"",
                    U"# note\n", U"x1", U"42", U"\"open"}});
    out.push_back({"overlap",
                   "token A   /a+/\n"
                   "token AB  /(a|b)*b/\n"
                   "token ABA /aba/\n"
                   "token ANY /[a-c]/\n"
                   "token CC  /c(ac)*/\n"
                   "skip  WS  /[ \\n]+/\n",
                   U"abc \n",
                   {U"aba", U"abab", U"cacac", U"aaab", U"bbb"}});
    out.push_back({"ties",
                   "token IF    /if/\n"
                   "token ID    /[a-z]+/\n"
                   "token ID2   /[a-z][a-z0-9]*/\n"
                   "token NUM   /[0-9]+/\n"
                   "token HEX   /0x[0-9a-f]+/\n"
                   "token NUMX  /[0-9]+x?/\n"
                   "token DOT   /\\./\n"
                   "token DOTS  /\\.\\.\\./\n"
                   "token GREEK /[α-ω]+/\n"
                   "token OTHER /[^a-z0-9 .]/\n"
                   "skip  WS    / +/\n"
                   "keywords ID : for\n",
                   U"ifxa09f. αβω",
                   {U"if", U"for", U"0x1f", U"12x", U"...", U"..", U"iff", U"a1"}});
    return out;
}

std::u32string random_input(std::mt19937_64& rng, const ScannerCase& c, const std::u32string& noise)
{
    std::uniform_int_distribution<int> pieces(1, 24);
    std::uniform_int_distribution<int> pick(0, 99);
    std::u32string s;
    int n = pieces(rng);
    for (int i = 0; i < n; ++i) {
        int p = pick(rng);
        if (p < 25 && !c.words.empty())
            s += c.words[rng() % c.words.size()];
        else if (p < 30)
            s += noise[rng() % noise.size()];
        else
            s += c.alphabet[rng() % c.alphabet.size()];
    }
    return s;
}

} // namespace

CheckResult check_scanner_oracle()
{
    CheckResult r;
    auto t0 = std::chrono::steady_clock::now();
    const std::u32string noise = U"@!?é€\t\n";
    constexpr int inputs_per_spec = 10'000;
    std::mt19937_64 rng(20261016);
    std::size_t inputs = 0, positions = 0, mismatches = 0;

    for (const auto& c : scanner_cases()) {
        lexgen::ScannerSpec spec;
        lexgen::ScannerAutomaton dfa;
        try {
            spec = lexgen::parse_scanner_spec(c.spec);
            dfa = lexgen::build_scanner(spec);
        } catch (const std::exception& e) {
            r.fail(c.name + ": spec rejected: " + e.what());
            continue;
        }
        lexgen::NfaSimulator nfa(spec);

        for (int k = 0; k < inputs_per_spec; ++k) {
            std::u32string s = random_input(rng, c, noise);
            ++inputs;
            bool blocked = false;
            std::vector<lexgen::Lexeme> walk;
            for (std::size_t pos = 0; pos < s.size();) {
                ++positions;
                auto d = lexgen::longest_match(dfa, s, pos);
                auto n = nfa.longest(s, pos);
                auto a = ast_longest(spec, s, pos);
                if (d != n || d != a) {
                    ++mismatches;
                    r.fail(c.name + ": input \"" + utf8::encode(s) + "\" offset " + std::to_string(pos) + ": dfa "
                           + show(d) + ", nfa " + show(n) + ", regex " + show(a));
                }
                if (!d) {
                    blocked = true;
                    ++pos;
                    continue;
                }
                if (!blocked)
                    walk.push_back({pos, *d, spec.rules[d->rule].action == lexgen::RuleAction::Skip});
                pos += d->length;
            }

            // scan's own munch must follow exactly the oracle-approved path
            try {
                auto seg = lexgen::segment(dfa, s);
                bool same = !blocked && seg.size() == walk.size();
                for (std::size_t i = 0; same && i < seg.size(); ++i)
                    same = seg[i].offset == walk[i].offset && seg[i].match == walk[i].match
                           && seg[i].skipped == walk[i].skipped;
                if (!same) {
                    ++mismatches;
                    r.fail(c.name + ": segment disagrees with the oracle walk on \"" + utf8::encode(s) + "\"");
                }
            } catch (const lexgen::LexError&) {
                if (!blocked) {
                    ++mismatches;
                    r.fail(c.name + ": segment raised LexError on matchable \"" + utf8::encode(s) + "\"");
                }
            }
        }
    }
    double secs = seconds_since(t0);
    if (secs >= 60)
        r.fail("took " + fmt_seconds(secs));
    if (inputs < 10'000)
        r.fail("only " + std::to_string(inputs) + " inputs");
    r.detail = std::to_string(inputs) + " inputs over 3 specs, " + std::to_string(positions) + " positions, "
               + std::to_string(mismatches) + " mismatches, " + fmt_seconds(secs);
    return r;
}

// ---------------------------------------------------------------- parser

namespace {

struct GrammarCase
{
    std::string name;
    std::string text;
};

std::vector<GrammarCase> oracle_grammars()
{
    return {
        {"parens", "%start S\n"
                   "S -> '(' S ')' => parens(1)\n"
                   "   | 'a'         => a(0)\n"},
        {"dyck", "%start S\n"
                 "S -> '(' S ')' S => pair(2)\n"
                 "   |             => nil(0)\n"},
        {"expr", "%start E\n"
                 "E -> E '+' T => plus(2) | T\n"
                 "T -> T '*' F => times(2) | F\n"
                 "F -> 'x' => x(0)\n"},
        {"lalr-not-slr", "%start S\n"
                         "S -> L '=' R => assign(2) | R\n"
                         "L -> '*' R => deref(1) | 'x' => x(0)\n"
                         "R -> L\n"},
        {"nullable-lists", "%start S\n"
                           "S -> A B => s(2)\n"
                           "A -> 'a' A => a(1) | => nil(0)\n"
                           "B -> 'b' B 'c' => b(1) | => nil(0)\n"},
        {"six-nonterminals", "%start S\n"
                             "S -> X Y => s(2)\n"
                             "X -> 'a' X => ax(1) | Z\n"
                             "Z -> => z(0)\n"
                             "Y -> 'b' W => yb(1) | V 'c' => yc(1)\n"
                             "W -> 'c' W 'b' => w(1) | => w0(0)\n"
                             "V -> 'b' 'b' V => v(1) | => v0(0)\n"},
    };
}

struct Enumeration
{
    const parsegen::LalrTable* table;
    std::vector<std::string> keys;       // terminal keys, "$" excluded
    std::vector<std::size_t> ids;        // matching LALR terminal indices
    int max_len = 12;
    std::vector<std::size_t> prefix;
    std::uint64_t strings = 0;
    std::uint64_t accepted = 0;
    std::uint64_t disagreements = 0;
    std::uint64_t driver_checks = 0;
    std::string first_disagreement;

    std::uint64_t subtree_size(int depth) const
    {
        // strings of length depth+1 .. max_len that extend the current prefix
        std::uint64_t total = 0, level = 1;
        for (int d = depth + 1; d <= max_len; ++d) {
            level *= keys.size();
            total += level;
        }
        return total;
    }

    std::string render() const
    {
        std::string s;
        for (std::size_t k : prefix)
            s += keys[k] + " ";
        return s.empty() ? "<empty>" : s;
    }

    /// Cross-checks the tree-building driver against the recognizer verdict.
    void check_driver(bool expect)
    {
        std::vector<lexgen::Token> toks;
        int col = 1;
        for (std::size_t k : prefix) {
            std::string lit = keys[k].substr(1, keys[k].size() - 2);
            toks.push_back({lit, lit, 1, col});
            col += 2;
        }
        toks.push_back({std::string(lexgen::eof_kind), "", 1, col});
        bool ok = true;
        try {
            parsegen::parse(*table, toks);
        } catch (const parsegen::ParseError&) {
            ok = false;
        }
        ++driver_checks;
        if (ok != expect)
            note("driver " + std::string(ok ? "accepts" : "rejects") + " " + render());
    }

    void note(const std::string& what)
    {
        ++disagreements;
        if (first_disagreement.empty())
            first_disagreement = what;
    }

    void dfs(const parsegen::LalrRecognizer& lr, parsegen::EarleyRecognizer& er, int depth, bool just_died)
    {
        ++strings;
        bool la = !lr.dead() && lr.accepts();
        bool ea = er.accepts();
        if (la != ea)
            note(render() + ": lalr " + (la ? "accepts" : "rejects") + ", earley " + (ea ? "accepts" : "rejects"));
        if (la)
            ++accepted;
        if (la || just_died)
            check_driver(la);
        if (lr.dead() != er.dead())
            note(render() + ": viable-prefix disagreement");
        if (depth == max_len)
            return;
        if (lr.dead() && er.dead()) {
            strings += subtree_size(depth); // every extension is rejected by both
            return;
        }
        for (std::size_t k = 0; k < keys.size(); ++k) {
            parsegen::LalrRecognizer next = lr;
            next.feed(ids[k]);
            er.feed(keys[k]);
            prefix.push_back(k);
            dfs(next, er, depth + 1, !lr.dead() && next.dead());
            prefix.pop_back();
            er.unfeed();
        }
    }
};

} // namespace

CheckResult check_parser_oracle()
{
    CheckResult r;
    auto t0 = std::chrono::steady_clock::now();
    std::uint64_t total = 0, disagreements = 0, driver = 0;
    int grammars = 0;
    for (const auto& g : oracle_grammars()) {
        try {
            auto spec = parsegen::parse_grammar_spec(g.text);
            auto table = parsegen::build_lalr(spec);
            if (spec.nonterminals().size() > 6)
                r.fail(g.name + ": more than 6 nonterminals");
            Enumeration en;
            en.table = &table;
            for (const auto& t : spec.terminals()) {
                en.keys.push_back(t.key());
                en.ids.push_back(*table.terminal_index(t.key()));
            }
            if (en.keys.size() > 3)
                r.fail(g.name + ": more than 3 terminals");
            parsegen::EarleyRecognizer er(spec);
            en.dfs(parsegen::LalrRecognizer(table), er, 0, false);
            std::uint64_t expected = 1 + en.subtree_size(0);
            if (en.strings != expected)
                r.fail(g.name + ": enumerated " + std::to_string(en.strings) + " of " + std::to_string(expected));
            if (en.disagreements)
                r.fail(g.name + ": " + en.first_disagreement);
            if (en.accepted == 0)
                r.fail(g.name + ": language empty up to length 12");
            total += en.strings;
            disagreements += en.disagreements;
            driver += en.driver_checks;
            ++grammars;
        } catch (const std::exception& e) {
            r.fail(g.name + ": " + e.what());
        }
    }
    if (grammars < 5)
        r.fail("fewer than 5 grammars checked");

    // the classic ambiguous sum grammar has exactly one shift/reduce conflict
    std::size_t sr_conflicts = 0;
    try {
        auto amb = parsegen::parse_grammar_spec("%start E\n%mode permissive\nE -> E '+' E => plus(2) | ID\n");
        auto table = parsegen::build_lalr(amb);
        for (const auto& c : table.conflicts()) {
            bool shift = std::any_of(c.contenders.begin(), c.contenders.end(),
                                     [](const std::string& s) { return s.rfind("shift", 0) == 0; });
            bool reduce = std::any_of(c.contenders.begin(), c.contenders.end(),
                                      [](const std::string& s) { return s.rfind("reduce", 0) == 0; });
            if (shift && reduce)
                ++sr_conflicts;
        }
        if (table.conflicts().size() != 1 || sr_conflicts != 1)
            r.fail("E -> E '+' E: expected exactly 1 shift/reduce conflict, got "
                   + std::to_string(table.conflicts().size()));
        else if (table.conflicts()[0].terminal != "'+'" || table.conflicts()[0].resolution.rfind("shift", 0) != 0)
            r.fail("E -> E '+' E: conflict not on '+' or not resolved to shift");
        try {
            auto strict = parsegen::parse_grammar_spec("%start E\nE -> E '+' E => plus(2) | ID\n");
            parsegen::build_lalr(strict);
            r.fail("strict mode accepted the ambiguous grammar");
        } catch (const parsegen::ConflictError& e) {
            if (e.conflicts().size() != 1)
                r.fail("strict mode reported " + std::to_string(e.conflicts().size()) + " conflicts");
        }
    } catch (const std::exception& e) {
        r.fail(std::string("ambiguous grammar: ") + e.what());
    }

    r.detail = std::to_string(grammars) + " grammars, " + std::to_string(total) + " strings up to length 12 (extensions of prefixes both reject are counted, not walked), "
               + std::to_string(driver) + " driver cross-checks, " + std::to_string(disagreements)
               + " disagreements; E->E+E conflicts: " + std::to_string(sr_conflicts) + " shift/reduce, "
               + fmt_seconds(seconds_since(t0));
    return r;
}

// ---------------------------------------------------------------- constrainer

namespace {

std::size_t count_kinds(const SynTree& t, const std::set<std::string>& kinds)
{
    std::size_t n = kinds.count(t.kind);
    for (const auto& c : t.children)
        n += count_kinds(c, kinds);
    return n;
}

void collect_addrs(const SynTree& t, std::vector<std::int64_t>& out)
{
    if (t.ann_addr)
        out.push_back(*t.ann_addr);
    for (const auto& c : t.children)
        collect_addrs(c, out);
}

} // namespace

CheckResult check_constrainer_corpus()
{
    CheckResult r;
    std::size_t clean = 0, seeded = 0;
    for (const auto& p : corpus()) {
        try {
            auto res = constrain_tiny(p.source);
            if (!res.diagnostics.empty()) {
                r.fail(p.name + ": unexpected " + res.diagnostics[0].code + " " + res.diagnostics[0].message);
                continue;
            }
            // one address per declaration node, handed out densely
            std::size_t d = count_kinds(res.decorated, {"intdcln", "booldcln"});
            std::vector<std::int64_t> declared;
            for (const auto& s : res.symbols)
                declared.push_back(s.addr);
            std::vector<std::int64_t> dense(d);
            std::iota(dense.begin(), dense.end(), 0);
            std::sort(declared.begin(), declared.end());
            if (declared != dense)
                r.fail(p.name + ": addresses are not 0.." + std::to_string(d) + "-1");
            std::vector<std::int64_t> used;
            collect_addrs(res.decorated, used);
            for (auto a : used)
                if (a < 0 || a >= static_cast<std::int64_t>(d))
                    r.fail(p.name + ": leaf address " + std::to_string(a) + " out of range");
            ++clean;
        } catch (const std::exception& e) {
            r.fail(p.name + ": " + e.what());
        }
    }
    for (const auto& p : error_corpus()) {
        try {
            auto res = constrain_tiny(p.source);
            std::multiset<std::string> got, want(p.codes.begin(), p.codes.end());
            for (const auto& d : res.diagnostics)
                got.insert(d.code);
            if (got != want) {
                std::string g;
                for (const auto& c : got)
                    g += c + " ";
                r.fail(p.name + ": got { " + g + "}");
            }
            ++seeded;
        } catch (const std::exception& e) {
            r.fail(p.name + ": " + e.what());
        }
    }
    if (clean < 10 || seeded < 10 || clean + seeded < 20)
        r.fail("corpus too small");
    r.detail = std::to_string(clean) + " clean programs with dense addresses, " + std::to_string(seeded)
               + " seeded-error programs with exact code multisets";
    return r;
}

// ---------------------------------------------------------------- end to end

namespace {

struct VmOutcome
{
    std::string output;
    std::string exit;
    std::size_t length = 0;
};

VmOutcome run_vm(const codegen::SymbolicCode& sym, std::size_t memory, const std::vector<std::int64_t>& input,
                 std::uint64_t max_steps = 10'000'000)
{
    auto mc = codegen::assemble(sym);
    auto state = vm::load(mc, std::max(memory, codegen::memory_needed(mc)));
    std::deque<std::int64_t> q(input.begin(), input.end());
    auto res = vm::run(state, q, max_steps, 0);
    return {res.output, res.trap ? std::string(vm::trap_name(res.trap->kind)) : "halted", mc.code.size()};
}

} // namespace

CheckResult check_end_to_end()
{
    CheckResult r;
    std::size_t vectors = 0;
    std::string factorial_out, gcd_out, gcd_oracle;
    for (const auto& p : corpus()) {
        try {
            auto checked = constrain_tiny(p.source);
            auto raw = codegen::generate(tiny_tools().gen, checked.decorated);
            auto opt = codegen::optimize(raw);
            auto ws = tiny_workspace(p.name);
            ws.compile();
            auto report = ws.run(p.source);
            if (!report.ok())
                r.fail(p.name + ": pipeline run failed");
            for (const auto& run : p.runs) {
                auto input = parse_ints(run.input);
                auto oracle = interpret_tiny(checked.decorated, input);
                auto plain = run_vm(raw, checked.symbols.size(), input);
                auto folded = run_vm(opt, checked.symbols.size(), input);
                auto piped = ws.interpret(run.input);
                std::string piped_exit =
                    piped.result.trap ? std::string(vm::trap_name(piped.result.trap->kind)) : "halted";
                std::string where = p.name + " input \"" + run.input + "\"";
                if (plain.output != oracle.output || plain.exit != oracle.exit)
                    r.fail(where + ": unoptimized VM " + plain.exit + " \"" + plain.output + "\" vs oracle "
                           + oracle.exit + " \"" + oracle.output + "\"");
                if (folded.output != oracle.output || folded.exit != oracle.exit)
                    r.fail(where + ": optimized VM disagrees with the oracle");
                if (piped.result.output != oracle.output || piped_exit != oracle.exit)
                    r.fail(where + ": pipeline interpret disagrees with the oracle");
                if (oracle.output != run.output || oracle.exit != run.exit)
                    r.fail(where + ": oracle disagrees with the expectation file");
                if (p.name == "factorial" && run.input == "5")
                    factorial_out = folded.output;
                if (p.name == "gcd" && parse_ints(run.input) == std::vector<std::int64_t>{12, 18}) {
                    gcd_out = folded.output;
                    gcd_oracle = oracle.output;
                }
                ++vectors;
            }
        } catch (const std::exception& e) {
            r.fail(p.name + ": " + e.what());
        }
    }
    if (factorial_out != "120\n")
        r.fail("factorial(5) printed \"" + factorial_out + "\"");
    if (gcd_out.empty() || gcd_out != gcd_oracle || gcd_oracle != std::to_string(std::gcd(12, 18)) + "\n")
        r.fail("gcd(12, 18) printed \"" + gcd_out + "\", oracle \"" + gcd_oracle + "\"");
    r.detail = std::to_string(corpus().size()) + " programs, " + std::to_string(vectors)
               + " input vectors, VM = oracle with and without the optimizer; factorial(5) -> "
               + factorial_out.substr(0, factorial_out.size() - (factorial_out.empty() ? 0 : 1)) + ", gcd(12,18) -> "
               + gcd_out.substr(0, gcd_out.size() - (gcd_out.empty() ? 0 : 1));
    return r;
}

// ---------------------------------------------------------------- optimizer

namespace {

using tws::BinOp;
using tws::Instruction;
using tws::Opcode;
using tws::UnOp;

constexpr BinOp all_binops[] = {BinOp::ADD, BinOp::SUB, BinOp::MUL, BinOp::DIV, BinOp::MOD, BinOp::EQ, BinOp::NE,
                                BinOp::LT,  BinOp::LE,  BinOp::GT,  BinOp::GE,  BinOp::AND, BinOp::OR};

std::int64_t random_literal(std::mt19937_64& rng)
{
    static const std::int64_t pool[] = {0, 1, -1, 2, 3, 7, -5, 100, 0, 1,
                                        std::numeric_limits<std::int64_t>::max(),
                                        std::numeric_limits<std::int64_t>::min()};
    if (rng() % 5 == 0)
        return static_cast<std::int64_t>(rng());
    return pool[rng() % std::size(pool)];
}

codegen::SymbolicCode random_straight_line(std::mt19937_64& rng, bool plant_div_zero)
{
    codegen::SymbolicCode c;
    std::int64_t next_label = 1;
    int depth = 0;
    int n = 1 + static_cast<int>(rng() % 30);
    int plant_at = plant_div_zero ? static_cast<int>(rng() % n) : -1;
    auto push = [&](Opcode op, std::int64_t v = 0) { c.code.push_back({op, v}); };
    for (int i = 0; i < n; ++i) {
        if (i == plant_at) {
            push(Opcode::LIT, random_literal(rng));
            push(Opcode::LIT, 0);
            push(Opcode::BINOP, static_cast<std::int64_t>(rng() % 2 ? BinOp::DIV : BinOp::MOD));
            ++depth;
            continue;
        }
        switch (rng() % 11) {
        case 0:
        case 1:
        case 2:
            push(Opcode::LIT, random_literal(rng));
            ++depth;
            break;
        case 3:
        case 4:
            // occasionally short of operands, to exercise underflow
            if (depth >= 2 || rng() % 20 == 0) {
                push(Opcode::BINOP, static_cast<std::int64_t>(all_binops[rng() % std::size(all_binops)]));
                depth = std::max(depth - 1, 0);
            }
            break;
        case 5:
            if (depth >= 1)
                push(Opcode::UNOP, static_cast<std::int64_t>(rng() % 2 ? UnOp::NEG : UnOp::NOT));
            break;
        case 6:
            push(Opcode::NOP);
            break;
        case 7:
            if (depth >= 1) {
                push(Opcode::WRITE);
                --depth;
            }
            break;
        case 8:
            if (depth >= 1) {
                push(Opcode::STORE, static_cast<std::int64_t>(rng() % 3));
                --depth;
            } else {
                push(Opcode::LOAD, static_cast<std::int64_t>(rng() % 3));
                ++depth;
            }
            break;
        case 9:
            c.labels[next_label++] = c.code.size();
            break;
        case 10: {
            std::int64_t l = next_label++;
            push(Opcode::UJP, l);
            c.labels[l] = c.code.size();
            break;
        }
        }
    }
    while (depth-- > 0)
        push(Opcode::WRITE);
    push(Opcode::HALT);
    return c;
}

/// `LIT a; LIT 0; BINOP DIV|MOD` windows with no label inside them.
std::size_t div_zero_triples(const codegen::SymbolicCode& c)
{
    std::set<std::size_t> placed;
    for (const auto& [id, at] : c.labels)
        placed.insert(at);
    std::size_t n = 0;
    for (std::size_t i = 0; i + 2 < c.code.size(); ++i) {
        const auto &a = c.code[i], &b = c.code[i + 1], &op = c.code[i + 2];
        if (a.op == Opcode::LIT && b.op == Opcode::LIT && b.operand == 0 && op.op == Opcode::BINOP
            && (op.operand == static_cast<std::int64_t>(BinOp::DIV)
                || op.operand == static_cast<std::int64_t>(BinOp::MOD))
            && !placed.count(i + 1) && !placed.count(i + 2))
            ++n;
    }
    return n;
}

} // namespace

CheckResult check_optimizer_properties()
{
    CheckResult r;
    std::mt19937_64 rng(7);
    std::size_t before = 0, after = 0, traps = 0, planted = 0;
    constexpr int programs = 1000;
    for (int k = 0; k < programs; ++k) {
        bool plant = k % 4 == 0;
        auto code = random_straight_line(rng, plant);
        auto opt = codegen::optimize(code);
        std::string where = "program " + std::to_string(k) + ":\n" + codegen::listing(code);
        VmOutcome a, b;
        try {
            a = run_vm(code, 3, {}, 100'000);
            b = run_vm(opt, 3, {}, 100'000);
        } catch (const std::exception& e) {
            r.fail(where + e.what());
            continue;
        }
        if (a.output != b.output || a.exit != b.exit)
            r.fail(where + "observable behaviour changed: " + a.exit + " -> " + b.exit);
        if (codegen::optimize(opt) != opt)
            r.fail(where + "not idempotent");
        if (opt.code.size() > code.code.size())
            r.fail(where + "grew");
        std::size_t t0 = div_zero_triples(code), t1 = div_zero_triples(opt);
        if (t1 < t0 || (plant && t1 == 0))
            r.fail(where + "division-by-zero triple folded away");
        if (plant && a.exit == "DivByZero")
            ++planted;
        if (a.exit != "halted")
            ++traps;
        before += code.code.size();
        after += opt.code.size();
    }
    r.detail = std::to_string(programs) + " random straight-line programs (" + std::to_string(traps)
               + " trapping, " + std::to_string(planted) + " hitting a planted division by zero), "
               + std::to_string(before) + " -> " + std::to_string(after)
               + " instructions; equivalent, idempotent, never larger";
    return r;
}

// ---------------------------------------------------------------- invalidation

namespace {

constexpr Slot matrix_slots[] = {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator};

// which subfases read which spec slot, written out by hand
const std::map<Slot, std::set<Subfase>>& dependents()
{
    static const std::map<Slot, std::set<Subfase>> table = {
        {Slot::Scanner,
         {Subfase::Scanner, Subfase::Scanning, Subfase::Parsing, Subfase::Constrain, Subfase::GenCode, Subfase::Code}},
        {Slot::Parser, {Subfase::Parser, Subfase::Parsing, Subfase::Constrain, Subfase::GenCode, Subfase::Code}},
        {Slot::Contrainer, {Subfase::Contrainer, Subfase::Constrain, Subfase::GenCode, Subfase::Code}},
        {Slot::Generator, {Subfase::Generator, Subfase::GenCode, Subfase::Code}},
    };
    return table;
}

std::string edited(const std::string& text)
{
    return text + "\n-- edited\n";
}

} // namespace

CheckResult check_invalidation_matrix()
{
    CheckResult r;
    auto base = tiny_workspace();
    base.compile();
    base.run(corpus_program("factorial").source);
    if (base.interpret("5").result.output != "120\n")
        r.fail("baseline workspace does not compute factorial");
    for (Subfase d : pipeline::all_subfases)
        if (base.status(d) != Status::Fresh)
            r.fail("baseline " + std::string(pipeline::subfase_name(d)) + " not fresh");

    int cells = 0;
    for (Slot s : matrix_slots) {
        auto ws = base;
        ws.set_text(s, edited(*ws.text(s)));
        for (Subfase d : pipeline::all_subfases) {
            Status want = dependents().at(s).count(d) ? Status::Stale : Status::Fresh;
            Status got = ws.status(d);
            if (got != want)
                r.fail(std::string(pipeline::slot_name(s)) + " edit: " + std::string(pipeline::subfase_name(d))
                       + " is " + std::string(pipeline::status_name(got)) + ", expected "
                       + std::string(pipeline::status_name(want)));
            ++cells;
        }
        // rebuilding converges back to all fresh
        ws.compile();
        ws.run();
        ws.interpret("5");
        for (Subfase d : pipeline::all_subfases)
            if (ws.status(d) != Status::Fresh)
                r.fail(std::string(pipeline::slot_name(s)) + " edit: rebuild left "
                       + std::string(pipeline::subfase_name(d)) + " "
                       + std::string(pipeline::status_name(ws.status(d))));
    }
    r.detail = std::to_string(cells) + " (slot, subfase) cells checked against the dependency table; rebuild "
               "restores all fresh";
    return r;
}

// ---------------------------------------------------------------- service helpers

namespace {

struct Api
{
    service::Service& svc;

    ordered_json call(const std::string& method, const std::string& path, const std::string& body = "",
                      int* status = nullptr)
    {
        auto res = svc.handle(method, path, body);
        if (status)
            *status = res.status;
        if (res.body.empty())
            return nullptr;
        if (res.content_type.rfind("application/json", 0) != 0)
            return res.body;
        return ordered_json::parse(res.body);
    }

    ordered_json expect(int want, const std::string& method, const std::string& path, const std::string& body = "")
    {
        int got = 0;
        auto j = call(method, path, body, &got);
        if (got != want)
            throw std::runtime_error(method + " " + path + " -> " + std::to_string(got) + " " + j.dump());
        return j;
    }

    std::string new_tiny_workspace(const std::string& name)
    {
        std::string id = expect(201, "POST", "/workspaces", ordered_json{{"name", name}}.dump()).at("id");
        const auto& t = tiny_specs();
        expect(204, "PUT", "/workspaces/" + id + "/specs/scanner", t.scanner);
        expect(204, "PUT", "/workspaces/" + id + "/specs/parser", t.grammar);
        expect(204, "PUT", "/workspaces/" + id + "/specs/contrainer", t.constrain);
        expect(204, "PUT", "/workspaces/" + id + "/specs/generator", t.codegen);
        return id;
    }
};

} // namespace

CheckResult check_session_batch_equivalence()
{
    CheckResult r;
    service::Service svc(service::Config{});
    Api api{svc};
    std::mt19937_64 rng(99);
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"factorial", "10"}, {"gcd", "100 75"}, {"collatz", "27"}};
    std::size_t partitions = 0, records = 0;

    for (const auto& [name, input] : cases) {
        try {
            const auto& prog = corpus_program(name);
            auto ws = tiny_workspace();
            ws.compile();
            ws.run(prog.source);
            auto batch = ws.interpret(input);
            std::vector<std::string> want;
            for (const auto& rec : batch.result.trace)
                want.push_back(vm::to_json_line(rec));
            if (batch.refusal || batch.result.trap || want.empty())
                throw std::runtime_error("batch run did not halt");

            std::string id = api.new_tiny_workspace(name);
            api.expect(204, "PUT", "/workspaces/" + id + "/source", prog.source);
            api.expect(200, "POST", "/workspaces/" + id + "/compile");
            api.expect(200, "POST", "/workspaces/" + id + "/run", R"({"optimize":true})");

            for (int k = 0; k < 20; ++k) {
                auto sess = api.expect(201, "POST", "/workspaces/" + id + "/sessions",
                                       ordered_json{{"input", input}}.dump());
                std::string sid = sess.at("session");
                std::vector<std::string> got;
                ordered_json state = sess;
                int calls = 0;
                while (state.at("status") == "runnable" && ++calls < 100'000) {
                    std::uint64_t n = rng() % 10 == 0 ? rng() % 200 : rng() % 8;
                    auto res = api.expect(200, "POST", "/sessions/" + sid + "/step",
                                          ordered_json{{"n", n}}.dump());
                    for (const auto& rec : res.at("records"))
                        got.push_back(rec.dump());
                    state = res.at("state");
                }
                if (got != want)
                    r.fail(name + " partition " + std::to_string(k) + ": trace differs (" + std::to_string(got.size())
                           + " vs " + std::to_string(want.size()) + " records)");
                if (state.at("output") != batch.result.output || state.at("status") != "halted")
                    r.fail(name + " partition " + std::to_string(k) + ": output or status differs");
                api.expect(204, "DELETE", "/sessions/" + sid);
                ++partitions;
                records += got.size();
            }
        } catch (const std::exception& e) {
            r.fail(name + ": " + e.what());
        }
    }
    r.detail = std::to_string(cases.size()) + " programs, " + std::to_string(partitions) + " random partitions, "
               + std::to_string(records) + " records compared byte-for-byte";
    return r;
}

CheckResult check_service_isolation()
{
    CheckResult r;
    service::Service svc(service::Config{});
    struct Lane
    {
        std::string program;
        std::string input;
        std::string output;
        std::string id;
        std::vector<std::string> errors;
        int ops = 0;
    };
    std::vector<Lane> lanes;
    for (const char* name : {"factorial", "gcd", "fib", "countdown"}) {
        const auto& p = corpus_program(name);
        lanes.push_back({name, p.runs[0].input, p.runs[0].output, {}, {}, 0});
    }
    {
        Api api{svc};
        for (auto& l : lanes)
            l.id = api.new_tiny_workspace(l.program);
    }

    const std::vector<Slot> slots(std::begin(matrix_slots), std::end(matrix_slots));
    std::latch start(static_cast<std::ptrdiff_t>(lanes.size()));
    auto worker = [&](std::size_t me) {
        Lane& l = lanes[me];
        Api api{svc};
        const std::string ws = "/workspaces/" + l.id;
        std::map<Slot, std::string> texts = {{Slot::Scanner, tiny_specs().scanner},
                                             {Slot::Parser, tiny_specs().grammar},
                                             {Slot::Contrainer, tiny_specs().constrain},
                                             {Slot::Generator, tiny_specs().codegen}};
        auto expect_status = [&](const std::set<Subfase>& stale, const std::string& when) {
            auto st = api.expect(200, "GET", ws + "/status");
            ++l.ops;
            for (Subfase d : pipeline::all_subfases) {
                std::string want(pipeline::status_name(stale.count(d) ? Status::Stale : Status::Fresh));
                if (st.at(std::string(pipeline::subfase_name(d))) != want)
                    l.errors.push_back(when + ": " + std::string(pipeline::subfase_name(d)) + " is "
                                       + st.at(std::string(pipeline::subfase_name(d))).get<std::string>());
            }
        };
        start.arrive_and_wait();
        try {
            for (int it = 0; it < 12; ++it) {
                api.expect(204, "PUT", ws + "/source", corpus_program(l.program).source);
                api.expect(200, "POST", ws + "/compile");
                auto run = api.expect(200, "POST", ws + "/run", R"({"optimize":true})");
                if (!run.at("ok").get<bool>())
                    l.errors.push_back("run not ok");
                auto out = api.expect(200, "POST", ws + "/interpret", ordered_json{{"input", l.input}}.dump());
                if (out.at("output") != l.output)
                    l.errors.push_back("interpret printed " + out.at("output").dump());
                l.ops += 4;
                expect_status({}, "after interpret");

                // a session stays ours while the others edit their workspaces
                auto sess = api.expect(201, "POST", ws + "/sessions", ordered_json{{"input", l.input}}.dump());
                auto step = api.expect(200, "POST", "/sessions/" + sess.at("session").get<std::string>() + "/step",
                                       R"({"n":100000})");
                if (step.at("state").at("output") != l.output || step.at("state").at("workspace") != l.id)
                    l.errors.push_back("session output or owner wrong");
                api.expect(204, "DELETE", "/sessions/" + sess.at("session").get<std::string>());
                l.ops += 3;

                Slot s = slots[(me + static_cast<std::size_t>(it)) % slots.size()];
                texts[s] = edited(texts[s]);
                api.expect(204, "PUT", ws + "/specs/" + std::string(pipeline::slot_name(s)), texts[s]);
                ++l.ops;
                expect_status(dependents().at(s), "after editing " + std::string(pipeline::slot_name(s)));
                api.expect(409, "POST", ws + "/run", "{}");
                ++l.ops;
            }
            api.expect(200, "POST", ws + "/compile");
            api.expect(200, "POST", ws + "/run", "{}");
            api.expect(200, "POST", ws + "/interpret", ordered_json{{"input", l.input}}.dump());
            expect_status({}, "final");
        } catch (const std::exception& e) {
            l.errors.push_back(e.what());
        }
    };

    std::vector<std::thread> threads;
    for (std::size_t i = 0; i < lanes.size(); ++i)
        threads.emplace_back(worker, i);
    for (auto& t : threads)
        t.join();

    Api api{svc};
    int ops = 0;
    for (auto& l : lanes) {
        for (const auto& e : l.errors)
            r.fail(l.program + ": " + e);
        if (api.call("GET", "/workspaces/" + l.id + "/source") != corpus_program(l.program).source)
            r.fail(l.program + ": source text was replaced by another workspace");
        ops += l.ops;
    }
    if (api.call("GET", "/workspaces").size() != lanes.size())
        r.fail("workspace list changed size");
    r.detail = std::to_string(lanes.size()) + " concurrent workspaces, " + std::to_string(ops)
               + " interleaved requests, no cross-contamination of status maps, sources, outputs or sessions";
    return r;
}

// ---------------------------------------------------------------- persistence

CheckResult check_persistence_round_trip()
{
    CheckResult r;
    TempDir tmp;
    std::size_t workspaces = 0, artifacts = 0;

    auto compare = [&](const pipeline::Workspace& a, const std::filesystem::path& dir, const std::string& what) {
        pipeline::save_workspace(a, dir);
        auto b = pipeline::load_workspace(dir);
        if (a.id() != b.id() || a.name() != b.name())
            r.fail(what + ": id or name changed");
        for (Slot s : {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator, Slot::Source})
            if (a.text(s) != b.text(s))
                r.fail(what + ": " + std::string(pipeline::slot_name(s)) + " text changed");
        if (a.status() != b.status())
            r.fail(what + ": status map changed");
        if (a.artifacts() != b.artifacts())
            r.fail(what + ": artifacts changed");
        artifacts += b.artifacts().size();
        return b;
    };

    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto& p : corpus())
        sources.push_back({p.name, p.source});
    for (const auto& p : error_corpus())
        sources.push_back({"error-" + p.name, p.source});

    for (const auto& [name, source] : sources) {
        try {
            auto ws = tiny_workspace(name);
            compare(ws, tmp.path() / name, name + " (specs only)");
            ws.compile();
            ws.run(source);
            std::string first_input;
            std::string first_output;
            if (name.rfind("error-", 0) != 0) {
                const auto& p = corpus_program(name);
                first_input = p.runs[0].input;
                first_output = ws.interpret(first_input).result.output;
            }
            auto loaded = compare(ws, tmp.path() / name, name);
            if (!first_input.empty() && loaded.interpret(first_input).result.output != first_output)
                r.fail(name + ": reloaded workspace computes a different output");

            ws.set_spec(Slot::Generator, edited(*ws.text(Slot::Generator)));
            compare(ws, tmp.path() / name, name + " (stale)");
            ++workspaces;
        } catch (const std::exception& e) {
            r.fail(name + ": " + e.what());
        }
    }
    r.detail = std::to_string(workspaces) + " corpus workspaces saved and reloaded in 3 states each, "
               + std::to_string(artifacts) + " artifacts compared";
    return r;
}

} // namespace tws::testing
