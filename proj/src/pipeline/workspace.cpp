#include "tws/pipeline.hpp"

#include "codec.hpp"
#include "tws/constrainer.hpp"
#include "tws/lexgen.hpp"
#include "tws/parsegen.hpp"
#include "../syntree/tree_json.hpp"
#include "../tinyvm/trace_json.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <deque>
#include <random>
#include <set>

namespace tws::pipeline {

using detail::ordered_json;

namespace {

constexpr std::array<std::string_view, 10> subfase_names = {"Scanner", "Parser",   "Contrainer", "Generator",
                                                            "Source",  "Scanning", "Parsing",    "Constrain",
                                                            "GenCode", "Code"};
constexpr std::array<std::string_view, 5> slot_names = {"scanner", "parser", "contrainer", "generator", "source"};
constexpr std::array<std::string_view, 5> slot_files = {"scanner.scan", "grammar.grm", "constrain.con",
                                                        "codegen.gen", "source.src"};
constexpr std::array<std::string_view, 4> status_names = {"absent", "fresh", "stale", "failed"};

std::string dump(const ordered_json& j)
{
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

Diagnostic diag(const std::string& code, const std::string& message, SourcePos pos = {})
{
    return {code, message, pos};
}

Diagnostic from_spec_error(const SpecError& e)
{
    return diag(codes::spec_error, e.message(), e.position());
}

std::string escape_char(char32_t c)
{
    if (c == U'\n')
        return "\\n";
    if (c == U'\t')
        return "\\t";
    if (c < 0x20)
        return "U+" + std::to_string(static_cast<unsigned>(c));
    return utf8::encode(c);
}

ordered_json tokens_json(const std::vector<lexgen::Token>& tokens)
{
    ordered_json out = ordered_json::array();
    for (const auto& t : tokens)
        out.push_back({{"kind", t.kind}, {"lexeme", t.lexeme}, {"line", t.line}, {"col", t.col}});
    return out;
}

} // namespace

std::string_view subfase_name(Subfase s)
{
    return subfase_names[static_cast<std::size_t>(s)];
}

std::optional<Subfase> subfase_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < subfase_names.size(); ++i) {
        if (subfase_names[i] == name)
            return static_cast<Subfase>(i);
    }
    return std::nullopt;
}

std::string_view slot_name(Slot s)
{
    return slot_names[static_cast<std::size_t>(s)];
}

std::optional<Slot> slot_from_name(std::string_view name)
{
    for (std::size_t i = 0; i < slot_names.size(); ++i) {
        if (slot_names[i] == name)
            return static_cast<Slot>(i);
    }
    return std::nullopt;
}

std::string_view slot_file(Slot s)
{
    return slot_files[static_cast<std::size_t>(s)];
}

std::string_view status_name(Status s)
{
    return status_names[static_cast<std::size_t>(s)];
}

std::vector<Slot> dependencies(Subfase s)
{
    switch (s) {
    case Subfase::Scanner:
        return {Slot::Scanner};
    case Subfase::Parser:
        return {Slot::Parser};
    case Subfase::Contrainer:
        return {Slot::Contrainer};
    case Subfase::Generator:
        return {Slot::Generator};
    case Subfase::Source:
        return {Slot::Source};
    case Subfase::Scanning:
        return {Slot::Scanner, Slot::Source};
    case Subfase::Parsing:
        return {Slot::Scanner, Slot::Parser, Slot::Source};
    case Subfase::Constrain:
        return {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Source};
    case Subfase::GenCode:
    case Subfase::Code:
        return {Slot::Scanner, Slot::Parser, Slot::Contrainer, Slot::Generator, Slot::Source};
    }
    return {};
}

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

bool Phase1Report::ok() const
{
    return std::all_of(subfases.begin(), subfases.end(), [](const auto& s) { return s.status == Status::Fresh; });
}

bool Phase2Report::ok() const
{
    return !refusal
           && std::all_of(subfases.begin(), subfases.end(), [](const auto& s) { return s.status == Status::Fresh; });
}

// Compiled forms of the fresh Phase 1 artifacts and of the assembled program,
// keyed by the hash they were built from. Rebuilt on demand after a load.
struct Workspace::Compiled
{
    template <typename T>
    struct Entry
    {
        std::string hash;
        std::shared_ptr<const T> value;
    };

    Entry<lexgen::ScannerAutomaton> scanner;
    Entry<parsegen::LalrTable> table;
    Entry<constrainer::ConstrainSpec> constrain;
    Entry<codegen::GenSpec> gen;
    Entry<Program> program;
};

Workspace::Workspace(std::string id, std::string name)
    : id_(std::move(id)), name_(std::move(name)), compiled_(std::make_unique<Compiled>())
{
}

Workspace::~Workspace() = default;

Workspace::Workspace(const Workspace& o)
    : id_(o.id_), name_(o.name_), texts_(o.texts_), cache_(o.cache_),
      compiled_(std::make_unique<Compiled>(*o.compiled_))
{
}

Workspace& Workspace::operator=(const Workspace& o)
{
    if (this != &o) {
        id_ = o.id_;
        name_ = o.name_;
        texts_ = o.texts_;
        cache_ = o.cache_;
        compiled_ = std::make_unique<Compiled>(*o.compiled_);
    }
    return *this;
}

Workspace::Workspace(Workspace&&) noexcept = default;
Workspace& Workspace::operator=(Workspace&&) noexcept = default;

void Workspace::set_text(Slot s, std::optional<std::string> text)
{
    texts_[static_cast<std::size_t>(s)] = std::move(text);
}

std::string Workspace::input_hash(Subfase s) const
{
    std::string canonical = "tws-input-v1\n";
    for (Slot slot : dependencies(s)) {
        const auto& t = text(slot);
        canonical += slot_name(slot);
        if (t)
            canonical += "+" + std::to_string(t->size()) + ":" + *t;
        else
            canonical += "-";
        canonical += "\n";
    }
    return sha256_hex(canonical);
}

const Artifact* Workspace::artifact(Subfase s) const
{
    auto it = cache_.find(s);
    return it == cache_.end() ? nullptr : &it->second;
}

Status Workspace::status(Subfase s) const
{
    const Artifact* a = artifact(s);
    if (!a)
        return Status::Absent;
    if (a->hash != input_hash(s))
        return Status::Stale;
    return a->failed ? Status::Failed : Status::Fresh;
}

std::map<Subfase, Status> Workspace::status() const
{
    std::map<Subfase, Status> out;
    for (Subfase s : all_subfases)
        out[s] = status(s);
    return out;
}

void Workspace::restore_cache(std::map<Subfase, Artifact> cache)
{
    cache_ = std::move(cache);
    compiled_ = std::make_unique<Compiled>();
}

void Workspace::store(Subfase s, Artifact a)
{
    cache_[s] = std::move(a);
}

void Workspace::erase_from(Subfase first)
{
    for (Subfase s : all_subfases) {
        if (static_cast<int>(s) >= static_cast<int>(first))
            cache_.erase(s);
    }
}

SubfaseReport Workspace::report(Subfase s) const
{
    SubfaseReport r;
    r.subfase = s;
    r.status = status(s);
    if (const Artifact* a = artifact(s)) {
        r.diagnostics = a->diagnostics;
        r.payload = a->payload;
    }
    return r;
}

std::optional<Refusal> Workspace::refuse_unless_fresh(const std::vector<Subfase>& needed,
                                                      const std::string& action) const
{
    Refusal r;
    for (Subfase s : needed) {
        Status st = status(s);
        if (st != Status::Fresh)
            r.blocking.push_back(std::string(subfase_name(s)) + ": " + std::string(status_name(st)));
    }
    if (r.blocking.empty())
        return std::nullopt;
    r.code = codes::stale_upstream;
    r.message = "cannot " + action + ": upstream subfases are not fresh (";
    for (std::size_t i = 0; i < r.blocking.size(); ++i)
        r.message += (i ? ", " : "") + r.blocking[i];
    r.message += ")";
    return r;
}

// ---- Phase 1 -------------------------------------------------------------

namespace {

struct ScannerBuild
{
    std::shared_ptr<const lexgen::ScannerAutomaton> automaton;
    std::string payload;
};

ScannerBuild build_scanner_artifact(const std::string& text)
{
    auto spec = lexgen::parse_scanner_spec(text);
    auto dfa = std::make_shared<const lexgen::ScannerAutomaton>(lexgen::build_scanner(spec));
    ordered_json rules = ordered_json::array();
    for (const auto& r : spec.rules)
        rules.push_back({{"index", r.index},
                         {"name", r.name},
                         {"action", r.action == lexgen::RuleAction::Token ? "token" : "skip"}});
    ordered_json j;
    j["rules"] = std::move(rules);
    j["keywords"] = spec.keywords;
    j["dfa_states"] = dfa->states().size();
    return {dfa, dump(j)};
}

std::set<std::string> token_kinds(const lexgen::ScannerAutomaton& dfa)
{
    std::set<std::string> kinds;
    for (const auto& r : dfa.rules()) {
        if (r.action == lexgen::RuleAction::Token)
            kinds.insert(r.name);
    }
    for (const auto& [word, source] : dfa.promotions())
        kinds.insert(word);
    return kinds;
}

ordered_json conflicts_json(const std::vector<parsegen::Conflict>& conflicts)
{
    ordered_json out = ordered_json::array();
    for (const auto& c : conflicts)
        out.push_back({{"state", c.state},
                       {"terminal", c.terminal},
                       {"contenders", c.contenders},
                       {"resolution", c.resolution}});
    return out;
}

std::string describe_conflict(const parsegen::Conflict& c)
{
    std::string s = "state " + std::to_string(c.state) + " on " + c.terminal + ": ";
    for (std::size_t i = 0; i < c.contenders.size(); ++i)
        s += (i ? " vs " : "") + c.contenders[i];
    return s;
}

std::string parser_payload(const parsegen::LalrTable& table)
{
    ordered_json j;
    j["start"] = table.grammar().start;
    j["mode"] = table.grammar().mode == parsegen::ResolutionMode::Strict ? "strict" : "permissive";
    ordered_json prods = ordered_json::array();
    for (const auto& p : table.grammar().productions)
        prods.push_back(p.to_string());
    j["productions"] = std::move(prods);
    ordered_json terms = ordered_json::array();
    for (const auto& t : table.terminals())
        terms.push_back(t.key());
    j["terminals"] = std::move(terms);
    j["nonterminals"] = table.nonterminals();
    j["states"] = table.state_count();
    j["conflicts"] = conflicts_json(table.conflicts());
    return dump(j);
}

std::string constrain_payload(const constrainer::ConstrainSpec& spec)
{
    ordered_json j;
    j["types"] = spec.types;
    ordered_json kinds = ordered_json::array();
    for (const auto& [kind, rule] : spec.rules)
        kinds.push_back(kind);
    j["rules"] = std::move(kinds);
    j["strict"] = spec.strict;
    return dump(j);
}

std::string gen_payload(const codegen::GenSpec& spec)
{
    ordered_json kinds = ordered_json::array();
    for (const auto& [kind, actions] : spec.templates)
        kinds.push_back(kind);
    ordered_json j;
    j["templates"] = std::move(kinds);
    return dump(j);
}

} // namespace

Phase1Report Workspace::compile()
{
    Compiled& c = *compiled_;
    auto missing = [&](Subfase s) {
        store(s, Artifact{input_hash(s), true,
                          {diag(codes::missing_spec, "no " + std::string(subfase_name(s)) + " specification")},
                          "{}"});
    };

    // Scanner
    std::shared_ptr<const lexgen::ScannerAutomaton> dfa;
    if (!text(Slot::Scanner)) {
        missing(Subfase::Scanner);
    } else {
        Artifact a{input_hash(Subfase::Scanner), false, {}, "{}"};
        try {
            auto built = build_scanner_artifact(*text(Slot::Scanner));
            dfa = built.automaton;
            a.payload = built.payload;
            c.scanner = {a.hash, dfa};
        } catch (const SpecError& e) {
            a.failed = true;
            a.diagnostics.push_back(from_spec_error(e));
        }
        store(Subfase::Scanner, std::move(a));
    }

    // Parser, cross-linked against the scanner's token kinds
    if (!text(Slot::Parser)) {
        missing(Subfase::Parser);
    } else {
        Artifact a{input_hash(Subfase::Parser), false, {}, "{}"};
        try {
            auto grammar = parsegen::parse_grammar_spec(*text(Slot::Parser));
            auto table = std::make_shared<const parsegen::LalrTable>(parsegen::build_lalr(grammar));
            a.payload = parser_payload(*table);
            if (!dfa) {
                a.failed = true;
                a.diagnostics.push_back(
                    diag(codes::cross_link, "terminals cannot be checked: the Scanner specification failed"));
            } else {
                auto kinds = token_kinds(*dfa);
                for (const auto& p : grammar.productions) {
                    for (const auto& sym : p.rhs) {
                        if (sym.kind == parsegen::GrammarSymbol::Kind::NamedTerminal && !kinds.count(sym.name)) {
                            a.failed = true;
                            a.diagnostics.push_back(diag(codes::cross_link,
                                                         "terminal " + sym.name + " is not produced by the scanner",
                                                         p.pos));
                        }
                    }
                }
            }
            if (!a.failed)
                c.table = {a.hash, table};
        } catch (const parsegen::ConflictError& e) {
            a.failed = true;
            for (const auto& conflict : e.conflicts())
                a.diagnostics.push_back(diag(codes::conflict, describe_conflict(conflict)));
            ordered_json j;
            j["conflicts"] = conflicts_json(e.conflicts());
            a.payload = dump(j);
        } catch (const SpecError& e) {
            a.failed = true;
            a.diagnostics.push_back(from_spec_error(e));
        }
        // identical grammar errors are reported once
        a.diagnostics.erase(std::unique(a.diagnostics.begin(), a.diagnostics.end()), a.diagnostics.end());
        store(Subfase::Parser, std::move(a));
    }

    // Contrainer
    if (!text(Slot::Contrainer)) {
        missing(Subfase::Contrainer);
    } else {
        Artifact a{input_hash(Subfase::Contrainer), false, {}, "{}"};
        try {
            auto spec = std::make_shared<const constrainer::ConstrainSpec>(
                constrainer::parse_constrain_spec(*text(Slot::Contrainer)));
            a.payload = constrain_payload(*spec);
            c.constrain = {a.hash, spec};
        } catch (const SpecError& e) {
            a.failed = true;
            a.diagnostics.push_back(from_spec_error(e));
        }
        store(Subfase::Contrainer, std::move(a));
    }

    // Generator
    if (!text(Slot::Generator)) {
        missing(Subfase::Generator);
    } else {
        Artifact a{input_hash(Subfase::Generator), false, {}, "{}"};
        try {
            auto spec =
                std::make_shared<const codegen::GenSpec>(codegen::parse_codegen_spec(*text(Slot::Generator)));
            a.payload = gen_payload(*spec);
            c.gen = {a.hash, spec};
        } catch (const SpecError& e) {
            a.failed = true;
            a.diagnostics.push_back(from_spec_error(e));
        }
        store(Subfase::Generator, std::move(a));
    }

    Phase1Report r;
    for (Subfase s : phase1_subfases)
        r.subfases.push_back(report(s));
    return r;
}

Workspace::Compiled& Workspace::compiled()
{
    Compiled& c = *compiled_;
    std::string h = input_hash(Subfase::Scanner);
    if (c.scanner.hash != h || !c.scanner.value) {
        auto spec = lexgen::parse_scanner_spec(text(Slot::Scanner).value());
        c.scanner = {h, std::make_shared<const lexgen::ScannerAutomaton>(lexgen::build_scanner(spec))};
    }
    h = input_hash(Subfase::Parser);
    if (c.table.hash != h || !c.table.value) {
        auto grammar = parsegen::parse_grammar_spec(text(Slot::Parser).value());
        c.table = {h, std::make_shared<const parsegen::LalrTable>(parsegen::build_lalr(grammar))};
    }
    h = input_hash(Subfase::Contrainer);
    if (c.constrain.hash != h || !c.constrain.value)
        c.constrain = {h, std::make_shared<const constrainer::ConstrainSpec>(
                              constrainer::parse_constrain_spec(text(Slot::Contrainer).value()))};
    h = input_hash(Subfase::Generator);
    if (c.gen.hash != h || !c.gen.value)
        c.gen = {h, std::make_shared<const codegen::GenSpec>(codegen::parse_codegen_spec(text(Slot::Generator).value()))};
    return c;
}

// ---- Phase 2 -------------------------------------------------------------

Phase2Report Workspace::run(std::string source, bool optimize)
{
    set_source(std::move(source));
    return run(optimize);
}

Phase2Report Workspace::run(bool optimize)
{
    Phase2Report out;
    auto finish = [&] {
        for (Subfase s : phase2_subfases)
            out.subfases.push_back(report(s));
        return out;
    };

    out.refusal = refuse_unless_fresh({phase1_subfases.begin(), phase1_subfases.end()}, "run");
    if (out.refusal)
        return finish();

    Compiled& c = compiled();

    // Source
    if (!text(Slot::Source)) {
        store(Subfase::Source,
              Artifact{input_hash(Subfase::Source), true, {diag(codes::missing_source, "no source program")}, "{}"});
        erase_from(Subfase::Scanning);
        return finish();
    }
    const std::string& src = *text(Slot::Source);
    {
        ordered_json j;
        j["text"] = src;
        j["lines"] = std::count(src.begin(), src.end(), '\n') + (src.empty() || src.back() == '\n' ? 0 : 1);
        store(Subfase::Source, Artifact{input_hash(Subfase::Source), false, {}, dump(j)});
    }

    // Scanning
    std::vector<lexgen::Token> tokens;
    {
        Artifact a{input_hash(Subfase::Scanning), false, {}, "{}"};
        try {
            tokens = lexgen::scan(*c.scanner.value, src);
            ordered_json j;
            j["tokens"] = tokens_json(tokens);
            a.payload = dump(j);
        } catch (const lexgen::LexError& e) {
            a.failed = true;
            a.diagnostics.push_back(
                diag(codes::lex_error, "no token matches at '" + escape_char(e.offending()) + "'", e.position()));
        } catch (const std::invalid_argument& e) {
            a.failed = true;
            a.diagnostics.push_back(diag(codes::lex_error, e.what()));
        }
        bool failed = a.failed;
        store(Subfase::Scanning, std::move(a));
        if (failed) {
            erase_from(Subfase::Parsing);
            return finish();
        }
    }

    // Parsing
    SynTree tree;
    {
        Artifact a{input_hash(Subfase::Parsing), false, {}, "{}"};
        try {
            tree = parsegen::parse(*c.table.value, tokens);
            ordered_json j;
            j["tree"] = tree_to_json_value(tree);
            j["text"] = to_indented_text(tree);
            a.payload = dump(j);
        } catch (const parsegen::ParseError& e) {
            a.failed = true;
            std::string msg = "unexpected " + e.unexpected() + "; expected one of:";
            for (const auto& x : e.expected())
                msg += " " + x;
            a.diagnostics.push_back(diag(codes::parse_error, msg, e.position()));
        }
        bool failed = a.failed;
        store(Subfase::Parsing, std::move(a));
        if (failed) {
            erase_from(Subfase::Constrain);
            return finish();
        }
    }

    // Constrain
    constrainer::ConstrainResult checked = constrainer::constrain(*c.constrain.value, tree);
    {
        Artifact a{input_hash(Subfase::Constrain), !checked.diagnostics.empty(), {}, "{}"};
        for (const auto& d : checked.diagnostics)
            a.diagnostics.push_back(diag(d.code, d.message, d.pos));
        ordered_json syms = ordered_json::array();
        for (const auto& s : checked.symbols)
            syms.push_back({{"name", s.name},
                            {"type", s.type},
                            {"addr", s.addr},
                            {"depth", s.depth},
                            {"line", s.pos.line},
                            {"col", s.pos.col}});
        ordered_json j;
        j["tree"] = tree_to_json_value(checked.decorated);
        j["text"] = to_indented_text(checked.decorated);
        j["symbols"] = std::move(syms);
        a.payload = dump(j);
        bool failed = a.failed;
        store(Subfase::Constrain, std::move(a));
        if (failed) {
            erase_from(Subfase::GenCode);
            return finish();
        }
    }

    // GenCode, and the loadable program under Code
    {
        Artifact a{input_hash(Subfase::GenCode), false, {}, "{}"};
        try {
            codegen::SymbolicCode sym = codegen::generate(*c.gen.value, checked.decorated);
            std::size_t unoptimized = sym.code.size();
            if (optimize)
                sym = codegen::optimize(sym);
            auto prog = std::make_shared<Program>();
            prog->code = codegen::assemble(sym);
            prog->memory_size = std::max(checked.symbols.size(), codegen::memory_needed(prog->code));

            ordered_json j;
            j["optimized"] = optimize;
            j["unoptimized_length"] = unoptimized;
            j["listing"] = codegen::listing(sym);
            j["machine_listing"] = codegen::listing(prog->code);
            j["code"] = detail::code_json(prog->code);
            j["memory"] = prog->memory_size;
            a.payload = dump(j);

            ordered_json pj;
            pj["code"] = detail::code_json(prog->code);
            pj["memory"] = prog->memory_size;
            pj["last_run"] = nullptr;
            store(Subfase::Code, Artifact{input_hash(Subfase::Code), false, {}, dump(pj)});
            c.program = {input_hash(Subfase::Code), std::move(prog)};
        } catch (const codegen::GenError& e) {
            a.failed = true;
            a.diagnostics.push_back(diag(codes::gen_error, e.reason(), e.position()));
            cache_.erase(Subfase::Code);
        }
        store(Subfase::GenCode, std::move(a));
    }
    return finish();
}

// ---- Phase 3 -------------------------------------------------------------

std::optional<Program> Workspace::program(Refusal* why) const
{
    auto refusal = refuse_unless_fresh({Subfase::GenCode, Subfase::Code}, "interpret");
    if (refusal) {
        if (why)
            *why = *refusal;
        return std::nullopt;
    }
    const auto& c = *compiled_;
    std::string h = input_hash(Subfase::Code);
    if (c.program.value && c.program.hash == h)
        return *c.program.value;
    auto j = ordered_json::parse(artifact(Subfase::Code)->payload);
    Program p;
    p.code = detail::code_from_json(j.at("code"));
    p.memory_size = j.at("memory").get<std::size_t>();
    return p;
}

Phase3Report Workspace::interpret(std::string_view input_text, const Limits& limits)
{
    Phase3Report r;
    r.input = std::string(input_text);
    Refusal why;
    auto prog = program(&why);
    if (!prog) {
        r.refusal = why;
        return r;
    }
    r.memory_size = prog->memory_size;
    auto values = vm::parse_input(input_text);
    if (!values) {
        r.result.trap = vm::Trap{vm::TrapKind::InputMalformed, 0, 0};
    } else {
        std::deque<std::int64_t> queue(values->begin(), values->end());
        vm::MachineState state = vm::load(std::move(prog->code), prog->memory_size);
        r.result = vm::run(state, queue, limits.max_steps, limits.max_trace);
    }

    auto& code_artifact = cache_.at(Subfase::Code);
    auto j = ordered_json::parse(code_artifact.payload);
    ordered_json last;
    last["input"] = r.input;
    last["output"] = r.result.output;
    last["exit"] = r.result.trap ? std::string(vm::trap_name(r.result.trap->kind)) : "halted";
    last["steps"] = r.result.steps;
    j["last_run"] = std::move(last);
    code_artifact.payload = dump(j);
    return r;
}

Workspace create_workspace(std::string name)
{
    return Workspace(new_workspace_id(), std::move(name));
}

std::string new_workspace_id()
{
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    static const char* hex = "0123456789abcdef";
    std::string id;
    for (int part = 0; part < 2; ++part) {
        std::uint64_t v = rng();
        for (int i = 0; i < 16; ++i, v >>= 4)
            id += hex[v & 15];
    }
    return id;
}

// ---- JSON renderings -----------------------------------------------------

namespace {

ordered_json subfase_json(const SubfaseReport& s)
{
    ordered_json diags = ordered_json::array();
    for (const auto& d : s.diagnostics)
        diags.push_back(detail::diagnostic_json(d));
    return {{"name", std::string(subfase_name(s.subfase))},
            {"status", std::string(status_name(s.status))},
            {"diagnostics", std::move(diags)},
            {"payload", ordered_json::parse(s.payload)}};
}

ordered_json refusal_json(const Refusal& r)
{
    return {{"code", r.code}, {"message", r.message}, {"blocking", r.blocking}};
}

} // namespace

std::string to_json(const Phase1Report& r)
{
    ordered_json j;
    j["phase"] = "Compiler";
    j["ok"] = r.ok();
    j["subfases"] = ordered_json::array();
    for (const auto& s : r.subfases)
        j["subfases"].push_back(subfase_json(s));
    return dump(j);
}

std::string to_json(const Phase2Report& r)
{
    ordered_json j;
    j["phase"] = "Run";
    j["ok"] = r.ok();
    j["refusal"] = r.refusal ? refusal_json(*r.refusal) : ordered_json(nullptr);
    j["subfases"] = ordered_json::array();
    for (const auto& s : r.subfases)
        j["subfases"].push_back(subfase_json(s));
    return dump(j);
}

std::string to_json(const Phase3Report& r)
{
    ordered_json j;
    j["phase"] = "Interpreter";
    j["subfase"] = "Code";
    j["refusal"] = r.refusal ? refusal_json(*r.refusal) : ordered_json(nullptr);
    j["input"] = r.input;
    if (r.refusal) {
        j["exit"] = nullptr;
    } else {
        j["exit"] = r.result.trap ? std::string(vm::trap_name(r.result.trap->kind)) : "halted";
    }
    j["trap"] = r.result.trap ? vm::trap_json(*r.result.trap) : ordered_json(nullptr);
    j["output"] = r.result.output;
    j["steps"] = r.result.steps;
    j["trace_truncated"] = r.result.trace_truncated;
    ordered_json trace = ordered_json::array();
    for (const auto& rec : r.result.trace)
        trace.push_back(vm::step_json(rec));
    j["trace"] = std::move(trace);
    return dump(j);
}

std::string to_json(const Refusal& r)
{
    return dump(refusal_json(r));
}

std::string status_json(const Workspace& ws)
{
    ordered_json j;
    for (const auto& [s, st] : ws.status())
        j[std::string(subfase_name(s))] = std::string(status_name(st));
    return dump(j);
}

} // namespace tws::pipeline
