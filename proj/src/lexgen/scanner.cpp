#include "nfa.hpp"

#include <algorithm>
#include <map>

namespace tws::lexgen {

using detail::Nfa;

namespace {

struct RawEdge
{
    char32_t lo;
    char32_t hi;
    std::uint32_t target;
};

/// Splits the code-point line at every edge boundary and returns, per elementary
/// interval, the NFA states reachable over it (before closure).
std::vector<std::pair<CodeRange, std::vector<std::uint32_t>>> partition(std::vector<RawEdge> edges)
{
    std::vector<char32_t> cuts;
    for (const auto& e : edges) {
        cuts.push_back(e.lo);
        if (e.hi < max_code_point)
            cuts.push_back(e.hi + 1);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::pair<CodeRange, std::vector<std::uint32_t>>> out;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        char32_t lo = cuts[i];
        char32_t hi = i + 1 < cuts.size() ? cuts[i + 1] - 1 : max_code_point;
        std::vector<std::uint32_t> targets;
        for (const auto& e : edges) {
            if (e.lo <= lo && hi <= e.hi)
                targets.push_back(e.target);
        }
        if (!targets.empty())
            out.push_back({{lo, hi}, std::move(targets)});
    }
    return out;
}

} // namespace

bool ScannerSpec::has_token_rule(std::string_view name) const
{
    return std::any_of(rules.begin(), rules.end(),
                       [&](const ScanRule& r) { return r.action == RuleAction::Token && r.name == name; });
}

std::vector<std::string> ScannerSpec::token_kinds() const
{
    std::vector<std::string> kinds;
    for (const auto& r : rules) {
        if (r.action == RuleAction::Token)
            kinds.push_back(r.name);
    }
    for (const auto& [source, words] : keywords)
        kinds.insert(kinds.end(), words.begin(), words.end());
    return kinds;
}

ScannerAutomaton build_scanner(const ScannerSpec& spec, std::size_t state_cap)
{
    Nfa nfa = Nfa::from_spec(spec.rules);

    ScannerAutomaton automaton;
    automaton.rules_ = spec.rules;
    for (const auto& [source, words] : spec.keywords) {
        for (const auto& w : words)
            automaton.promotions_[w] = source;
    }

    std::map<std::vector<std::uint32_t>, std::uint32_t> ids;
    std::vector<std::vector<std::uint32_t>> sets;

    auto intern = [&](std::vector<std::uint32_t> set) -> std::uint32_t {
        auto it = ids.find(set);
        if (it != ids.end())
            return it->second;
        if (sets.size() >= state_cap)
            throw SpecError("scanner automaton exceeds " + std::to_string(state_cap) + " states");
        auto id = static_cast<std::uint32_t>(sets.size());
        ids.emplace(set, id);
        sets.push_back(std::move(set));
        automaton.states_.emplace_back();
        return id;
    };

    intern(nfa.closure({0}));
    for (std::size_t cur = 0; cur < sets.size(); ++cur) {
        std::vector<RawEdge> edges;
        for (auto s : sets[cur]) {
            for (const auto& e : nfa.states[s].edges)
                edges.push_back({e.range.lo, e.range.hi, e.target});
        }
        std::vector<DfaTransition> transitions;
        for (auto& [range, targets] : partition(std::move(edges))) {
            auto target = intern(nfa.closure(std::move(targets)));
            if (!transitions.empty() && transitions.back().target == target && transitions.back().hi + 1 == range.lo)
                transitions.back().hi = range.hi;
            else
                transitions.push_back({range.lo, range.hi, target});
        }
        // `intern` may have grown the vector; index again rather than holding a reference.
        automaton.states_[cur].transitions = std::move(transitions);
        automaton.states_[cur].accept = nfa.accepting_rule(sets[cur]);
    }
    return automaton;
}

std::optional<std::uint32_t> ScannerAutomaton::move(std::uint32_t state, char32_t cp) const
{
    const auto& ts = states_[state].transitions;
    auto it = std::upper_bound(ts.begin(), ts.end(), cp, [](char32_t c, const DfaTransition& t) { return c < t.lo; });
    if (it == ts.begin())
        return std::nullopt;
    --it;
    if (cp > it->hi)
        return std::nullopt;
    return it->target;
}

LexError::LexError(SourcePos pos, char32_t offending)
    : std::runtime_error(to_string(pos) + ": no token matches '" + utf8::encode(offending) + "'")
    , pos_(pos)
    , offending_(offending)
{
}

std::optional<Match> longest_match(const ScannerAutomaton& automaton, std::u32string_view source,
                                   std::size_t offset)
{
    std::optional<Match> best;
    std::uint32_t state = automaton.start();
    for (std::size_t i = offset; i < source.size(); ++i) {
        auto next = automaton.move(state, source[i]);
        if (!next)
            break;
        state = *next;
        if (auto acc = automaton.states()[state].accept)
            best = Match{i + 1 - offset, *acc};
    }
    return best;
}

std::vector<Lexeme> segment(const ScannerAutomaton& automaton, std::u32string_view source)
{
    std::vector<Lexeme> out;
    std::size_t offset = 0;
    SourcePos pos;
    while (offset < source.size()) {
        auto m = longest_match(automaton, source, offset);
        if (!m)
            throw LexError(pos, source[offset]);
        bool skipped = automaton.rules()[m->rule].action == RuleAction::Skip;
        out.push_back({offset, *m, skipped});
        for (std::size_t i = offset; i < offset + m->length; ++i) {
            if (source[i] == U'\n') {
                ++pos.line;
                pos.col = 1;
            } else {
                ++pos.col;
            }
        }
        offset += m->length;
    }
    return out;
}

std::vector<Token> scan(const ScannerAutomaton& automaton, std::string_view source)
{
    std::u32string text = utf8::decode(source);
    std::vector<Token> tokens;
    SourcePos pos;
    for (const auto& lx : segment(automaton, text)) {
        std::u32string_view span(text.data() + lx.offset, lx.match.length);
        if (!lx.skipped) {
            const auto& rule = automaton.rules()[lx.match.rule];
            std::string lexeme = utf8::encode(span);
            std::string kind = rule.name;
            auto promo = automaton.promotions().find(lexeme);
            if (promo != automaton.promotions().end() && promo->second == rule.name)
                kind = lexeme;
            tokens.push_back({std::move(kind), std::move(lexeme), pos.line, pos.col});
        }
        for (char32_t c : span) {
            if (c == U'\n') {
                ++pos.line;
                pos.col = 1;
            } else {
                ++pos.col;
            }
        }
    }
    tokens.push_back({std::string(eof_kind), "", pos.line, pos.col});
    return tokens;
}

NfaSimulator::NfaSimulator(const ScannerSpec& spec) : nfa_(std::make_unique<Nfa>(Nfa::from_spec(spec.rules))) {}
NfaSimulator::~NfaSimulator() = default;
NfaSimulator::NfaSimulator(NfaSimulator&&) noexcept = default;
NfaSimulator& NfaSimulator::operator=(NfaSimulator&&) noexcept = default;

std::optional<Match> NfaSimulator::longest(std::u32string_view source, std::size_t offset) const
{
    const Nfa& nfa = *nfa_;
    std::optional<Match> best;
    auto current = nfa.closure({0});
    for (std::size_t i = offset; i < source.size() && !current.empty(); ++i) {
        std::vector<std::uint32_t> moved;
        for (auto s : current) {
            for (const auto& e : nfa.states[s].edges) {
                if (e.range.lo <= source[i] && source[i] <= e.range.hi)
                    moved.push_back(e.target);
            }
        }
        current = nfa.closure(std::move(moved));
        if (auto acc = nfa.accepting_rule(current))
            best = Match{i + 1 - offset, *acc};
    }
    return best;
}

std::optional<Match> simulate_nfa(const ScannerSpec& spec, std::u32string_view source, std::size_t offset)
{
    return NfaSimulator(spec).longest(source, offset);
}

} // namespace tws::lexgen
