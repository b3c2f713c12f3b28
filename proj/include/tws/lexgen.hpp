#pragma once

// Scanner generator: scanner spec -> regex ASTs -> Thompson NFA -> DFA, plus
// the maximal-munch tokenizer that runs the DFA.

#include "tws/common.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tws::lexgen {

struct CodeRange
{
    char32_t lo;
    char32_t hi;

    friend bool operator==(const CodeRange&, const CodeRange&) = default;
};

inline constexpr char32_t max_code_point = 0x10FFFF;

struct RegexAst
{
    enum class Kind
    {
        Empty,
        Literal,
        Class,
        Any,
        Concat,
        Alt,
        Star,
        Plus,
        Optional,
    };

    Kind kind = Kind::Empty;
    char32_t ch = 0;                // Literal
    bool negated = false;           // Class
    std::vector<CodeRange> ranges;  // Class
    std::vector<RegexAst> children; // Concat/Alt (>=2), Star/Plus/Optional (1)

    bool nullable() const;

    /// Positive code-point ranges matched by a single-character node
    /// (Literal, Class, Any), sorted and disjoint.
    std::vector<CodeRange> char_set() const;

    friend bool operator==(const RegexAst&, const RegexAst&) = default;
};

/// Parses the body of a `/.../` pattern. `origin` is the position of the first
/// character of the body, used for error positions.
RegexAst parse_regex(std::u32string_view body, SourcePos origin = {});

enum class RuleAction
{
    Token,
    Skip,
};

struct ScanRule
{
    std::size_t index = 0;
    std::string name;
    RuleAction action = RuleAction::Token;
    RegexAst pattern;
};

struct ScannerSpec
{
    std::vector<ScanRule> rules;
    /// source TOKEN rule name -> reserved words promoted out of it
    std::map<std::string, std::vector<std::string>> keywords;

    bool has_token_rule(std::string_view name) const;
    /// Every kind a Token can carry: TOKEN rule names plus promoted keywords.
    std::vector<std::string> token_kinds() const;
};

ScannerSpec parse_scanner_spec(std::string_view text);

struct Token
{
    std::string kind;
    std::string lexeme;
    int line = 1;
    int col = 1;

    SourcePos pos() const { return {line, col}; }
    friend bool operator==(const Token&, const Token&) = default;
};

inline constexpr std::string_view eof_kind = "$";

struct DfaTransition
{
    char32_t lo;
    char32_t hi;
    std::uint32_t target;
};

struct DfaState
{
    std::vector<DfaTransition> transitions; // sorted by lo, disjoint
    std::optional<std::size_t> accept;      // lowest rule index among merged NFA accepts
};

class ScannerAutomaton
{
  public:
    static constexpr std::size_t default_state_cap = 100000;

    const std::vector<DfaState>& states() const { return states_; }
    std::uint32_t start() const { return 0; }
    std::optional<std::uint32_t> move(std::uint32_t state, char32_t cp) const;

    const std::vector<ScanRule>& rules() const { return rules_; }
    const std::map<std::string, std::string>& promotions() const { return promotions_; }

  private:
    friend ScannerAutomaton build_scanner(const ScannerSpec&, std::size_t);

    std::vector<DfaState> states_;
    std::vector<ScanRule> rules_;
    std::map<std::string, std::string> promotions_; // lexeme -> source rule name
};

ScannerAutomaton build_scanner(const ScannerSpec& spec,
                               std::size_t state_cap = ScannerAutomaton::default_state_cap);

class LexError : public std::runtime_error
{
  public:
    LexError(SourcePos pos, char32_t offending);

    SourcePos position() const noexcept { return pos_; }
    char32_t offending() const noexcept { return offending_; }

  private:
    SourcePos pos_;
    char32_t offending_;
};

/// Result of a single longest-match attempt: length in code points and rule index.
struct Match
{
    std::size_t length = 0;
    std::size_t rule = 0;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Longest match of the DFA starting at `offset`, ties broken by rule index.
std::optional<Match> longest_match(const ScannerAutomaton& automaton, std::u32string_view source,
                                   std::size_t offset);

std::vector<Token> scan(const ScannerAutomaton& automaton, std::string_view source);

/// A token or skipped span with its code-point offset; what `scan` consumed, in order.
struct Lexeme
{
    std::size_t offset = 0;
    Match match;
    bool skipped = false;
};

/// Same maximal munch as `scan` but reports raw spans, including skipped ones.
std::vector<Lexeme> segment(const ScannerAutomaton& automaton, std::u32string_view source);

namespace detail {
struct Nfa;
}

/// Brute-force oracle: epsilon-closure simulation of the union NFA, independent of
/// the subset construction. `offset` is in code points.
std::optional<Match> simulate_nfa(const ScannerSpec& spec, std::u32string_view source,
                                  std::size_t offset);

/// `simulate_nfa` with the NFA built once, for repeated queries against one spec.
class NfaSimulator
{
  public:
    explicit NfaSimulator(const ScannerSpec& spec);
    ~NfaSimulator();
    NfaSimulator(NfaSimulator&&) noexcept;
    NfaSimulator& operator=(NfaSimulator&&) noexcept;

    std::optional<Match> longest(std::u32string_view source, std::size_t offset) const;

  private:
    std::unique_ptr<detail::Nfa> nfa_;
};

} // namespace tws::lexgen
