#pragma once

// Grammar spec reader, LALR(1) table construction and the tree-building
// shift-reduce driver. An Earley recognizer over the same grammar serves as
// the reference for acceptance checks.

#include "tws/common.hpp"
#include "tws/lexgen.hpp"
#include "tws/syntree.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tws::parsegen {

struct GrammarSymbol
{
    enum class Kind
    {
        Nonterminal,
        NamedTerminal,
        LiteralTerminal,
    };

    Kind kind = Kind::Nonterminal;
    std::string name;

    bool is_terminal() const { return kind != Kind::Nonterminal; }
    /// Named terminals and nonterminals print bare, literals quoted: `'+'`.
    std::string key() const;
    /// Trees pushed when this symbol is shifted or reduced to.
    int push_count() const { return kind == Kind::LiteralTerminal ? 0 : 1; }

    friend bool operator==(const GrammarSymbol&, const GrammarSymbol&) = default;
    friend auto operator<=>(const GrammarSymbol&, const GrammarSymbol&) = default;
};

struct TreeDirective
{
    std::string node;
    std::size_t arity = 0;

    friend bool operator==(const TreeDirective&, const TreeDirective&) = default;
};

struct Production
{
    std::size_t index = 0;
    std::string lhs;
    std::vector<GrammarSymbol> rhs;
    std::optional<TreeDirective> directive;
    SourcePos pos;

    int push_count() const;
    std::string to_string() const;
};

enum class ResolutionMode
{
    Strict,
    Permissive,
};

struct GrammarSpec
{
    std::string start;
    std::vector<Production> productions;
    ResolutionMode mode = ResolutionMode::Strict;

    /// Distinct terminals in order of first appearance.
    std::vector<GrammarSymbol> terminals() const;
    /// Distinct nonterminals in order of first definition.
    std::vector<std::string> nonterminals() const;
};

GrammarSpec parse_grammar_spec(std::string_view text);

inline const std::string end_marker = "$";

struct GrammarSets
{
    std::set<std::string> nullable;
    std::map<std::string, std::set<std::string>> first;  // nonterminal -> terminal keys
    std::map<std::string, std::set<std::string>> follow; // nonterminal -> terminal keys (may hold "$")
};

GrammarSets compute_nullable_first_follow(const GrammarSpec& grammar);

struct Action
{
    enum class Kind : std::uint8_t
    {
        Error,
        Shift,
        Reduce,
        Accept,
    };

    Kind kind = Kind::Error;
    std::uint32_t target = 0; // state for Shift, production for Reduce

    friend bool operator==(const Action&, const Action&) = default;
};

struct Conflict
{
    std::size_t state = 0;
    std::string terminal;
    std::vector<std::string> contenders;
    std::string resolution;
};

/// Strict-mode failure: carries every conflict found.
class ConflictError : public SpecError
{
  public:
    explicit ConflictError(std::vector<Conflict> conflicts);
    const std::vector<Conflict>& conflicts() const noexcept { return conflicts_; }

  private:
    std::vector<Conflict> conflicts_;
};

namespace detail {
class LalrBuilder;
}

class LalrTable
{
  public:
    const GrammarSpec& grammar() const { return grammar_; }
    std::size_t state_count() const { return state_count_; }

    /// Terminal 0 is the end marker "$".
    const std::vector<GrammarSymbol>& terminals() const { return terminals_; }
    const std::vector<std::string>& nonterminals() const { return nonterminals_; }

    Action action(std::size_t state, std::size_t terminal) const
    {
        return actions_[state * terminals_.size() + terminal];
    }
    std::optional<std::uint32_t> go(std::size_t state, std::size_t nonterminal) const;

    const std::vector<Conflict>& conflicts() const { return conflicts_; }

    std::optional<std::size_t> terminal_index(std::string_view key) const;
    /// Maps a scanned token onto a grammar terminal: named terminal by kind, then
    /// literal by kind (promoted keywords), then literal by lexeme.
    std::optional<std::size_t> classify(const lexgen::Token& token) const;

    /// Terminal keys with a non-error action in `state`.
    std::vector<std::string> expected(std::size_t state) const;

    std::size_t lhs_of(std::size_t production) const { return prod_lhs_[production]; }
    std::size_t rhs_length(std::size_t production) const { return prod_len_[production]; }

    friend bool operator==(const LalrTable& a, const LalrTable& b)
    {
        return a.actions_ == b.actions_ && a.gotos_ == b.gotos_ && a.terminals_ == b.terminals_;
    }

  private:
    friend class detail::LalrBuilder;

    GrammarSpec grammar_;
    std::size_t state_count_ = 0;
    std::vector<GrammarSymbol> terminals_;
    std::vector<std::string> nonterminals_;
    std::vector<Action> actions_;
    std::vector<std::int32_t> gotos_;
    std::vector<Conflict> conflicts_;
    std::vector<std::size_t> prod_lhs_;
    std::vector<std::size_t> prod_len_;
    std::map<std::string, std::size_t, std::less<>> terminal_ids_;
};

/// Throws ConflictError (strict mode) or SpecError (tree-push rule violation).
LalrTable build_lalr(const GrammarSpec& grammar);

class ParseError : public std::runtime_error
{
  public:
    ParseError(SourcePos pos, std::string unexpected, std::vector<std::string> expected);

    SourcePos position() const noexcept { return pos_; }
    const std::string& unexpected() const noexcept { return unexpected_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

  private:
    SourcePos pos_;
    std::string unexpected_;
    std::vector<std::string> expected_;
};

/// Called after every shift and reduce with the tree-stack size and the push
/// total of the symbols currently on the parse stack.
using ParseObserver = std::function<void(std::size_t tree_stack, std::size_t symbol_pushes)>;

SynTree parse(const LalrTable& table, const std::vector<lexgen::Token>& tokens,
              const ParseObserver& observer = {});

/// Table-driven recognizer over terminal indices; copyable so callers can
/// explore extensions of a prefix.
class LalrRecognizer
{
  public:
    explicit LalrRecognizer(const LalrTable& table);

    /// Feeds one terminal; returns false (and becomes dead) on a syntax error.
    bool feed(std::size_t terminal);
    bool dead() const { return dead_; }
    /// Whether the input so far is a complete sentence.
    bool accepts() const;

  private:
    const LalrTable* table_;
    std::vector<std::uint32_t> states_;
    bool dead_ = false;
};

/// Incremental Earley recognizer. Terminal keys follow GrammarSymbol::key().
class EarleyRecognizer
{
  public:
    explicit EarleyRecognizer(const GrammarSpec& grammar);
    ~EarleyRecognizer();
    EarleyRecognizer(EarleyRecognizer&&) noexcept;
    EarleyRecognizer& operator=(EarleyRecognizer&&) noexcept;

    void feed(std::string_view terminal_key);
    /// Drops the most recently fed terminal.
    void unfeed();
    bool dead() const;
    bool accepts() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

bool earley_recognize(const GrammarSpec& grammar, const std::vector<std::string>& terminal_keys);

} // namespace tws::parsegen
