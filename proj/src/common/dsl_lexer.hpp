#pragma once

// Token stream shared by the grammar, constrainer and generator spec readers.
// `--` starts a comment that runs to end of line.

#include "tws/common.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tws::detail {

enum class DslTok
{
    Ident,
    Int,
    Quoted,
    Punct,
    End,
};

struct DslToken
{
    DslTok kind;
    std::string text;
    SourcePos pos;
};

std::vector<DslToken> lex_dsl(std::string_view text);

/// Cursor with the expectation helpers every spec reader needs.
class DslCursor
{
  public:
    explicit DslCursor(std::vector<DslToken> toks) : toks_(std::move(toks)) {}

    const DslToken& peek(std::size_t ahead = 0) const
    {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const DslToken& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == DslTok::End; }

    bool is_punct(std::string_view p, std::size_t ahead = 0) const
    {
        const auto& t = peek(ahead);
        return t.kind == DslTok::Punct && t.text == p;
    }
    bool is_ident(std::string_view word, std::size_t ahead = 0) const
    {
        const auto& t = peek(ahead);
        return t.kind == DslTok::Ident && t.text == word;
    }
    bool accept_punct(std::string_view p)
    {
        if (!is_punct(p))
            return false;
        next();
        return true;
    }

    const DslToken& expect_punct(std::string_view p);
    const DslToken& expect_ident(std::string_view what = "identifier");
    const DslToken& expect_int();
    void expect_word(std::string_view word);

    [[noreturn]] void fail(const std::string& message) const;

  private:
    std::vector<DslToken> toks_;
    std::size_t pos_ = 0;
};

std::string describe(const DslToken& tok);

} // namespace tws::detail
