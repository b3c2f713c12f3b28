#include "dsl_lexer.hpp"

#include <cctype>

namespace tws::detail {

namespace {

bool ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_part(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool digit(char c)
{
    return c >= '0' && c <= '9';
}

} // namespace

std::vector<DslToken> lex_dsl(std::string_view text)
{
    std::vector<DslToken> out;
    std::size_t i = 0;
    SourcePos pos;

    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            auto c = static_cast<unsigned char>(text[i]);
            if (c == '\n') {
                ++pos.line;
                pos.col = 1;
            } else if ((c & 0xC0) != 0x80) {
                ++pos.col;
            }
        }
    };

    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (text.substr(i, 2) == "--") {
            while (i < text.size() && text[i] != '\n')
                advance(1);
            continue;
        }
        SourcePos start = pos;
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_part(text[j]))
                ++j;
            out.push_back({DslTok::Ident, std::string(text.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        if (digit(c) || (c == '-' && i + 1 < text.size() && digit(text[i + 1]))) {
            std::size_t j = i + 1;
            while (j < text.size() && digit(text[j]))
                ++j;
            out.push_back({DslTok::Int, std::string(text.substr(i, j - i)), start});
            advance(j - i);
            continue;
        }
        if (c == '\'') {
            std::string value;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < text.size() && text[j] != '\n') {
                if (text[j] == '\\' && j + 1 < text.size() && (text[j + 1] == '\'' || text[j + 1] == '\\')) {
                    value.push_back(text[j + 1]);
                    j += 2;
                    continue;
                }
                if (text[j] == '\'') {
                    closed = true;
                    break;
                }
                value.push_back(text[j++]);
            }
            if (!closed)
                throw SpecError("unterminated quoted literal", start);
            if (value.empty())
                throw SpecError("empty quoted literal", start);
            out.push_back({DslTok::Quoted, std::move(value), start});
            advance(j + 1 - i);
            continue;
        }
        static constexpr std::string_view two[] = {"->", "=>", "=="};
        bool matched = false;
        for (auto p : two) {
            if (text.substr(i, 2) == p) {
                out.push_back({DslTok::Punct, std::string(p), start});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched)
            continue;
        static constexpr std::string_view one = "|(){};:,%$";
        if (one.find(c) != std::string_view::npos) {
            out.push_back({DslTok::Punct, std::string(1, c), start});
            advance(1);
            continue;
        }
        throw SpecError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({DslTok::End, "", pos});
    return out;
}

std::string describe(const DslToken& tok)
{
    switch (tok.kind) {
    case DslTok::End:
        return "end of file";
    case DslTok::Quoted:
        return "'" + tok.text + "'";
    default:
        return "'" + tok.text + "'";
    }
}

const DslToken& DslCursor::expect_punct(std::string_view p)
{
    if (!is_punct(p))
        fail("expected '" + std::string(p) + "' but found " + describe(peek()));
    return next();
}

const DslToken& DslCursor::expect_ident(std::string_view what)
{
    if (peek().kind != DslTok::Ident)
        fail("expected " + std::string(what) + " but found " + describe(peek()));
    return next();
}

const DslToken& DslCursor::expect_int()
{
    if (peek().kind != DslTok::Int)
        fail("expected integer but found " + describe(peek()));
    return next();
}

void DslCursor::expect_word(std::string_view word)
{
    if (!is_ident(word))
        fail("expected '" + std::string(word) + "' but found " + describe(peek()));
    next();
}

void DslCursor::fail(const std::string& message) const
{
    throw SpecError(message, peek().pos);
}

} // namespace tws::detail
