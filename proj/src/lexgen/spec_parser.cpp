#include "tws/lexgen.hpp"

#include <set>

namespace tws::lexgen {

namespace {

bool is_space(char32_t c)
{
    return c == U' ' || c == U'\t' || c == U'\r';
}

bool is_ident_start(char32_t c)
{
    return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || c == U'_';
}

bool is_ident_part(char32_t c)
{
    return is_ident_start(c) || (c >= U'0' && c <= U'9');
}

class LineReader
{
  public:
    LineReader(std::u32string_view line, int number) : line_(line), number_(number) {}

    void skip_space()
    {
        while (pos_ < line_.size() && is_space(line_[pos_]))
            ++pos_;
    }

    bool done() const { return pos_ >= line_.size(); }
    char32_t peek() const { return line_[pos_]; }
    SourcePos here() const { return {number_, static_cast<int>(pos_) + 1}; }

    std::string word()
    {
        skip_space();
        std::size_t start = pos_;
        while (pos_ < line_.size() && !is_space(line_[pos_]))
            ++pos_;
        return utf8::encode(line_.substr(start, pos_ - start));
    }

    std::string identifier(const char* what)
    {
        skip_space();
        if (done() || !is_ident_start(peek()))
            fail(std::string("expected ") + what);
        std::size_t start = pos_;
        while (pos_ < line_.size() && is_ident_part(line_[pos_]))
            ++pos_;
        return utf8::encode(line_.substr(start, pos_ - start));
    }

    void expect(char32_t c)
    {
        skip_space();
        if (done() || peek() != c)
            fail("expected '" + utf8::encode(c) + "'");
        ++pos_;
    }

    /// Reads `/body/` and returns the body with its starting position.
    std::pair<std::u32string_view, SourcePos> delimited_regex()
    {
        expect(U'/');
        SourcePos origin = here();
        std::size_t start = pos_;
        while (pos_ < line_.size() && line_[pos_] != U'/') {
            if (line_[pos_] == U'\\')
                ++pos_;
            ++pos_;
        }
        if (pos_ >= line_.size())
            fail("unterminated regex");
        auto body = line_.substr(start, pos_ - start);
        ++pos_;
        return {body, origin};
    }

    void expect_end()
    {
        skip_space();
        if (!done())
            fail("unexpected text after directive");
    }

    [[noreturn]] void fail(const std::string& message) const { throw SpecError(message, here()); }

  private:
    std::u32string_view line_;
    int number_;
    std::size_t pos_ = 0;
};

} // namespace

ScannerSpec parse_scanner_spec(std::string_view text)
{
    std::u32string decoded;
    try {
        decoded = utf8::decode(text);
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }

    ScannerSpec spec;
    std::set<std::string> token_names;
    std::set<std::string> reserved;
    struct PendingPromotion
    {
        std::string source;
        SourcePos pos;
    };
    std::vector<PendingPromotion> promotions;

    int number = 0;
    std::size_t begin = 0;
    while (begin <= decoded.size()) {
        std::size_t end = decoded.find(U'\n', begin);
        if (end == std::u32string::npos)
            end = decoded.size();
        ++number;
        std::u32string_view line(decoded.data() + begin, end - begin);
        begin = end + 1;

        LineReader reader(line, number);
        reader.skip_space();
        if (reader.done())
            continue;
        if (line.substr(static_cast<std::size_t>(reader.here().col - 1), 2) == U"--")
            continue;

        SourcePos directive_pos = reader.here();
        std::string directive = reader.identifier("directive");
        if (directive == "token" || directive == "skip") {
            SourcePos name_pos = reader.here();
            std::string name = reader.identifier("rule name");
            auto [body, origin] = reader.delimited_regex();
            reader.expect_end();
            RegexAst pattern = parse_regex(body, origin);
            if (pattern.nullable())
                throw SpecError("nullable pattern for rule " + name, origin);
            RuleAction action = directive == "token" ? RuleAction::Token : RuleAction::Skip;
            if (action == RuleAction::Token && !token_names.insert(name).second)
                throw SpecError("duplicate token rule " + name, name_pos);
            spec.rules.push_back({spec.rules.size(), std::move(name), action, std::move(pattern)});
        } else if (directive == "keywords") {
            SourcePos source_pos = reader.here();
            std::string source = reader.identifier("rule name");
            reader.expect(U':');
            auto& words = spec.keywords[source];
            for (;;) {
                reader.skip_space();
                if (reader.done())
                    break;
                SourcePos word_pos = reader.here();
                std::string w = reader.word();
                if (!reserved.insert(w).second)
                    throw SpecError("reserved word '" + w + "' listed twice", word_pos);
                words.push_back(std::move(w));
            }
            promotions.push_back({source, source_pos});
        } else {
            throw SpecError("unknown directive '" + directive + "'", directive_pos);
        }
    }

    for (const auto& p : promotions) {
        if (!token_names.count(p.source))
            throw SpecError("keywords promoted from unknown token rule " + p.source, p.pos);
    }
    return spec;
}

} // namespace tws::lexgen
