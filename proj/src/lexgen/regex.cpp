#include "tws/lexgen.hpp"

#include <algorithm>
#include <cctype>

namespace tws::lexgen {

namespace {

std::vector<CodeRange> normalize(std::vector<CodeRange> ranges)
{
    std::sort(ranges.begin(), ranges.end(), [](const CodeRange& a, const CodeRange& b) { return a.lo < b.lo; });
    std::vector<CodeRange> out;
    for (const auto& r : ranges) {
        if (!out.empty() && r.lo <= out.back().hi + 1)
            out.back().hi = std::max(out.back().hi, r.hi);
        else
            out.push_back(r);
    }
    return out;
}

std::vector<CodeRange> complement(const std::vector<CodeRange>& sorted)
{
    std::vector<CodeRange> out;
    char32_t next = 0;
    for (const auto& r : sorted) {
        if (r.lo > next)
            out.push_back({next, r.lo - 1});
        next = r.hi + 1;
    }
    if (next <= max_code_point)
        out.push_back({next, max_code_point});
    return out;
}

class RegexParser
{
  public:
    RegexParser(std::u32string_view body, SourcePos origin) : body_(body), origin_(origin) {}

    RegexAst parse()
    {
        RegexAst result = alternation();
        if (pos_ < body_.size())
            fail("unexpected '" + utf8::encode(body_[pos_]) + "'");
        return result;
    }

  private:
    std::u32string_view body_;
    SourcePos origin_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& message) const
    {
        throw SpecError("malformed regex: " + message,
                        {origin_.line, origin_.col + static_cast<int>(pos_)});
    }

    bool at(char32_t c) const { return pos_ < body_.size() && body_[pos_] == c; }

    RegexAst alternation()
    {
        std::vector<RegexAst> alts;
        alts.push_back(concatenation());
        while (at(U'|')) {
            ++pos_;
            alts.push_back(concatenation());
        }
        if (alts.size() == 1)
            return std::move(alts.front());
        RegexAst node;
        node.kind = RegexAst::Kind::Alt;
        node.children = std::move(alts);
        return node;
    }

    RegexAst concatenation()
    {
        std::vector<RegexAst> parts;
        while (pos_ < body_.size() && !at(U'|') && !at(U')'))
            parts.push_back(postfix());
        if (parts.empty())
            return RegexAst{};
        if (parts.size() == 1)
            return std::move(parts.front());
        RegexAst node;
        node.kind = RegexAst::Kind::Concat;
        node.children = std::move(parts);
        return node;
    }

    RegexAst postfix()
    {
        RegexAst node = atom();
        while (pos_ < body_.size()) {
            RegexAst::Kind kind;
            if (at(U'*'))
                kind = RegexAst::Kind::Star;
            else if (at(U'+'))
                kind = RegexAst::Kind::Plus;
            else if (at(U'?'))
                kind = RegexAst::Kind::Optional;
            else
                break;
            ++pos_;
            RegexAst wrapped;
            wrapped.kind = kind;
            wrapped.children.push_back(std::move(node));
            node = std::move(wrapped);
        }
        return node;
    }

    char32_t escape()
    {
        // positioned just after the backslash
        if (pos_ >= body_.size())
            fail("dangling escape");
        char32_t c = body_[pos_++];
        switch (c) {
        case U'n':
            return U'\n';
        case U't':
            return U'\t';
        case U'r':
            return U'\r';
        default:
            break;
        }
        if (c < 0x80 && (std::isalnum(static_cast<int>(c)) != 0)) {
            --pos_;
            fail("unknown escape '\\" + utf8::encode(c) + "'");
        }
        return c;
    }

    RegexAst atom()
    {
        char32_t c = body_[pos_];
        switch (c) {
        case U'(': {
            ++pos_;
            RegexAst inner = alternation();
            if (!at(U')'))
                fail("missing ')'");
            ++pos_;
            return inner;
        }
        case U'[':
            ++pos_;
            return char_class();
        case U'.': {
            ++pos_;
            RegexAst node;
            node.kind = RegexAst::Kind::Any;
            return node;
        }
        case U'\\': {
            ++pos_;
            RegexAst node;
            node.kind = RegexAst::Kind::Literal;
            node.ch = escape();
            return node;
        }
        case U'*':
        case U'+':
        case U'?':
            fail("nothing to repeat");
        case U']':
        case U'/':
            fail("'" + utf8::encode(c) + "' must be escaped");
        default: {
            ++pos_;
            RegexAst node;
            node.kind = RegexAst::Kind::Literal;
            node.ch = c;
            return node;
        }
        }
    }

    char32_t class_char()
    {
        char32_t c = body_[pos_++];
        if (c == U'\\')
            return escape();
        return c;
    }

    RegexAst char_class()
    {
        RegexAst node;
        node.kind = RegexAst::Kind::Class;
        if (at(U'^')) {
            node.negated = true;
            ++pos_;
        }
        while (pos_ < body_.size() && !at(U']')) {
            char32_t lo = class_char();
            char32_t hi = lo;
            if (at(U'-') && pos_ + 1 < body_.size() && body_[pos_ + 1] != U']') {
                ++pos_;
                hi = class_char();
                if (hi < lo)
                    fail("inverted range in character class");
            }
            node.ranges.push_back({lo, hi});
        }
        if (!at(U']'))
            fail("missing ']'");
        ++pos_;
        if (node.ranges.empty())
            fail("empty character class");
        return node;
    }
};

} // namespace

bool RegexAst::nullable() const
{
    switch (kind) {
    case Kind::Empty:
    case Kind::Star:
    case Kind::Optional:
        return true;
    case Kind::Literal:
    case Kind::Class:
    case Kind::Any:
        return false;
    case Kind::Plus:
        return children.front().nullable();
    case Kind::Concat:
        return std::all_of(children.begin(), children.end(), [](const RegexAst& c) { return c.nullable(); });
    case Kind::Alt:
        return std::any_of(children.begin(), children.end(), [](const RegexAst& c) { return c.nullable(); });
    }
    return false;
}

std::vector<CodeRange> RegexAst::char_set() const
{
    switch (kind) {
    case Kind::Literal:
        return {{ch, ch}};
    case Kind::Any:
        return {{0, U'\n' - 1}, {U'\n' + 1, max_code_point}};
    case Kind::Class: {
        auto sorted = normalize(ranges);
        return negated ? complement(sorted) : sorted;
    }
    default:
        return {};
    }
}

RegexAst parse_regex(std::u32string_view body, SourcePos origin)
{
    return RegexParser(body, origin).parse();
}

} // namespace tws::lexgen
