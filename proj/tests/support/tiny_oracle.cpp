#include "tiny_oracle.hpp"

#include <sstream>
#include <stdexcept>

namespace tws::testing {

namespace {

struct Stop
{
    std::string why;
};

using i128 = __int128;

std::int64_t trunc64(i128 v)
{
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(static_cast<unsigned __int128>(v)));
}

class Interp
{
  public:
    Interp(const std::vector<std::int64_t>& input, std::uint64_t fuel) : input_(input), fuel_(fuel) {}

    void exec(const SynTree& t)
    {
        burn();
        const std::string& k = t.kind;
        if (k == "program" || k == "seq" || k == "block") {
            for (const auto& c : t.children)
                exec(c);
        } else if (k == "intdcln" || k == "booldcln") {
            // memory starts zeroed; nothing to do
        } else if (k == "assign") {
            set(t.children[0], eval(t.children[1]));
        } else if (k == "read") {
            if (next_ >= input_.size())
                throw Stop{"InputExhausted"};
            set(t.children[0], input_[next_++]);
        } else if (k == "write") {
            out_ += std::to_string(eval(t.children[0])) + "\n";
        } else if (k == "writestr") {
            out_ += unescape(*t.children[0].lexeme);
        } else if (k == "if") {
            if (eval(t.children[0]))
                exec(t.children[1]);
        } else if (k == "ifelse") {
            if (eval(t.children[0]))
                exec(t.children[1]);
            else
                exec(t.children[2]);
        } else if (k == "while") {
            while (eval(t.children[0]))
                exec(t.children[1]);
        } else {
            throw std::logic_error("oracle: statement kind " + k);
        }
    }

    std::string output() const { return out_; }

  private:
    std::vector<std::int64_t> mem_;
    const std::vector<std::int64_t>& input_;
    std::size_t next_ = 0;
    std::string out_;
    std::uint64_t fuel_;

    void burn()
    {
        if (fuel_-- == 0)
            throw Stop{"StepLimit"};
    }

    std::int64_t& cell(const SynTree& ident)
    {
        if (!ident.ann_addr)
            throw std::logic_error("oracle: identifier without address");
        auto a = static_cast<std::size_t>(*ident.ann_addr);
        if (a >= mem_.size())
            mem_.resize(a + 1, 0);
        return mem_[a];
    }

    void set(const SynTree& ident, std::int64_t v) { cell(ident) = v; }

    std::int64_t eval(const SynTree& t)
    {
        burn();
        const std::string& k = t.kind;
        if (k == "IDENT")
            return cell(t);
        if (k == "INTLIT") {
            std::uint64_t v = 0;
            for (char c : *t.lexeme)
                v = v * 10 + static_cast<std::uint64_t>(c - '0');
            return static_cast<std::int64_t>(v);
        }
        if (k == "true")
            return 1;
        if (k == "false")
            return 0;
        if (k == "neg")
            return trunc64(-static_cast<i128>(eval(t.children[0])));
        if (k == "not")
            return eval(t.children[0]) == 0 ? 1 : 0;

        // both operands are always evaluated, left first
        i128 a = eval(t.children.at(0));
        i128 b = eval(t.children.at(1));
        if (k == "plus")
            return trunc64(a + b);
        if (k == "minus")
            return trunc64(a - b);
        if (k == "times")
            return trunc64(a * b);
        if (k == "div" || k == "mod") {
            if (b == 0)
                throw Stop{"DivByZero"};
            i128 q = a / b; // C++ division truncates toward zero
            return k == "div" ? trunc64(q) : trunc64(a - q * b);
        }
        if (k == "lt")
            return a < b;
        if (k == "le")
            return a <= b;
        if (k == "gt")
            return a > b;
        if (k == "ge")
            return a >= b;
        if (k == "eq")
            return a == b;
        if (k == "ne")
            return a != b;
        if (k == "and")
            return a != 0 && b != 0;
        if (k == "or")
            return a != 0 || b != 0;
        throw std::logic_error("oracle: expression kind " + k);
    }

    static std::string unescape(const std::string& quoted)
    {
        std::string out;
        for (std::size_t i = 1; i + 1 < quoted.size(); ++i) {
            char c = quoted[i];
            if (c == '\\' && i + 2 < quoted.size()) {
                char e = quoted[++i];
                out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
            } else {
                out += c;
            }
        }
        return out;
    }
};

} // namespace

OracleResult interpret_tiny(const SynTree& decorated, const std::vector<std::int64_t>& input, std::uint64_t fuel)
{
    Interp in(input, fuel);
    OracleResult r;
    try {
        in.exec(decorated);
    } catch (const Stop& s) {
        r.exit = s.why;
    }
    r.output = in.output();
    return r;
}

std::vector<std::int64_t> parse_ints(const std::string& text)
{
    std::istringstream ss(text);
    std::vector<std::int64_t> out;
    std::string word;
    while (ss >> word) {
        std::size_t used = 0;
        long long v = std::stoll(word, &used);
        if (used != word.size())
            throw std::invalid_argument("not an integer: " + word);
        out.push_back(v);
    }
    return out;
}

} // namespace tws::testing
