#include "nfa.hpp"

#include <algorithm>

namespace tws::lexgen::detail {

namespace {

struct Fragment
{
    std::uint32_t start;
    std::uint32_t end;
};

class ThompsonBuilder
{
  public:
    explicit ThompsonBuilder(Nfa& nfa) : nfa_(nfa) {}

    Fragment build(const RegexAst& node)
    {
        using Kind = RegexAst::Kind;
        switch (node.kind) {
        case Kind::Empty: {
            auto f = fresh_pair();
            eps(f.start, f.end);
            return f;
        }
        case Kind::Literal:
        case Kind::Class:
        case Kind::Any: {
            auto f = fresh_pair();
            for (const auto& r : node.char_set())
                nfa_.states[f.start].edges.push_back({r, f.end});
            return f;
        }
        case Kind::Concat: {
            Fragment first = build(node.children.front());
            Fragment cur = first;
            for (std::size_t i = 1; i < node.children.size(); ++i) {
                Fragment next = build(node.children[i]);
                eps(cur.end, next.start);
                cur = next;
            }
            return {first.start, cur.end};
        }
        case Kind::Alt: {
            auto f = fresh_pair();
            for (const auto& child : node.children) {
                Fragment c = build(child);
                eps(f.start, c.start);
                eps(c.end, f.end);
            }
            return f;
        }
        case Kind::Star:
        case Kind::Plus:
        case Kind::Optional: {
            auto f = fresh_pair();
            Fragment c = build(node.children.front());
            eps(f.start, c.start);
            eps(c.end, f.end);
            if (node.kind != Kind::Plus)
                eps(f.start, f.end);
            if (node.kind != Kind::Optional)
                eps(c.end, c.start);
            return f;
        }
        }
        return fresh_pair();
    }

    std::uint32_t fresh()
    {
        nfa_.states.emplace_back();
        return static_cast<std::uint32_t>(nfa_.states.size() - 1);
    }

    void eps(std::uint32_t from, std::uint32_t to) { nfa_.states[from].epsilon.push_back(to); }

  private:
    Nfa& nfa_;

    Fragment fresh_pair()
    {
        auto s = fresh();
        auto e = fresh();
        return {s, e};
    }
};

} // namespace

Nfa Nfa::from_spec(const std::vector<ScanRule>& rules)
{
    Nfa nfa;
    ThompsonBuilder builder(nfa);
    auto start = builder.fresh();
    for (const auto& rule : rules) {
        Fragment f = builder.build(rule.pattern);
        builder.eps(start, f.start);
        nfa.states[f.end].accept = rule.index;
    }
    return nfa;
}

std::vector<std::uint32_t> Nfa::closure(std::vector<std::uint32_t> seed) const
{
    std::vector<bool> seen(states.size(), false);
    std::vector<std::uint32_t> work;
    std::vector<std::uint32_t> out;
    for (auto s : seed) {
        if (!seen[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    }
    while (!work.empty()) {
        auto s = work.back();
        work.pop_back();
        out.push_back(s);
        for (auto t : states[s].epsilon) {
            if (!seen[t]) {
                seen[t] = true;
                work.push_back(t);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::optional<std::size_t> Nfa::accepting_rule(const std::vector<std::uint32_t>& set) const
{
    std::optional<std::size_t> best;
    for (auto s : set) {
        const auto& acc = states[s].accept;
        if (acc && (!best || *acc < *best))
            best = acc;
    }
    return best;
}

} // namespace tws::lexgen::detail
