#include "tws/parsegen.hpp"

#include <set>
#include <tuple>

namespace tws::parsegen {

namespace {

struct EItem
{
    std::uint32_t prod;
    std::uint32_t dot;
    std::uint32_t origin;

    friend auto operator<=>(const EItem&, const EItem&) = default;
};

struct ESym
{
    bool terminal;
    std::string key; // terminal key or nonterminal name
};

} // namespace

struct EarleyRecognizer::Impl
{
    std::string start;
    std::vector<std::string> lhs;
    std::vector<std::vector<ESym>> rhs;
    std::map<std::string, std::vector<std::uint32_t>> prods_of;
    std::set<std::string> nullable;

    std::vector<std::vector<EItem>> chart;
    std::vector<std::set<EItem>> seen;

    void add(std::size_t set, const EItem& item)
    {
        if (seen[set].insert(item).second)
            chart[set].push_back(item);
    }

    void close(std::size_t cur)
    {
        for (std::size_t i = 0; i < chart[cur].size(); ++i) {
            EItem it = chart[cur][i];
            const auto& body = rhs[it.prod];
            if (it.dot == body.size()) {
                const std::string& done = lhs[it.prod];
                // index loop: chart[it.origin] may be chart[cur] and grow
                for (std::size_t j = 0; j < chart[it.origin].size(); ++j) {
                    EItem waiting = chart[it.origin][j];
                    const auto& wb = rhs[waiting.prod];
                    if (waiting.dot < wb.size() && !wb[waiting.dot].terminal && wb[waiting.dot].key == done)
                        add(cur, {waiting.prod, waiting.dot + 1, waiting.origin});
                }
                continue;
            }
            const auto& next = body[it.dot];
            if (next.terminal)
                continue;
            auto found = prods_of.find(next.key);
            if (found != prods_of.end()) {
                for (auto p : found->second)
                    add(cur, {p, 0, static_cast<std::uint32_t>(cur)});
            }
            if (nullable.count(next.key))
                add(cur, {it.prod, it.dot + 1, it.origin});
        }
    }
};

EarleyRecognizer::EarleyRecognizer(const GrammarSpec& grammar) : impl_(std::make_unique<Impl>())
{
    auto& m = *impl_;
    m.start = grammar.start;
    for (const auto& p : grammar.productions) {
        m.prods_of[p.lhs].push_back(static_cast<std::uint32_t>(m.lhs.size()));
        m.lhs.push_back(p.lhs);
        std::vector<ESym> body;
        for (const auto& s : p.rhs)
            body.push_back({s.is_terminal(), s.is_terminal() ? s.key() : s.name});
        m.rhs.push_back(std::move(body));
    }
    m.nullable = compute_nullable_first_follow(grammar).nullable;

    m.chart.emplace_back();
    m.seen.emplace_back();
    for (auto p : m.prods_of[m.start])
        m.add(0, {p, 0, 0});
    m.close(0);
}

EarleyRecognizer::~EarleyRecognizer() = default;
EarleyRecognizer::EarleyRecognizer(EarleyRecognizer&&) noexcept = default;
EarleyRecognizer& EarleyRecognizer::operator=(EarleyRecognizer&&) noexcept = default;

void EarleyRecognizer::feed(std::string_view terminal_key)
{
    auto& m = *impl_;
    std::size_t prev = m.chart.size() - 1;
    m.chart.emplace_back();
    m.seen.emplace_back();
    std::size_t cur = prev + 1;
    for (const auto& it : m.chart[prev]) {
        const auto& body = m.rhs[it.prod];
        if (it.dot < body.size() && body[it.dot].terminal && body[it.dot].key == terminal_key)
            m.add(cur, {it.prod, it.dot + 1, it.origin});
    }
    m.close(cur);
}

void EarleyRecognizer::unfeed()
{
    auto& m = *impl_;
    if (m.chart.size() > 1) {
        m.chart.pop_back();
        m.seen.pop_back();
    }
}

bool EarleyRecognizer::dead() const
{
    return impl_->chart.back().empty();
}

bool EarleyRecognizer::accepts() const
{
    const auto& m = *impl_;
    for (const auto& it : m.chart.back()) {
        if (it.origin == 0 && it.dot == m.rhs[it.prod].size() && m.lhs[it.prod] == m.start)
            return true;
    }
    return false;
}

bool earley_recognize(const GrammarSpec& grammar, const std::vector<std::string>& terminal_keys)
{
    EarleyRecognizer r(grammar);
    for (const auto& k : terminal_keys) {
        r.feed(k);
        if (r.dead())
            return false;
    }
    return r.accepts();
}

} // namespace tws::parsegen
