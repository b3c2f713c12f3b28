#include "tws/parsegen.hpp"

#include <algorithm>
#include <deque>

namespace tws::parsegen {

namespace {

class Bitset
{
  public:
    explicit Bitset(std::size_t bits = 0) : words_((bits + 63) / 64, 0) {}

    bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1U; }
    void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
    void reset(std::size_t i) { words_[i / 64] &= ~(std::uint64_t{1} << (i % 64)); }

    /// Returns true if any bit was added.
    bool merge(const Bitset& other)
    {
        bool changed = false;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            auto before = words_[w];
            words_[w] |= other.words_[w];
            changed |= words_[w] != before;
        }
        return changed;
    }

  private:
    std::vector<std::uint64_t> words_;
};

struct Sym
{
    bool terminal;
    std::uint32_t id;

    friend bool operator==(const Sym&, const Sym&) = default;
};

struct Prod
{
    std::uint32_t lhs;
    std::vector<Sym> rhs;
};

struct Item
{
    std::uint32_t prod;
    std::uint32_t dot;

    friend bool operator==(const Item&, const Item&) = default;
    friend auto operator<=>(const Item&, const Item&) = default;
};

struct LaItem
{
    Item item;
    Bitset lookahead;
};

} // namespace

namespace detail {

class LalrBuilder
{
  public:
    explicit LalrBuilder(const GrammarSpec& g) : grammar_(g)
    {
        terms_.push_back({GrammarSymbol::Kind::NamedTerminal, end_marker});
        for (auto& t : g.terminals())
            terms_.push_back(t);
        nts_ = g.nonterminals();
        for (std::size_t i = 0; i < terms_.size(); ++i)
            term_ids_[terms_[i].key()] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < nts_.size(); ++i)
            nt_ids_[nts_[i]] = static_cast<std::uint32_t>(i);

        augmented_nt_ = static_cast<std::uint32_t>(nts_.size());
        prods_of_.resize(nts_.size() + 1);
        for (const auto& p : g.productions) {
            Prod q{nt_ids_.at(p.lhs), {}};
            for (const auto& s : p.rhs) {
                if (s.is_terminal())
                    q.rhs.push_back({true, term_ids_.at(s.key())});
                else
                    q.rhs.push_back({false, nt_ids_.at(s.name)});
            }
            prods_of_[q.lhs].push_back(static_cast<std::uint32_t>(prods_.size()));
            prods_.push_back(std::move(q));
        }
        augmented_prod_ = static_cast<std::uint32_t>(prods_.size());
        prods_.push_back({augmented_nt_, {{false, nt_ids_.at(g.start)}}});
        prods_of_[augmented_nt_].push_back(augmented_prod_);

        propagate_marker_ = terms_.size();
        compute_first();
    }

    LalrTable build()
    {
        build_lr0();
        compute_lookaheads();
        return fill_table();
    }

  private:
    const GrammarSpec& grammar_;
    std::vector<GrammarSymbol> terms_;
    std::vector<std::string> nts_;
    std::map<std::string, std::uint32_t> term_ids_;
    std::map<std::string, std::uint32_t> nt_ids_;
    std::vector<Prod> prods_;
    std::vector<std::vector<std::uint32_t>> prods_of_;
    std::uint32_t augmented_nt_ = 0;
    std::uint32_t augmented_prod_ = 0;
    std::size_t propagate_marker_ = 0; // pseudo-terminal '#' used to detect propagation

    std::vector<Bitset> first_;
    std::vector<bool> nullable_;

    std::vector<std::vector<Item>> kernels_;
    std::map<std::vector<Item>, std::uint32_t> state_ids_;
    // per state: (symbol, target) in discovery order
    std::vector<std::vector<std::pair<Sym, std::uint32_t>>> transitions_;
    std::vector<std::vector<Bitset>> lookaheads_; // per state, per kernel item

    std::size_t width() const { return terms_.size() + 1; }

    void compute_first()
    {
        std::size_t n = nts_.size() + 1;
        first_.assign(n, Bitset(width()));
        nullable_.assign(n, false);
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& p : prods_) {
                bool all_nullable = true;
                for (const auto& s : p.rhs) {
                    if (s.terminal) {
                        if (!first_[p.lhs].test(s.id)) {
                            first_[p.lhs].set(s.id);
                            changed = true;
                        }
                        all_nullable = false;
                        break;
                    }
                    changed |= first_[p.lhs].merge(first_[s.id]);
                    if (!nullable_[s.id]) {
                        all_nullable = false;
                        break;
                    }
                }
                if (all_nullable && !nullable_[p.lhs]) {
                    nullable_[p.lhs] = true;
                    changed = true;
                }
            }
        }
    }

    std::optional<Sym> after_dot(const Item& it) const
    {
        const auto& rhs = prods_[it.prod].rhs;
        if (it.dot < rhs.size())
            return rhs[it.dot];
        return std::nullopt;
    }

    std::vector<Item> closure0(const std::vector<Item>& kernel) const
    {
        std::vector<Item> items = kernel;
        std::vector<bool> expanded(nts_.size() + 1, false);
        for (std::size_t i = 0; i < items.size(); ++i) {
            auto s = after_dot(items[i]);
            if (!s || s->terminal || expanded[s->id])
                continue;
            expanded[s->id] = true;
            for (auto p : prods_of_[s->id])
                items.push_back({p, 0});
        }
        return items;
    }

    std::uint32_t intern(std::vector<Item> kernel)
    {
        std::sort(kernel.begin(), kernel.end());
        auto it = state_ids_.find(kernel);
        if (it != state_ids_.end())
            return it->second;
        auto id = static_cast<std::uint32_t>(kernels_.size());
        state_ids_.emplace(kernel, id);
        kernels_.push_back(std::move(kernel));
        transitions_.emplace_back();
        return id;
    }

    void build_lr0()
    {
        intern({{augmented_prod_, 0}});
        for (std::size_t s = 0; s < kernels_.size(); ++s) {
            auto items = closure0(kernels_[s]);
            std::vector<Sym> order;
            for (const auto& it : items) {
                auto x = after_dot(it);
                if (x && std::find(order.begin(), order.end(), *x) == order.end())
                    order.push_back(*x);
            }
            for (const auto& x : order) {
                std::vector<Item> kernel;
                for (const auto& it : items) {
                    auto y = after_dot(it);
                    if (y && *y == x)
                        kernel.push_back({it.prod, it.dot + 1});
                }
                auto target = intern(std::move(kernel));
                transitions_[s].push_back({x, target});
            }
        }
    }

    std::uint32_t target_of(std::size_t state, const Sym& x) const
    {
        for (const auto& [sym, t] : transitions_[state]) {
            if (sym == x)
                return t;
        }
        throw std::logic_error("missing LR(0) transition");
    }

    std::size_t kernel_index(std::uint32_t state, const Item& item) const
    {
        const auto& k = kernels_[state];
        return static_cast<std::size_t>(std::lower_bound(k.begin(), k.end(), item) - k.begin());
    }

    /// LR(1) closure where every item carries a lookahead set.
    std::vector<LaItem> closure1(std::vector<LaItem> seed) const
    {
        std::map<Item, std::size_t> index;
        std::vector<LaItem> items;
        std::deque<std::size_t> work;
        auto add = [&](const Item& it, const Bitset& la) {
            auto found = index.find(it);
            if (found == index.end()) {
                index.emplace(it, items.size());
                items.push_back({it, la});
                work.push_back(items.size() - 1);
            } else if (items[found->second].lookahead.merge(la)) {
                work.push_back(found->second);
            }
        };
        for (auto& s : seed)
            add(s.item, s.lookahead);
        while (!work.empty()) {
            auto i = work.front();
            work.pop_front();
            Item it = items[i].item;
            auto b = after_dot(it);
            if (!b || b->terminal)
                continue;
            // lookahead for B's items: FIRST(beta) plus, if beta is nullable, this item's lookahead
            Bitset la(width());
            bool beta_nullable = true;
            const auto& rhs = prods_[it.prod].rhs;
            for (std::size_t k = it.dot + 1; k < rhs.size(); ++k) {
                if (rhs[k].terminal) {
                    la.set(rhs[k].id);
                    beta_nullable = false;
                    break;
                }
                la.merge(first_[rhs[k].id]);
                if (!nullable_[rhs[k].id]) {
                    beta_nullable = false;
                    break;
                }
            }
            if (beta_nullable)
                la.merge(items[i].lookahead);
            for (auto p : prods_of_[b->id])
                add({p, 0}, la);
        }
        return items;
    }

    void compute_lookaheads()
    {
        lookaheads_.resize(kernels_.size());
        for (std::size_t s = 0; s < kernels_.size(); ++s)
            lookaheads_[s].assign(kernels_[s].size(), Bitset(width()));
        lookaheads_[0][0].set(0); // S' -> . start, $

        struct Link
        {
            std::uint32_t from_state;
            std::size_t from_item;
            std::uint32_t to_state;
            std::size_t to_item;
        };
        std::vector<Link> links;

        for (std::uint32_t s = 0; s < kernels_.size(); ++s) {
            for (std::size_t k = 0; k < kernels_[s].size(); ++k) {
                Bitset marker(width());
                marker.set(propagate_marker_);
                for (const auto& li : closure1({{kernels_[s][k], marker}})) {
                    auto x = after_dot(li.item);
                    if (!x)
                        continue;
                    auto t = target_of(s, *x);
                    auto j = kernel_index(t, {li.item.prod, li.item.dot + 1});
                    Bitset spontaneous = li.lookahead;
                    if (spontaneous.test(propagate_marker_)) {
                        spontaneous.reset(propagate_marker_);
                        links.push_back({s, k, t, j});
                    }
                    lookaheads_[t][j].merge(spontaneous);
                }
            }
        }

        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& l : links) {
                Bitset src = lookaheads_[l.from_state][l.from_item];
                changed |= lookaheads_[l.to_state][l.to_item].merge(src);
            }
        }
    }

    std::string describe(const Action& a) const
    {
        switch (a.kind) {
        case Action::Kind::Shift:
            return "shift " + std::to_string(a.target);
        case Action::Kind::Reduce:
            return "reduce " + std::to_string(a.target) + " (" + grammar_.productions[a.target].to_string() + ")";
        case Action::Kind::Accept:
            return "accept";
        case Action::Kind::Error:
            break;
        }
        return "error";
    }

    LalrTable fill_table()
    {
        LalrTable table;
        table.grammar_ = grammar_;
        table.state_count_ = kernels_.size();
        table.terminals_ = terms_;
        table.nonterminals_ = nts_;
        for (std::size_t i = 0; i < terms_.size(); ++i)
            table.terminal_ids_[terms_[i].key()] = i;
        for (std::size_t p = 0; p < prods_.size(); ++p) {
            table.prod_lhs_.push_back(prods_[p].lhs);
            table.prod_len_.push_back(prods_[p].rhs.size());
        }

        const std::size_t nterm = terms_.size();
        const std::size_t nnt = nts_.size();
        table.actions_.assign(kernels_.size() * nterm, Action{});
        table.gotos_.assign(kernels_.size() * nnt, -1);

        for (std::uint32_t s = 0; s < kernels_.size(); ++s) {
            std::vector<std::vector<Action>> candidates(nterm);
            for (const auto& [x, t] : transitions_[s]) {
                if (x.terminal)
                    candidates[x.id].push_back({Action::Kind::Shift, t});
                else if (x.id < nnt)
                    table.gotos_[s * nnt + x.id] = static_cast<std::int32_t>(t);
            }
            std::vector<LaItem> seed;
            for (std::size_t k = 0; k < kernels_[s].size(); ++k)
                seed.push_back({kernels_[s][k], lookaheads_[s][k]});
            for (const auto& li : closure1(std::move(seed))) {
                if (after_dot(li.item))
                    continue;
                for (std::size_t a = 0; a < nterm; ++a) {
                    if (!li.lookahead.test(a))
                        continue;
                    Action act = li.item.prod == augmented_prod_ ? Action{Action::Kind::Accept, 0}
                                                                  : Action{Action::Kind::Reduce, li.item.prod};
                    if (std::find(candidates[a].begin(), candidates[a].end(), act) == candidates[a].end())
                        candidates[a].push_back(act);
                }
            }
            for (std::size_t a = 0; a < nterm; ++a) {
                auto& cands = candidates[a];
                if (cands.empty())
                    continue;
                Action chosen = cands.front();
                if (cands.size() > 1) {
                    auto shift = std::find_if(cands.begin(), cands.end(), [](const Action& c) {
                        return c.kind == Action::Kind::Shift || c.kind == Action::Kind::Accept;
                    });
                    if (shift != cands.end()) {
                        chosen = *shift;
                    } else {
                        chosen = *std::min_element(cands.begin(), cands.end(), [](const Action& x, const Action& y) {
                            return x.target < y.target;
                        });
                    }
                    Conflict c;
                    c.state = s;
                    c.terminal = terms_[a].key();
                    for (const auto& cand : cands)
                        c.contenders.push_back(describe(cand));
                    c.resolution = describe(chosen);
                    table.conflicts_.push_back(std::move(c));
                }
                table.actions_[s * nterm + a] = chosen;
            }
        }
        return table;
    }
};

} // namespace detail

namespace {

void check_tree_push_rule(const GrammarSpec& grammar)
{
    for (const auto& p : grammar.productions) {
        int pushes = p.push_count();
        if (p.directive) {
            if (static_cast<int>(p.directive->arity) != pushes) {
                throw SpecError("production " + p.to_string() + " builds a node of arity "
                                    + std::to_string(p.directive->arity) + " but its right-hand side pushes "
                                    + std::to_string(pushes) + " tree(s)",
                                p.pos);
            }
        } else if (pushes != 1) {
            throw SpecError("production " + p.to_string() + " has no directive and pushes " + std::to_string(pushes)
                                + " tree(s); exactly 1 is required",
                            p.pos);
        }
    }
}

std::string conflict_summary(const std::vector<Conflict>& conflicts)
{
    std::string out = std::to_string(conflicts.size()) + " LALR conflict(s):";
    for (const auto& c : conflicts) {
        out += " [state " + std::to_string(c.state) + " on " + c.terminal + ":";
        for (std::size_t i = 0; i < c.contenders.size(); ++i)
            out += (i ? " / " : " ") + c.contenders[i];
        out += "]";
    }
    return out;
}

} // namespace

ConflictError::ConflictError(std::vector<Conflict> conflicts)
    : SpecError(conflict_summary(conflicts))
    , conflicts_(std::move(conflicts))
{
}

std::optional<std::uint32_t> LalrTable::go(std::size_t state, std::size_t nonterminal) const
{
    auto t = gotos_[state * nonterminals_.size() + nonterminal];
    if (t < 0)
        return std::nullopt;
    return static_cast<std::uint32_t>(t);
}

std::optional<std::size_t> LalrTable::terminal_index(std::string_view key) const
{
    auto it = terminal_ids_.find(key);
    if (it == terminal_ids_.end())
        return std::nullopt;
    return it->second;
}

std::optional<std::size_t> LalrTable::classify(const lexgen::Token& token) const
{
    if (token.kind == end_marker)
        return 0;
    if (auto named = terminal_index(token.kind); named && terminals_[*named].kind == GrammarSymbol::Kind::NamedTerminal)
        return named;
    if (auto by_kind = terminal_index("'" + token.kind + "'"))
        return by_kind;
    return terminal_index("'" + token.lexeme + "'");
}

std::vector<std::string> LalrTable::expected(std::size_t state) const
{
    std::vector<std::string> out;
    for (std::size_t t = 0; t < terminals_.size(); ++t) {
        if (action(state, t).kind != Action::Kind::Error)
            out.push_back(terminals_[t].key());
    }
    return out;
}

LalrTable build_lalr(const GrammarSpec& grammar)
{
    check_tree_push_rule(grammar);
    LalrTable table = detail::LalrBuilder(grammar).build();
    if (grammar.mode == ResolutionMode::Strict && !table.conflicts().empty())
        throw ConflictError(table.conflicts());
    return table;
}

} // namespace tws::parsegen
