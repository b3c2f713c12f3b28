#include "tws/parsegen.hpp"

namespace tws::parsegen {

namespace {

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? ", " : "") + items[i];
    return out;
}

} // namespace

ParseError::ParseError(SourcePos pos, std::string unexpected, std::vector<std::string> expected)
    : std::runtime_error(to_string(pos) + ": unexpected " + unexpected + ", expected one of: " + join(expected))
    , pos_(pos)
    , unexpected_(std::move(unexpected))
    , expected_(std::move(expected))
{
}

SynTree parse(const LalrTable& table, const std::vector<lexgen::Token>& tokens, const ParseObserver& observer)
{
    const auto& productions = table.grammar().productions;
    std::vector<std::uint32_t> states{0};
    std::vector<int> pushes{0}; // per stack entry, trees that entry accounts for
    std::vector<SynTree> trees;
    std::size_t push_total = 0;

    auto notify = [&] {
        if (observer)
            observer(trees.size(), push_total);
    };

    std::size_t next = 0;
    for (;;) {
        if (next >= tokens.size())
            throw ParseError(tokens.empty() ? SourcePos{} : tokens.back().pos(), "end of input",
                             table.expected(states.back()));
        const auto& tok = tokens[next];
        auto term = table.classify(tok);
        if (!term)
            throw ParseError(tok.pos(), tok.kind, table.expected(states.back()));

        Action act = table.action(states.back(), *term);
        switch (act.kind) {
        case Action::Kind::Error:
            throw ParseError(tok.pos(), tok.kind, table.expected(states.back()));
        case Action::Kind::Accept:
            if (trees.size() != 1)
                throw std::logic_error("tree stack holds " + std::to_string(trees.size()) + " trees at accept");
            return std::move(trees.front());
        case Action::Kind::Shift: {
            const auto& sym = table.terminals()[*term];
            int p = 0;
            if (sym.kind == GrammarSymbol::Kind::NamedTerminal) {
                trees.push_back(SynTree::leaf(tok.kind, tok.lexeme, tok.pos()));
                p = 1;
            }
            states.push_back(act.target);
            pushes.push_back(p);
            push_total += static_cast<std::size_t>(p);
            ++next;
            notify();
            break;
        }
        case Action::Kind::Reduce: {
            const auto& prod = productions[act.target];
            std::size_t len = table.rhs_length(act.target);
            for (std::size_t i = 0; i < len; ++i) {
                push_total -= static_cast<std::size_t>(pushes.back());
                pushes.pop_back();
                states.pop_back();
            }
            if (prod.directive) {
                std::size_t k = prod.directive->arity;
                SourcePos pos = k == 0 ? tok.pos() : trees[trees.size() - k].pos;
                std::vector<SynTree> children(std::make_move_iterator(trees.end() - static_cast<std::ptrdiff_t>(k)),
                                              std::make_move_iterator(trees.end()));
                trees.resize(trees.size() - k);
                trees.push_back(SynTree::node(prod.directive->node, std::move(children), pos));
            }
            auto target = table.go(states.back(), table.lhs_of(act.target));
            if (!target)
                throw std::logic_error("missing goto after reduce");
            states.push_back(*target);
            pushes.push_back(1);
            push_total += 1;
            notify();
            break;
        }
        }
    }
}

LalrRecognizer::LalrRecognizer(const LalrTable& table) : table_(&table), states_{0} {}

bool LalrRecognizer::feed(std::size_t terminal)
{
    if (dead_)
        return false;
    for (;;) {
        Action act = table_->action(states_.back(), terminal);
        switch (act.kind) {
        case Action::Kind::Shift:
            states_.push_back(act.target);
            return true;
        case Action::Kind::Reduce: {
            states_.resize(states_.size() - table_->rhs_length(act.target));
            auto target = table_->go(states_.back(), table_->lhs_of(act.target));
            states_.push_back(*target);
            break;
        }
        case Action::Kind::Accept:
            // only reachable on "$"; the sentence is complete
            return true;
        case Action::Kind::Error:
            dead_ = true;
            return false;
        }
    }
}

bool LalrRecognizer::accepts() const
{
    if (dead_)
        return false;
    LalrRecognizer probe = *this;
    for (;;) {
        Action act = probe.table_->action(probe.states_.back(), 0);
        if (act.kind == Action::Kind::Accept)
            return true;
        if (act.kind != Action::Kind::Reduce)
            return false;
        probe.states_.resize(probe.states_.size() - probe.table_->rhs_length(act.target));
        probe.states_.push_back(*probe.table_->go(probe.states_.back(), probe.table_->lhs_of(act.target)));
    }
}

} // namespace tws::parsegen
