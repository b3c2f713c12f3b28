#include "tws/constrainer.hpp"

namespace tws::constrainer {

bool SymbolTable::close_scope()
{
    if (scopes_.size() <= 1)
        return false;
    scopes_.pop_back();
    return true;
}

const Symbol* SymbolTable::declare(const std::string& name, const std::string& type, SourcePos pos)
{
    auto& scope = scopes_.back();
    if (scope.count(name))
        return nullptr;
    Symbol s{name, type, static_cast<std::int64_t>(declared_.size()), static_cast<int>(scopes_.size()) - 1, pos};
    scope.emplace(name, declared_.size());
    declared_.push_back(std::move(s));
    return &declared_.back();
}

const Symbol* SymbolTable::lookup(const std::string& name) const
{
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
        auto found = it->find(name);
        if (found != it->end())
            return &declared_[found->second];
    }
    return nullptr;
}

namespace {

void strip(SynTree& t)
{
    t.ann_type.reset();
    t.ann_addr.reset();
    for (auto& c : t.children)
        strip(c);
}

class Walker
{
  public:
    explicit Walker(const ConstrainSpec& spec) : spec_(spec) {}

    ConstrainResult run(SynTree tree)
    {
        strip(tree);
        visit(tree);
        if (symbols_.depth() != 1)
            report(codes::bad_rule, "unbalanced scopes: " + std::to_string(symbols_.depth() - 1) + " left open",
                   tree.pos);
        return {std::move(tree), symbols_.declared(), std::move(diagnostics_)};
    }

  private:
    const ConstrainSpec& spec_;
    SymbolTable symbols_;
    std::vector<Diagnostic> diagnostics_;

    void report(const std::string& code, std::string message, SourcePos pos)
    {
        diagnostics_.push_back({code, std::move(message), pos});
    }

    void visit(SynTree& node)
    {
        auto rule = spec_.rules.find(node.kind);
        if (rule == spec_.rules.end()) {
            if (spec_.strict && !node.is_leaf())
                report(codes::unknown_node, "no constrainer rule for node " + node.kind, node.pos);
            for (auto& c : node.children)
                visit(c);
            return;
        }
        for (const auto& a : rule->second.enter)
            apply(a, node);
        for (auto& c : node.children)
            visit(c);
        for (const auto& a : rule->second.exit)
            apply(a, node);
    }

    std::string resolve(const TypeExpr& e, SynTree& node)
    {
        switch (e.kind) {
        case TypeExpr::Kind::Named:
            return e.name;
        case TypeExpr::Kind::ChildType: {
            if (e.index >= node.children.size()) {
                report(codes::bad_rule, node.kind + " has no child " + std::to_string(e.index), node.pos);
                return error_type;
            }
            const auto& child = node.children[e.index];
            if (!child.ann_type) {
                report(codes::bad_rule, "child " + std::to_string(e.index) + " of " + node.kind + " has no type",
                       node.pos);
                return error_type;
            }
            return *child.ann_type;
        }
        case TypeExpr::Kind::Lookup: {
            if (!node.is_leaf()) {
                report(codes::bad_rule, "lookup applied to non-leaf node " + node.kind, node.pos);
                return error_type;
            }
            const Symbol* sym = symbols_.lookup(*node.lexeme);
            if (!sym) {
                report(codes::undeclared, "undeclared identifier " + *node.lexeme, node.pos);
                return error_type;
            }
            node.ann_addr = sym->addr;
            return sym->type;
        }
        }
        return error_type;
    }

    void apply(const ConstrainAction& a, SynTree& node)
    {
        switch (a.kind) {
        case ConstrainAction::Kind::OpenScope:
            symbols_.open_scope();
            break;
        case ConstrainAction::Kind::CloseScope:
            if (!symbols_.close_scope())
                report(codes::bad_rule, "close_scope without a matching open_scope", node.pos);
            break;
        case ConstrainAction::Kind::Declare: {
            if (a.child >= node.children.size() || !node.children[a.child].is_leaf()) {
                report(codes::bad_rule, "declare target child " + std::to_string(a.child) + " of " + node.kind
                                            + " is not a leaf",
                       node.pos);
                break;
            }
            std::string type = resolve(a.type, node);
            auto& leaf = node.children[a.child];
            const Symbol* sym = symbols_.declare(*leaf.lexeme, type, leaf.pos);
            if (!sym) {
                report(codes::redeclared, "identifier " + *leaf.lexeme + " already declared in this scope", node.pos);
                break;
            }
            leaf.ann_type = sym->type;
            leaf.ann_addr = sym->addr;
            break;
        }
        case ConstrainAction::Kind::Check: {
            std::string left = resolve(a.type, node);
            std::string right = resolve(a.other, node);
            if (left != right && left != error_type && right != error_type)
                report(a.code, "type mismatch in " + node.kind + ": " + left + " vs " + right, node.pos);
            break;
        }
        case ConstrainAction::Kind::Synth:
            node.ann_type = resolve(a.type, node);
            break;
        }
    }
};

} // namespace

ConstrainResult constrain(const ConstrainSpec& spec, const SynTree& tree)
{
    return Walker(spec).run(tree);
}

} // namespace tws::constrainer
