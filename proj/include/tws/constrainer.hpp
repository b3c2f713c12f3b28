#pragma once

// Declarative static-semantics rules executed over the syntax tree: scoped
// symbol table, declaration checks, type compatibility and tree decoration.

#include "tws/common.hpp"
#include "tws/syntree.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tws::constrainer {

/// Type of an expression that failed to resolve; compares equal to every type.
inline const std::string error_type = "<error>";

namespace codes {
inline const std::string undeclared = "E_UNDECLARED";
inline const std::string redeclared = "E_REDECLARED";
inline const std::string type_mismatch = "E_TYPE_MISMATCH";
inline const std::string bad_rule = "E_BAD_RULE";
inline const std::string unknown_node = "E_UNKNOWN_NODE";
} // namespace codes

struct TypeExpr
{
    enum class Kind
    {
        Named,
        ChildType,
        Lookup,
    };

    Kind kind = Kind::Named;
    std::string name;      // Named
    std::size_t index = 0; // ChildType

    friend bool operator==(const TypeExpr&, const TypeExpr&) = default;
};

struct ConstrainAction
{
    enum class Kind
    {
        OpenScope,
        CloseScope,
        Declare,
        Check,
        Synth,
    };

    Kind kind = Kind::OpenScope;
    std::size_t child = 0; // Declare
    TypeExpr type;         // Declare, Synth, left side of Check
    TypeExpr other;        // right side of Check
    std::string code;      // Check
    SourcePos pos;

    friend bool operator==(const ConstrainAction& a, const ConstrainAction& b)
    {
        return a.kind == b.kind && a.child == b.child && a.type == b.type && a.other == b.other && a.code == b.code;
    }
};

struct NodeRule
{
    std::vector<ConstrainAction> enter;
    std::vector<ConstrainAction> exit;
};

struct ConstrainSpec
{
    std::vector<std::string> types;
    std::map<std::string, NodeRule> rules;
    bool strict = true;
};

ConstrainSpec parse_constrain_spec(std::string_view text);

struct Symbol
{
    std::string name;
    std::string type;
    std::int64_t addr = 0;
    int depth = 0; // 0 = outermost scope
    SourcePos pos;

    friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Scope stack over a flat address space. Addresses are handed out in
/// declaration order from 0 and never reused.
class SymbolTable
{
  public:
    SymbolTable() : scopes_(1) {}

    void open_scope() { scopes_.emplace_back(); }
    /// False when only the outermost scope is left.
    bool close_scope();
    std::size_t depth() const { return scopes_.size(); }

    /// Null when the name already exists in the innermost scope.
    const Symbol* declare(const std::string& name, const std::string& type, SourcePos pos);
    const Symbol* lookup(const std::string& name) const;

    /// Every successful declaration, in order.
    const std::vector<Symbol>& declared() const { return declared_; }

  private:
    std::vector<std::map<std::string, std::size_t>> scopes_; // name -> index into declared_
    std::vector<Symbol> declared_;
};

struct Diagnostic
{
    std::string code;
    std::string message;
    SourcePos pos;

    friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ConstrainResult
{
    SynTree decorated;
    std::vector<Symbol> symbols;
    std::vector<Diagnostic> diagnostics;
};

/// Never throws on semantic problems; they all become diagnostics.
ConstrainResult constrain(const ConstrainSpec& spec, const SynTree& tree);

} // namespace tws::constrainer
