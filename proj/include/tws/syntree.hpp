#pragma once

// The one tree type shared by Parsing, Constrain and GenCode. Annotations stay
// empty until the constrainer decorates a copy.

#include "tws/common.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tws {

struct SynTree
{
    std::string kind;
    std::optional<std::string> lexeme; // set iff built from a named terminal
    std::vector<SynTree> children;
    SourcePos pos;
    std::optional<std::string> ann_type;
    std::optional<std::int64_t> ann_addr;

    bool is_leaf() const { return lexeme.has_value(); }

    static SynTree leaf(std::string kind, std::string lexeme, SourcePos pos = {})
    {
        SynTree t;
        t.kind = std::move(kind);
        t.lexeme = std::move(lexeme);
        t.pos = pos;
        return t;
    }

    static SynTree node(std::string kind, std::vector<SynTree> children, SourcePos pos = {})
    {
        SynTree t;
        t.kind = std::move(kind);
        t.children = std::move(children);
        t.pos = pos;
        return t;
    }

    friend bool operator==(const SynTree&, const SynTree&) = default;
};

/// Preorder dump: one node per line, ". " per depth level, LF endings.
std::string to_indented_text(const SynTree& tree);

/// Canonical JSON: {kind, lexeme?, pos:{line,col}, type?, addr?, children:[...]}.
std::string to_json(const SynTree& tree);

/// Inverse of `to_json`; throws std::invalid_argument on schema violations.
SynTree tree_from_json(std::string_view json);

struct PreorderEntry
{
    const SynTree* node;
    int depth;
};

std::vector<PreorderEntry> preorder(const SynTree& tree);

std::size_t node_count(const SynTree& tree);

} // namespace tws
