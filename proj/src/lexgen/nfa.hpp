#pragma once

#include "tws/lexgen.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tws::lexgen::detail {

struct NfaEdge
{
    CodeRange range;
    std::uint32_t target;
};

struct NfaState
{
    std::vector<std::uint32_t> epsilon;
    std::vector<NfaEdge> edges;
    std::optional<std::size_t> accept;
};

/// Union of the Thompson automata of every rule; state 0 is the start.
struct Nfa
{
    std::vector<NfaState> states;

    static Nfa from_spec(const std::vector<ScanRule>& rules);

    /// Epsilon closure of `seed`, returned sorted.
    std::vector<std::uint32_t> closure(std::vector<std::uint32_t> seed) const;

    std::optional<std::size_t> accepting_rule(const std::vector<std::uint32_t>& set) const;
};

} // namespace tws::lexgen::detail
