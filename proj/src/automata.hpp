#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logic.hpp"
#include "mdp.hpp"

namespace phl {

struct AutomataCaps {
    int closure_cap = 1 << 16;  // elementary sets / safety DFA states
    int safra_cap = 100000;     // Safra trees
};

// Letters are bitmasks over props: bit i set iff props[i] holds.
struct NbaEdge {
    uint32_t guard_mask = 0, guard_bits = 0;  // letter accepted iff (letter & mask) == bits
    int dst = 0;
};

struct Nba {
    std::vector<IndexedProp> props;
    std::vector<std::vector<NbaEdge>> edges;
    std::vector<int> initial;
    std::vector<bool> accepting;

    int num_states() const { return static_cast<int>(edges.size()); }
    int num_letters() const { return 1 << props.size(); }
    std::vector<int> successors(int state, uint32_t letter) const;
};

struct RabinPair {
    std::vector<bool> in_b, in_g;  // per DRA state
};

struct Dra {
    std::vector<IndexedProp> props;
    std::vector<std::vector<int>> delta;  // [state][letter], total
    int initial = 0;
    std::vector<RabinPair> pairs;

    int num_states() const { return static_cast<int>(delta.size()); }
    int num_letters() const { return 1 << props.size(); }
};

// Deterministic safety automaton with a partial transition function;
// a word is rejected exactly when delta becomes undefined.
struct SafetyDfa {
    std::vector<IndexedProp> props;
    std::vector<std::vector<int>> delta;  // [state][letter], -1 = undefined
    int initial = 0;

    int num_states() const { return static_cast<int>(delta.size()); }
    int num_letters() const { return 1 << props.size(); }
};

// Tableau construction over the desugared core; the result accepts exactly
// the models of f.
Nba ltl_to_nba(const LtlPtr& f, const AutomataCaps& caps = {});

// Safra determinization.
Dra nba_to_dra(const Nba& a, const AutomataCaps& caps = {});

Dra ltl_to_dra(const LtlPtr& f, const AutomataCaps& caps = {});

// Safety automaton for the matrix of an all-universal hyper body over an
// n-self-composition; atoms are re-indexed from path variables to the copy
// of their scheduler variable. Letters are valuations of those atoms,
// computed from tuple labels by the product construction.
SafetyDfa safety_dfa(const HyperBody& body, const Mdp& m, int n, const AutomataCaps& caps = {});

// letter of the flattened label set of a product state
uint32_t letter_of_labels(const std::vector<IndexedProp>& props,
                          const std::vector<IndexedProp>& chain_props,
                          const std::vector<PropId>& label);

// textual DRA exchange format so hand-written automata can bypass Safra
Dra parse_dra_text(const std::string& text);
std::string write_dra_text(const Dra& d);

} // namespace phl
