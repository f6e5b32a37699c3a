#pragma once

#include <vector>

#include "automata.hpp"
#include "mdp.hpp"

namespace phl {

struct CompositionCaps {
    long long self_comp_cap = 1'000'000;  // states of M^n
    long long product_cap = 5'000'000;    // states of the products
};

// M^n with tuple states and actions (mixed radix, component 1 most
// significant) and labels flattened to copy-indexed propositions.
struct SelfCompositionMdp {
    Mdp mdp;
    int copies = 1;
    int base_states = 0;
    int base_actions = 0;

    std::vector<int> state_tuple(StateId s) const { return tuple_unrank(s, base_states, copies); }
    std::vector<int> action_tuple(ActionId a) const {
        return tuple_unrank(a, base_actions, copies);
    }
};

SelfCompositionMdp self_compose(const Mdp& m, int n, const CompositionCaps& caps = {});

// Product of a self-composition with the safety automaton and optionally
// Rabin automata. States carry back-maps into the factors; lifted Rabin
// pair membership is stored per product state.
struct ProductMdp {
    Mdp mdp;  // pruned; satisfies all MDP invariants
    std::vector<int> comp_state;               // product state -> M^n state
    std::vector<int> dfa_state;                // product state -> safety DFA state
    std::vector<std::vector<int>> aut_state;   // [operand][product state] -> DRA state
    std::vector<std::vector<RabinPair>> lifted;  // [operand] -> pairs over product states
    double initial_mass = 1.0;                 // surviving initial probability
};

// M^n x D_psi with iterative elimination of invalid actions and states.
// Throws EmptyProductError when no initial state survives.
ProductMdp product_with_safety(const SelfCompositionMdp& mc, const SafetyDfa& d,
                               const CompositionCaps& caps = {});

// (M^n x D) x A_1 x ... x A_k; automata alphabets are read through the
// flattened labels. The result is reachability-trimmed; no pruning is
// needed because the transition functions are total.
ProductMdp product_with_rabin(const ProductMdp& p, const std::vector<Dra>& automata,
                              const CompositionCaps& caps = {});

} // namespace phl
