#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"

namespace phl {

using StateId = int;
using ActionId = int;
using PropId = int;

// probabilities are compared against this tolerance throughout
inline constexpr double kProbTol = 1e-9;

// Atomic proposition, optionally indexed with a copy of a self-composition.
// copy == 0 for propositions of a plain MDP; flattened labels of an
// n-self-composition use copy = component index.
struct IndexedProp {
    std::string base;
    int copy = 0;

    bool operator==(const IndexedProp&) const = default;
    auto operator<=>(const IndexedProp&) const = default;
};

std::string to_string(const IndexedProp& p);

// sparse probability distribution, support sorted by state id
using Distribution = std::vector<std::pair<StateId, double>>;

struct Mdp {
    std::vector<std::string> state_names;
    std::vector<std::string> action_names;
    std::vector<IndexedProp> props;
    std::vector<std::vector<PropId>> labels;  // per state, sorted
    // per state: (action, distribution) entries sorted by action id;
    // absent action means disabled in that state
    std::vector<std::vector<std::pair<ActionId, Distribution>>> trans;
    Distribution init;

    int num_states() const { return static_cast<int>(state_names.size()); }
    int num_actions() const { return static_cast<int>(action_names.size()); }

    const Distribution* dist(StateId s, ActionId a) const;
    std::vector<ActionId> enabled(StateId s) const;
    bool has_prop(StateId s, PropId p) const;
    int prop_id(const std::string& base, int copy = 0) const;  // -1 if unknown
};

// empty result means all invariants hold
std::vector<std::string> validate_mdp(const Mdp& m);

// Finite-memory scheduler (Q, delta, q0, act). act maps (q,s) to a
// distribution over actions; the deterministic case is a single entry.
struct FiniteMemoryScheduler {
    int memory_size = 1;
    int init_memory = 0;
    // act[q][s] -> distribution over actions
    std::vector<std::vector<std::vector<std::pair<ActionId, double>>>> act;
    // update[q][s][a] -> next memory state, total on Q x S x Act
    std::vector<std::vector<std::vector<int>>> update;

    int num_states() const { return act.empty() ? 0 : static_cast<int>(act[0].size()); }
    int num_actions() const;
    bool deterministic() const;
};

// memoryless deterministic scheduler from a choice per state
FiniteMemoryScheduler memoryless_scheduler(const Mdp& m, const std::vector<ActionId>& choice);

struct SchedulerTuple {
    std::vector<FiniteMemoryScheduler> members;

    int size() const { return static_cast<int>(members.size()); }
};

struct MarkovChain {
    std::vector<IndexedProp> props;
    std::vector<std::vector<PropId>> labels;                    // per state, sorted
    std::vector<std::vector<std::pair<StateId, double>>> rows;  // sparse, row-stochastic
    Distribution init;
    // underlying (model state, scheduler memory) per chain state; model state
    // ids are mixed-radix joint ids for chains of a self-composition
    std::vector<std::pair<int, int>> origin;

    int num_states() const { return static_cast<int>(rows.size()); }
    int prop_id(const std::string& base, int copy = 0) const;  // -1 if unknown
    bool has_prop(StateId s, PropId p) const;
};

// Markov chain induced by a finite-memory scheduler, restricted to the
// reachable (s,q) pairs. Labels are inherited from the state component.
MarkovChain induced_chain(const Mdp& m, const FiniteMemoryScheduler& sched);

// Chain of the composed scheduler S1 || ... || Sn over M^n, built directly
// from the members without materializing the self-composition. Labels are
// flattened to copy-indexed propositions.
MarkovChain composed_induced_chain(const Mdp& m, const SchedulerTuple& tuple);

// Componentwise composition over M^n. Joint state and action ids are mixed
// radix with component 1 most significant; memory is Q1 x ... x Qn.
FiniteMemoryScheduler compose_schedulers(const SchedulerTuple& tuple);

// mixed-radix helpers shared by composition and the products
inline long long tuple_rank(const std::vector<int>& xs, int base) {
    long long r = 0;
    for (int x : xs) r = r * base + x;
    return r;
}
std::vector<int> tuple_unrank(long long id, int base, int n);

} // namespace phl
