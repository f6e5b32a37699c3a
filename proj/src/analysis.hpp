#pragma once

#include <functional>
#include <vector>

#include "automata.hpp"
#include "composition.hpp"
#include "logic.hpp"
#include "mdp.hpp"

namespace phl {

// closed and strongly connected sub-MDP: state set plus a nonempty action
// restriction per state
struct EndComponent {
    std::vector<int> states;
    std::vector<std::vector<ActionId>> actions;  // aligned with states
};

std::vector<std::vector<int>> tarjan_sccs(const std::vector<std::vector<int>>& adj);

// maximal end components of the sub-MDP over the allowed states
std::vector<EndComponent> maximal_end_components(const Mdp& m,
                                                 const std::vector<bool>& allowed);

// success sets U_I for every nonempty I, keyed by bitmask over 1..2^k-1
struct SuccessSetTable {
    int k = 0;
    std::vector<std::vector<bool>> in_u;  // [mask][state]
};

SuccessSetTable success_sets(const ProductMdp& p, int k);

struct OptimizationResult {
    std::vector<double> value;      // x* per state
    double c_star = 0.0;            // sum of init * x*
    std::vector<int> policy;        // argmax action id, -1 = take the floor
    long iterations = 0;
};

// least solution of x = max(floor, max_a P x) by value iteration from zero;
// floor(s) is the largest sum_{i in I} c_i over I with s in U_I
OptimizationResult solve_optimal_value(const ProductMdp& p, const SuccessSetTable& u,
                                       const std::vector<double>& coeffs,
                                       double residual = 1e-9, long max_iterations = 1'000'000,
                                       const std::function<void(const std::vector<double>&)>&
                                           observer = nullptr);

// bottom SCCs of a chain's digraph
std::vector<std::vector<int>> bottom_sccs(
    const std::vector<std::vector<std::pair<int, double>>>& rows);

// probability of reaching the target set from each state (sparse direct solve)
std::vector<double> reach_probability(const MarkovChain& c, const std::vector<bool>& target);

// Prob{ rho | rho |= f } via the chain x DRA(f) product and its accepting
// bottom SCCs
double chain_ltl_probability(const MarkovChain& c, const LtlPtr& f, const AutomataCaps& caps = {});

// all-universal hyper body on the tuple's induced chains: true iff no tuple
// of paths violates the matrix (checked via an NBA for the negation on the
// synchronous product digraph)
bool check_hyper_body_on_tuple(const Mdp& m, const SchedulerTuple& tuple, const HyperBody& body,
                               const AutomataCaps& caps = {});

struct PredicateValue {
    double value = 0.0;
    bool satisfied = false;
    bool knife_edge = false;  // |value - bound| within tolerance
};

// pred must be normalized (comparator <= or <, positive coefficients)
PredicateValue evaluate_predicate(const MarkovChain& joint, const ProbPredicate& pred,
                                  const AutomataCaps& caps = {});

} // namespace phl
