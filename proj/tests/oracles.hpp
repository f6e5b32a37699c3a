#pragma once

// Test-only oracles, independent of the implementation paths they check.

#include <cstdint>
#include <random>
#include <vector>

#include "analysis.hpp"
#include "automata.hpp"
#include "composition.hpp"
#include "logic.hpp"
#include "mdp.hpp"

namespace phl::oracle {

// ultimately periodic word stem loop^omega over letter bitmasks
struct Lasso {
    std::vector<uint32_t> stem, loop;
};

// direct LTL semantics on a lasso, by fixpoint iteration over positions
bool ltl_eval_lasso(const LtlPtr& f, const Lasso& w, const std::vector<IndexedProp>& props);

bool nba_accepts_lasso(const Nba& a, const Lasso& w);
bool dra_accepts_lasso(const Dra& d, const Lasso& w);

// every ultimately periodic word with stem length <= max_stem and loop
// length in [1, max_loop] over 2^props letters
std::vector<Lasso> all_lassos(int max_stem, int max_loop, int props);

// rewrite letters from source_props bit order into target_props bit order
Lasso remap_lasso(const Lasso& w, const std::vector<IndexedProp>& target_props,
                  const std::vector<IndexedProp>& source_props);

// exact-rational BSCC/reachability model checking of a chain against f;
// shares only the DRA construction with the implementation
double chain_ltl_probability_exact(const MarkovChain& c, const LtlPtr& f);

// structural Monte-Carlo: sample until a bottom SCC is entered, then resolve
enum class Template { EvA, AlwA, AlwEvA, EvAlwA, AUntilB };
double chain_probability_mc(const MarkovChain& c, Template t, int prop_a, int prop_b,
                            int samples, uint64_t seed);

// expected total reward of the floor/cash-out MDP under one memoryless
// policy (float evaluation); choice -1 = cash out
double policy_value(const ProductMdp& p, const std::vector<double>& floor_val,
                    const std::vector<int>& choice);

// exhaustive memoryless-policy maximum of the expected total reward
double enumerate_policies_max(const ProductMdp& p, const std::vector<double>& floor_val);

// exact policy iteration (rational arithmetic, Gaussian elimination)
double policy_iteration_exact(const ProductMdp& p, const std::vector<double>& floor_val);

// random instances; all probabilities are dyadic so double encodings are exact
Mdp random_mdp(std::mt19937_64& rng, int max_states, int max_actions, int num_props);
MarkovChain random_chain(std::mt19937_64& rng, int states, int num_props);
LtlPtr random_ltl(std::mt19937_64& rng, int size, int num_props);

// all memoryless deterministic schedulers of m
std::vector<std::vector<ActionId>> all_memoryless_choices(const Mdp& m);

std::vector<double> floors_from_table(const ProductMdp& p, const SuccessSetTable& u,
                                      const std::vector<double>& coeffs);

} // namespace phl::oracle
