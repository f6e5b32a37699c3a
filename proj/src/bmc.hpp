#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "analysis.hpp"
#include "logic.hpp"
#include "mdp.hpp"
#include "verdict.hpp"

namespace phl {

struct BmcProgress {
    long considered = 0;
    long evaluated = 0;
    double tuples_per_second = 0.0;
};

struct BmcConfig {
    int bound = 1;                  // memory states per member scheduler
    long max_iterations = 100000;   // candidate tuples considered
    int threads = 1;
    AutomataCaps caps;
    std::function<void(const BmcProgress&)> progress;
    // per evaluated tuple: (iteration, filter time, model checking time), ms
    std::function<void(long, double, double)> iteration_hook;
};

// Enumerates every deterministic finite-memory scheduler with at most
// `bound` memory states, canonicalized: restricted to its reachable part,
// memory states relabeled in discovery order, tables completed by the
// identity update and the smallest enabled action, and no two memory
// states equivalent. Order: memory size ascending, then lexicographic over
// the assignment tables.
class SchedulerEnumerator {
  public:
    SchedulerEnumerator(const Mdp& m, int bound);
    ~SchedulerEnumerator();

    // i-th scheduler of the stream, or nullptr past the end
    const FiniteMemoryScheduler* get(size_t i);

    // canonical table encoding; injective on the stream
    static std::string canonical_key(const FiniteMemoryScheduler& s, const Mdp& m);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// true iff no two memory states of the (completed) machine are equivalent
bool scheduler_minimal(const FiniteMemoryScheduler& s);

// reachable part, discovery-order relabeling, canonical completion and
// memory minimization to a fixpoint
FiniteMemoryScheduler canonicalize_scheduler(const FiniteMemoryScheduler& s, const Mdp& m);

Verdict bmc_check(const Mdp& m, const PhlFormula& f, const BmcConfig& cfg);

// negates a universal implication into the existential conjunction form and
// searches for a counterexample tuple
Verdict refute_universal(const Mdp& m, const PhlFormula& f, const BmcConfig& cfg);

// shared loop over scheduler tuples for an extracted fragment view
Verdict bmc_search(const Mdp& m, const FragmentView& view, const BmcConfig& cfg);

} // namespace phl
