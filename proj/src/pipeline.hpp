#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "analysis.hpp"
#include "bmc.hpp"
#include "composition.hpp"
#include "logic.hpp"
#include "mdp.hpp"
#include "verdict.hpp"

namespace phl {

struct PipelineOptions {
    AutomataCaps automata_caps;
    CompositionCaps composition_caps;
    double vi_residual = 1e-9;
    long vi_max_iterations = 1'000'000;
    int bmc_bound = 1;
    long bmc_max_iterations = 100000;
    int threads = 1;
    bool recheck_witness = false;
    std::function<void(const BmcProgress&)> progress;
    // operand index (0-based) -> hand-written automaton replacing Safra
    std::map<int, Dra> dra_overrides;
};

struct IterationTiming {
    long iteration;
    double search_ms;
    double model_check_ms;
};

struct RunReport {
    int schema = 1;
    std::string command;
    std::string formula;
    Verdict verdict;
    long iterations = 0;  // evaluated tuples or value-iteration sweeps
    std::map<std::string, long> sizes;
    std::map<std::string, double> timings;
    std::vector<IterationTiming> iteration_timings;
    int exit_code = 0;

    nlohmann::json to_json(const Mdp& m) const;
};

RunReport run_approx(const Mdp& m, const PhlFormula& f, const PipelineOptions& opts);
RunReport run_bmc(const Mdp& m, const PhlFormula& f, const PipelineOptions& opts);

// grid arena benchmark generator: k robots on an n x n grid, goal at the
// top-left cell; per-robot actions g (advance toward the goal), h (hold)
// and a (retreat); moves succeed with probability `slip`, otherwise the
// robot stays put. Labels: goal_i (robot i at the goal) and move_i (robot i
// on a direct corridor to the goal).
Mdp gen_grid(int size, int robots, double slip = 0.9,
             long long state_cap = 1'000'000);

} // namespace phl
