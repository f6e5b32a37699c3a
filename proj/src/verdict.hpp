#pragma once

#include <string>
#include <vector>

#include "mdp.hpp"

namespace phl {

struct Verdict {
    enum class Kind { Holds, Inconclusive, WitnessFound, NoWitnessWithinBound };
    Kind kind = Kind::Inconclusive;
    double c_star = 0.0;         // approximate pipeline
    bool has_c_star = false;
    SchedulerTuple witness;      // WitnessFound
    double witness_value = 0.0;
    int bound = 0;               // bounded search
    long schedulers_checked = 0; // evaluated tuples
    long tuples_considered = 0;  // including filtered ones
    std::vector<std::string> diagnostics;
};

inline const char* to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::Holds: return "Holds";
        case Verdict::Kind::Inconclusive: return "Inconclusive";
        case Verdict::Kind::WitnessFound: return "WitnessFound";
        case Verdict::Kind::NoWitnessWithinBound: return "NoWitnessWithinBound";
    }
    return "?";
}

} // namespace phl
