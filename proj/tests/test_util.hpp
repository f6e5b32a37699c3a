#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "mdp.hpp"
#include "mdp_io.hpp"

namespace phl::test {

inline std::string fixture_path(const std::string& name) {
    return std::string(PHL_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline Mdp fig3() { return parse_mdp_file(fixture_path("fig3.mdp")); }

// deterministic scheduler over 2 memory states from explicit tables
inline FiniteMemoryScheduler two_memory_scheduler(
    const Mdp& m, const std::vector<std::vector<ActionId>>& act,
    const std::vector<std::vector<std::vector<int>>>& update) {
    FiniteMemoryScheduler s;
    s.memory_size = 2;
    s.init_memory = 0;
    s.act.assign(2, std::vector<std::vector<std::pair<ActionId, double>>>(m.num_states()));
    s.update = update;
    for (int q = 0; q < 2; ++q)
        for (int st = 0; st < m.num_states(); ++st) s.act[q][st] = {{act[q][st], 1.0}};
    return s;
}

} // namespace phl::test
