#pragma once

#include <string>

#include "mdp.hpp"

namespace phl {

// explicit text format:
//   mdp
//   states: s0 s1 ...
//   actions: a0 a1 ...
//   init: s0:1.0
//   label s0: a b
//   trans s0 a0: s1:0.5 s2:0.5
Mdp parse_mdp_text(const std::string& text);
Mdp parse_mdp_file(const std::string& path);

// deterministic serialization: states, labels and rows in id order,
// probabilities in shortest round-trip form
std::string write_mdp_text(const Mdp& m);
void write_mdp_file(const Mdp& m, const std::string& path);

std::string format_double(double x);

} // namespace phl
