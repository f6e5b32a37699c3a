#pragma once

#include <string>

#include "logic.hpp"

namespace phl {

// parses the concrete PHL syntax and resolves variable scopes; throws
// ParseError, UnboundVariableError or NotWellFormedError
PhlFormula parse_phl(const std::string& text);

// standalone LTL parser for tests and tools; atoms stay unresolved
LtlPtr parse_ltl(const std::string& text);

// scope checking and atom indexing for hand-built formulas
PhlFormula resolve(const PhlFormula& f);

} // namespace phl
