#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace phl {

// ---------------------------------------------------------------------------
// LTL

enum class LtlOp {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Imp,
    Iff,
    Next,
    Until,
    WeakUntil,
    Eventually,
    Always,
};

struct Ltl;
using LtlPtr = std::shared_ptr<const Ltl>;

struct Ltl {
    LtlOp op;
    std::string atom_base;  // Atom only
    std::string atom_var;   // variable name as written (sigma or pi)
    int atom_index = -1;    // resolved ordinal of the variable, -1 if unresolved
    LtlPtr lhs, rhs;
};

LtlPtr ltl_true();
LtlPtr ltl_false();
LtlPtr ltl_atom(std::string base, std::string var, int index = -1);
LtlPtr ltl_not(LtlPtr f);
LtlPtr ltl_bin(LtlOp op, LtlPtr l, LtlPtr r);
LtlPtr ltl_un(LtlOp op, LtlPtr f);

bool ltl_equal(const LtlPtr& a, const LtlPtr& b);
int ltl_size(const LtlPtr& f);

// eliminates W, F, G, ->, <->, \/ and False; result uses only
// {True, Atom, Not, And, Next, Until}
LtlPtr desugar(const LtlPtr& f);

// negation normal form over {literal, And, Or, Next, Until, WeakUntil,
// Eventually, Always}; negation only over atoms
LtlPtr nnf(const LtlPtr& f);

// sound syntactic underapproximation: NNF free of Until and Eventually
bool is_syntactic_safety(const LtlPtr& matrix);

std::string ltl_to_string(const LtlPtr& f);

// ---------------------------------------------------------------------------
// PHL

struct PathQuant {
    bool universal;
    std::string path_var;
    std::string sched_var;
    int sched_index = -1;  // ordinal of the scheduler variable in scope
};

struct HyperBody {
    std::vector<PathQuant> prefix;
    LtlPtr matrix;  // atoms indexed by position in prefix

    bool all_universal() const;
};

enum class Cmp { Lt, Le, Gt, Ge };

struct ProbTerm {
    Rational coeff;
    bool explicit_coeff = false;  // printed "c * P(...)" when set
    LtlPtr operand;               // atoms indexed by scheduler ordinal
};

struct ProbPredicate {
    std::vector<ProbTerm> terms;
    Cmp cmp;
    Rational bound;
};

// after normalization the comparator is <= or < and all coefficients are
// strictly positive; an all-zero predicate folds to a constant verdict
struct NormalizedPredicate {
    std::optional<bool> constant;
    ProbPredicate pred;
};

NormalizedPredicate normalize_predicate(const ProbPredicate& p);

enum class PhlKind { SchedQuant, And, Or, Not, Hyper, Pred };

struct PhlNode;
using PhlPtr = std::shared_ptr<const PhlNode>;

struct PhlNode {
    PhlKind kind;
    bool universal = false;  // SchedQuant
    std::string var;         // SchedQuant
    PhlPtr lhs, rhs;         // And/Or children; Not/SchedQuant child in lhs
    std::shared_ptr<const HyperBody> hyper;
    std::shared_ptr<const ProbPredicate> pred;
};

PhlPtr phl_quant(bool universal, std::string var, PhlPtr sub);
PhlPtr phl_and(PhlPtr l, PhlPtr r);
PhlPtr phl_or(PhlPtr l, PhlPtr r);
PhlPtr phl_not(PhlPtr f);
PhlPtr phl_hyper(HyperBody body);
PhlPtr phl_pred(ProbPredicate p);

struct PhlFormula {
    PhlPtr root;
};

bool phl_equal(const PhlFormula& a, const PhlFormula& b);

enum class Fragment { UniversalImplication, ExistentialConjunction, Other };

Fragment classify_fragment(const PhlFormula& f);

// flat view of the two supported fragments
struct FragmentView {
    std::vector<std::string> sched_vars;           // quantifier prefix, in order
    std::optional<HyperBody> body;                 // absent = trivially true
    ProbPredicate pred;
};

std::optional<FragmentView> universal_implication_view(const PhlFormula& f);
std::optional<FragmentView> existential_conjunction_view(const PhlFormula& f);

std::string pretty_print(const PhlFormula& f);

} // namespace phl
