#include "logic.hpp"

#include <map>

namespace phl {

namespace {
LtlPtr mk(Ltl node) { return std::make_shared<const Ltl>(std::move(node)); }
} // namespace

LtlPtr ltl_true() { return mk({LtlOp::True, "", "", -1, nullptr, nullptr}); }
LtlPtr ltl_false() { return mk({LtlOp::False, "", "", -1, nullptr, nullptr}); }

LtlPtr ltl_atom(std::string base, std::string var, int index) {
    return mk({LtlOp::Atom, std::move(base), std::move(var), index, nullptr, nullptr});
}

LtlPtr ltl_not(LtlPtr f) { return mk({LtlOp::Not, "", "", -1, std::move(f), nullptr}); }

LtlPtr ltl_bin(LtlOp op, LtlPtr l, LtlPtr r) {
    return mk({op, "", "", -1, std::move(l), std::move(r)});
}

LtlPtr ltl_un(LtlOp op, LtlPtr f) { return mk({op, "", "", -1, std::move(f), nullptr}); }

bool ltl_equal(const LtlPtr& a, const LtlPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->op != b->op) return false;
    if (a->op == LtlOp::Atom)
        return a->atom_base == b->atom_base && a->atom_var == b->atom_var;
    return ltl_equal(a->lhs, b->lhs) && ltl_equal(a->rhs, b->rhs);
}

int ltl_size(const LtlPtr& f) {
    if (!f) return 0;
    return 1 + ltl_size(f->lhs) + ltl_size(f->rhs);
}

LtlPtr desugar(const LtlPtr& f) {
    switch (f->op) {
        case LtlOp::True:
        case LtlOp::Atom:
            return f;
        case LtlOp::False:
            return ltl_not(ltl_true());
        case LtlOp::Not:
            return ltl_not(desugar(f->lhs));
        case LtlOp::And:
            return ltl_bin(LtlOp::And, desugar(f->lhs), desugar(f->rhs));
        case LtlOp::Or:  // a \/ b == !(!a /\ !b)
            return ltl_not(ltl_bin(LtlOp::And, ltl_not(desugar(f->lhs)), ltl_not(desugar(f->rhs))));
        case LtlOp::Imp:  // a -> b == !(a /\ !b)
            return ltl_not(ltl_bin(LtlOp::And, desugar(f->lhs), ltl_not(desugar(f->rhs))));
        case LtlOp::Iff: {
            auto l = desugar(f->lhs), r = desugar(f->rhs);
            auto imp1 = ltl_not(ltl_bin(LtlOp::And, l, ltl_not(r)));
            auto imp2 = ltl_not(ltl_bin(LtlOp::And, r, ltl_not(l)));
            return ltl_bin(LtlOp::And, imp1, imp2);
        }
        case LtlOp::Next:
            return ltl_un(LtlOp::Next, desugar(f->lhs));
        case LtlOp::Until:
            return ltl_bin(LtlOp::Until, desugar(f->lhs), desugar(f->rhs));
        case LtlOp::WeakUntil: {
            // a W b == !(!b U (!a /\ !b))
            auto a = desugar(f->lhs), b = desugar(f->rhs);
            auto inner = ltl_bin(LtlOp::Until, ltl_not(b),
                                 ltl_bin(LtlOp::And, ltl_not(a), ltl_not(b)));
            return ltl_not(inner);
        }
        case LtlOp::Eventually:
            return ltl_bin(LtlOp::Until, ltl_true(), desugar(f->lhs));
        case LtlOp::Always:  // G a == !(true U !a)
            return ltl_not(ltl_bin(LtlOp::Until, ltl_true(), ltl_not(desugar(f->lhs))));
    }
    throw PhlError("desugar: unreachable");
}

namespace {
LtlPtr nnf_pos(const LtlPtr& f);
LtlPtr nnf_neg(const LtlPtr& f);

LtlPtr nnf_pos(const LtlPtr& f) {
    switch (f->op) {
        case LtlOp::True:
        case LtlOp::False:
        case LtlOp::Atom:
            return f;
        case LtlOp::Not:
            return nnf_neg(f->lhs);
        case LtlOp::And:
        case LtlOp::Or:
        case LtlOp::Until:
        case LtlOp::WeakUntil:
            return ltl_bin(f->op, nnf_pos(f->lhs), nnf_pos(f->rhs));
        case LtlOp::Imp:
            return ltl_bin(LtlOp::Or, nnf_neg(f->lhs), nnf_pos(f->rhs));
        case LtlOp::Iff:
            return ltl_bin(LtlOp::Or, ltl_bin(LtlOp::And, nnf_pos(f->lhs), nnf_pos(f->rhs)),
                           ltl_bin(LtlOp::And, nnf_neg(f->lhs), nnf_neg(f->rhs)));
        case LtlOp::Next:
        case LtlOp::Eventually:
        case LtlOp::Always:
            return ltl_un(f->op, nnf_pos(f->lhs));
    }
    throw PhlError("nnf: unreachable");
}

LtlPtr nnf_neg(const LtlPtr& f) {
    switch (f->op) {
        case LtlOp::True:
            return ltl_false();
        case LtlOp::False:
            return ltl_true();
        case LtlOp::Atom:
            return ltl_not(f);
        case LtlOp::Not:
            return nnf_pos(f->lhs);
        case LtlOp::And:
            return ltl_bin(LtlOp::Or, nnf_neg(f->lhs), nnf_neg(f->rhs));
        case LtlOp::Or:
            return ltl_bin(LtlOp::And, nnf_neg(f->lhs), nnf_neg(f->rhs));
        case LtlOp::Imp:
            return ltl_bin(LtlOp::And, nnf_pos(f->lhs), nnf_neg(f->rhs));
        case LtlOp::Iff:
            return ltl_bin(LtlOp::Or, ltl_bin(LtlOp::And, nnf_pos(f->lhs), nnf_neg(f->rhs)),
                           ltl_bin(LtlOp::And, nnf_neg(f->lhs), nnf_pos(f->rhs)));
        case LtlOp::Next:
            return ltl_un(LtlOp::Next, nnf_neg(f->lhs));
        case LtlOp::Until:  // !(a U b) == !b W (!a /\ !b)
            return ltl_bin(LtlOp::WeakUntil, nnf_neg(f->rhs),
                           ltl_bin(LtlOp::And, nnf_neg(f->lhs), nnf_neg(f->rhs)));
        case LtlOp::WeakUntil:  // !(a W b) == !b U (!a /\ !b)
            return ltl_bin(LtlOp::Until, nnf_neg(f->rhs),
                           ltl_bin(LtlOp::And, nnf_neg(f->lhs), nnf_neg(f->rhs)));
        case LtlOp::Eventually:
            return ltl_un(LtlOp::Always, nnf_neg(f->lhs));
        case LtlOp::Always:
            return ltl_un(LtlOp::Eventually, nnf_neg(f->lhs));
    }
    throw PhlError("nnf: unreachable");
}
} // namespace

LtlPtr nnf(const LtlPtr& f) { return nnf_pos(f); }

namespace {
bool safety_ops_only(const LtlPtr& f) {
    if (!f) return true;
    switch (f->op) {
        case LtlOp::Until:
        case LtlOp::Eventually:
            return false;
        default:
            return safety_ops_only(f->lhs) && safety_ops_only(f->rhs);
    }
}
} // namespace

bool is_syntactic_safety(const LtlPtr& matrix) { return safety_ops_only(nnf(matrix)); }

// ---------------------------------------------------------------------------
// printing

namespace {
// precedence levels: <-> 0, -> 1, \/ 2, /\ 3, U/W 4, unary 5, primary 6
int ltl_level(LtlOp op) {
    switch (op) {
        case LtlOp::Iff: return 0;
        case LtlOp::Imp: return 1;
        case LtlOp::Or: return 2;
        case LtlOp::And: return 3;
        case LtlOp::Until:
        case LtlOp::WeakUntil: return 4;
        case LtlOp::Not:
        case LtlOp::Next:
        case LtlOp::Eventually:
        case LtlOp::Always: return 5;
        default: return 6;
    }
}

void ltl_print(const LtlPtr& f, int min_level, std::string& out) {
    int lvl = ltl_level(f->op);
    bool paren = lvl < min_level;
    if (paren) out += "(";
    switch (f->op) {
        case LtlOp::True: out += "true"; break;
        case LtlOp::False: out += "false"; break;
        case LtlOp::Atom: out += f->atom_base + "@" + f->atom_var; break;
        case LtlOp::Not:
            out += "!";
            ltl_print(f->lhs, 5, out);
            break;
        case LtlOp::Next:
            out += "X ";
            ltl_print(f->lhs, 5, out);
            break;
        case LtlOp::Eventually:
            out += "F ";
            ltl_print(f->lhs, 5, out);
            break;
        case LtlOp::Always:
            out += "G ";
            ltl_print(f->lhs, 5, out);
            break;
        case LtlOp::Until:
        case LtlOp::WeakUntil:
            // right associative
            ltl_print(f->lhs, 5, out);
            out += f->op == LtlOp::Until ? " U " : " W ";
            ltl_print(f->rhs, 4, out);
            break;
        case LtlOp::And:
        case LtlOp::Or:
        case LtlOp::Iff: {
            // left associative
            int l = lvl;
            ltl_print(f->lhs, l, out);
            out += f->op == LtlOp::And ? " /\\ " : f->op == LtlOp::Or ? " \\/ " : " <-> ";
            ltl_print(f->rhs, l + 1, out);
            break;
        }
        case LtlOp::Imp:
            // right associative
            ltl_print(f->lhs, 2, out);
            out += " -> ";
            ltl_print(f->rhs, 1, out);
            break;
    }
    if (paren) out += ")";
}
} // namespace

std::string ltl_to_string(const LtlPtr& f) {
    std::string out;
    ltl_print(f, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// PHL nodes

namespace {
PhlPtr mkp(PhlNode n) { return std::make_shared<const PhlNode>(std::move(n)); }
} // namespace

PhlPtr phl_quant(bool universal, std::string var, PhlPtr sub) {
    PhlNode n;
    n.kind = PhlKind::SchedQuant;
    n.universal = universal;
    n.var = std::move(var);
    n.lhs = std::move(sub);
    return mkp(std::move(n));
}

PhlPtr phl_and(PhlPtr l, PhlPtr r) {
    PhlNode n;
    n.kind = PhlKind::And;
    n.lhs = std::move(l);
    n.rhs = std::move(r);
    return mkp(std::move(n));
}

PhlPtr phl_or(PhlPtr l, PhlPtr r) {
    PhlNode n;
    n.kind = PhlKind::Or;
    n.lhs = std::move(l);
    n.rhs = std::move(r);
    return mkp(std::move(n));
}

PhlPtr phl_not(PhlPtr f) {
    PhlNode n;
    n.kind = PhlKind::Not;
    n.lhs = std::move(f);
    return mkp(std::move(n));
}

PhlPtr phl_hyper(HyperBody body) {
    PhlNode n;
    n.kind = PhlKind::Hyper;
    n.hyper = std::make_shared<const HyperBody>(std::move(body));
    return mkp(std::move(n));
}

PhlPtr phl_pred(ProbPredicate p) {
    PhlNode n;
    n.kind = PhlKind::Pred;
    n.pred = std::make_shared<const ProbPredicate>(std::move(p));
    return mkp(std::move(n));
}

bool HyperBody::all_universal() const {
    for (const auto& q : prefix)
        if (!q.universal) return false;
    return true;
}

namespace {
bool pred_equal(const ProbPredicate& a, const ProbPredicate& b) {
    if (a.cmp != b.cmp || a.bound != b.bound || a.terms.size() != b.terms.size()) return false;
    for (size_t i = 0; i < a.terms.size(); ++i) {
        if (a.terms[i].coeff != b.terms[i].coeff) return false;
        if (!ltl_equal(a.terms[i].operand, b.terms[i].operand)) return false;
    }
    return true;
}

bool hyper_equal(const HyperBody& a, const HyperBody& b) {
    if (a.prefix.size() != b.prefix.size()) return false;
    for (size_t i = 0; i < a.prefix.size(); ++i) {
        const auto& x = a.prefix[i];
        const auto& y = b.prefix[i];
        if (x.universal != y.universal || x.path_var != y.path_var || x.sched_var != y.sched_var)
            return false;
    }
    return ltl_equal(a.matrix, b.matrix);
}

bool node_equal(const PhlPtr& a, const PhlPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case PhlKind::SchedQuant:
            return a->universal == b->universal && a->var == b->var && node_equal(a->lhs, b->lhs);
        case PhlKind::And:
        case PhlKind::Or:
            return node_equal(a->lhs, b->lhs) && node_equal(a->rhs, b->rhs);
        case PhlKind::Not:
            return node_equal(a->lhs, b->lhs);
        case PhlKind::Hyper:
            return hyper_equal(*a->hyper, *b->hyper);
        case PhlKind::Pred:
            return pred_equal(*a->pred, *b->pred);
    }
    return false;
}
} // namespace

bool phl_equal(const PhlFormula& a, const PhlFormula& b) { return node_equal(a.root, b.root); }

// ---------------------------------------------------------------------------
// predicate normalization

NormalizedPredicate normalize_predicate(const ProbPredicate& p) {
    std::vector<ProbTerm> terms = p.terms;
    Rational bound = p.bound;
    Cmp cmp = p.cmp;

    // >= / > : multiply both sides by -1
    if (cmp == Cmp::Ge || cmp == Cmp::Gt) {
        for (auto& t : terms) t.coeff = -t.coeff;
        bound = -bound;
        cmp = cmp == Cmp::Ge ? Cmp::Le : Cmp::Lt;
    }

    // flip negative coefficients via P(f) = 1 - P(!f)
    std::vector<ProbTerm> out;
    for (auto& t : terms) {
        if (t.coeff == Rational(0)) continue;
        if (t.coeff > Rational(0)) {
            out.push_back(t);
        } else {
            ProbTerm nt;
            nt.coeff = -t.coeff;
            nt.explicit_coeff = t.explicit_coeff;
            nt.operand = ltl_not(t.operand);
            bound -= t.coeff;  // move the constant c_i to the right-hand side
            out.push_back(std::move(nt));
        }
    }

    NormalizedPredicate result;
    result.pred.cmp = cmp;
    result.pred.bound = bound;
    result.pred.terms = std::move(out);
    if (result.pred.terms.empty()) {
        bool sat = cmp == Cmp::Le ? Rational(0) <= bound : Rational(0) < bound;
        result.constant = sat;
    }
    return result;
}

// ---------------------------------------------------------------------------
// classification

namespace {
bool contains_sched_quant(const PhlPtr& f) {
    if (!f) return false;
    if (f->kind == PhlKind::SchedQuant) return true;
    return contains_sched_quant(f->lhs) || contains_sched_quant(f->rhs);
}

struct Prefix {
    std::vector<std::string> vars;
    bool all_universal = true;
    bool all_existential = true;
    PhlPtr body;
};

Prefix strip_prefix(const PhlFormula& f) {
    Prefix p;
    PhlPtr cur = f.root;
    while (cur && cur->kind == PhlKind::SchedQuant) {
        p.vars.push_back(cur->var);
        if (cur->universal)
            p.all_existential = false;
        else
            p.all_universal = false;
        cur = cur->lhs;
    }
    p.body = cur;
    return p;
}

// at most one path variable per scheduler variable, as needed for the
// self-composition route
bool one_path_var_per_sched(const HyperBody& h, int n) {
    std::vector<int> count(n, 0);
    for (const auto& q : h.prefix) {
        if (q.sched_index < 0 || q.sched_index >= n) return false;
        if (++count[q.sched_index] > 1) return false;
    }
    return true;
}

bool ui_hyper_ok(const HyperBody& h, int n) {
    return h.all_universal() && one_path_var_per_sched(h, n) && is_syntactic_safety(h.matrix);
}

const PhlNode* as_negated_hyper(const PhlPtr& f) {
    if (f->kind == PhlKind::Not && f->lhs->kind == PhlKind::Hyper) return f->lhs.get();
    return nullptr;
}
} // namespace

Fragment classify_fragment(const PhlFormula& f) {
    if (universal_implication_view(f)) return Fragment::UniversalImplication;
    if (existential_conjunction_view(f)) return Fragment::ExistentialConjunction;
    return Fragment::Other;
}

std::optional<FragmentView> universal_implication_view(const PhlFormula& f) {
    Prefix p = strip_prefix(f);
    if (p.vars.empty() || !p.all_universal || !p.body) return std::nullopt;
    if (contains_sched_quant(p.body)) return std::nullopt;
    int n = static_cast<int>(p.vars.size());

    FragmentView v;
    v.sched_vars = p.vars;
    if (p.body->kind == PhlKind::Pred) {
        v.pred = *p.body->pred;
        return v;
    }
    if (p.body->kind == PhlKind::Or) {
        const PhlNode* hyper = nullptr;
        const PhlNode* pred = nullptr;
        if ((hyper = as_negated_hyper(p.body->lhs)) && p.body->rhs->kind == PhlKind::Pred)
            pred = p.body->rhs.get();
        else if ((hyper = as_negated_hyper(p.body->rhs)) && p.body->lhs->kind == PhlKind::Pred)
            pred = p.body->lhs.get();
        if (hyper && pred && ui_hyper_ok(*hyper->hyper, n)) {
            v.body = *hyper->hyper;
            v.pred = *pred->pred;
            return v;
        }
    }
    return std::nullopt;
}

std::optional<FragmentView> existential_conjunction_view(const PhlFormula& f) {
    Prefix p = strip_prefix(f);
    if (p.vars.empty() || !p.all_existential || !p.body) return std::nullopt;
    if (contains_sched_quant(p.body)) return std::nullopt;

    FragmentView v;
    v.sched_vars = p.vars;
    if (p.body->kind == PhlKind::Pred) {
        v.pred = *p.body->pred;
        return v;
    }
    if (p.body->kind == PhlKind::And) {
        const PhlNode* hyper = nullptr;
        const PhlNode* pred = nullptr;
        if (p.body->lhs->kind == PhlKind::Hyper && p.body->rhs->kind == PhlKind::Pred) {
            hyper = p.body->lhs.get();
            pred = p.body->rhs.get();
        } else if (p.body->rhs->kind == PhlKind::Hyper && p.body->lhs->kind == PhlKind::Pred) {
            hyper = p.body->rhs.get();
            pred = p.body->lhs.get();
        }
        if (hyper && pred) {
            v.body = *hyper->hyper;
            v.pred = *pred->pred;
            return v;
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// pretty printer; parse(pretty_print(f)) is structurally f

namespace {
void print_pred(const ProbPredicate& p, std::string& out) {
    if (p.terms.empty()) throw PhlError("pretty_print: empty probabilistic predicate");
    for (size_t i = 0; i < p.terms.size(); ++i) {
        const auto& t = p.terms[i];
        Rational c = t.coeff;
        if (i == 0) {
            if (c < Rational(0))
                throw PhlError("pretty_print: leading negative coefficient not representable");
        } else {
            out += c < Rational(0) ? " - " : " + ";
            if (c < Rational(0)) c = -c;
        }
        if (c != Rational(1) || t.explicit_coeff) out += to_string(c) + " * ";
        out += "P(";
        out += ltl_to_string(t.operand);
        out += ")";
    }
    switch (p.cmp) {
        case Cmp::Le: out += " <= "; break;
        case Cmp::Lt: out += " < "; break;
        case Cmp::Ge: out += " >= "; break;
        case Cmp::Gt: out += " > "; break;
    }
    if (p.bound < Rational(0))
        throw PhlError("pretty_print: negative bound not representable");
    out += to_string(p.bound);
}

void print_hyper(const HyperBody& h, std::string& out) {
    out += "(";
    for (const auto& q : h.prefix) {
        out += q.universal ? "forall " : "exists ";
        out += q.path_var + " : " + q.sched_var + ". ";
    }
    ltl_print(h.matrix, 0, out);
    out += ")";
}

// PHL levels: \/ 0, /\ 1, unit 2
void print_node(const PhlPtr& f, int min_level, std::string& out) {
    switch (f->kind) {
        case PhlKind::SchedQuant: {
            out += "(";
            PhlPtr cur = f;
            while (cur->kind == PhlKind::SchedQuant) {
                out += cur->universal ? "forall " : "exists ";
                out += cur->var + ". ";
                cur = cur->lhs;
            }
            print_node(cur, 0, out);
            out += ")";
            break;
        }
        case PhlKind::Or: {
            bool paren = 0 < min_level;
            if (paren) out += "(";
            print_node(f->lhs, 0, out);
            out += " \\/ ";
            print_node(f->rhs, 1, out);
            if (paren) out += ")";
            break;
        }
        case PhlKind::And: {
            bool paren = 1 < min_level;
            if (paren) out += "(";
            print_node(f->lhs, 1, out);
            out += " /\\ ";
            print_node(f->rhs, 2, out);
            if (paren) out += ")";
            break;
        }
        case PhlKind::Not:
            out += "!(";
            print_node(f->lhs, 0, out);
            out += ")";
            break;
        case PhlKind::Hyper:
            print_hyper(*f->hyper, out);
            break;
        case PhlKind::Pred:
            print_pred(*f->pred, out);
            break;
    }
}
} // namespace

std::string pretty_print(const PhlFormula& f) {
    std::string out;
    PhlPtr cur = f.root;
    while (cur && cur->kind == PhlKind::SchedQuant) {
        out += cur->universal ? "forall " : "exists ";
        out += cur->var + ". ";
        cur = cur->lhs;
    }
    if (cur) print_node(cur, 0, out);
    return out;
}

} // namespace phl
