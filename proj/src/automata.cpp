#include "automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace phl {

std::vector<int> Nba::successors(int state, uint32_t letter) const {
    std::vector<int> out;
    for (const auto& e : edges[state])
        if ((letter & e.guard_mask) == e.guard_bits) out.push_back(e.dst);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// LTL -> NBA: states are elementary (maximal locally consistent) subsets of
// the closure of the desugared formula, transitions follow the expansion
// rules for Next and Until, acceptance is generalized per Until and then
// degeneralized by the counting construction.

namespace {

// reference to a positive closure member, possibly negated
struct Ref {
    int idx;
    bool neg;
};

struct Closure {
    std::vector<LtlPtr> nodes;  // positive forms: True, Atom, And, Next, Until
    std::vector<IndexedProp> atoms;
    std::vector<int> atom_of_node;            // node idx -> atom idx or -1
    std::vector<std::pair<Ref, Ref>> children; // And/Until children, Next in first
    Ref root{-1, false};
};

struct ClosureBuilder {
    Closure c;
    std::map<std::string, int> keys;

    Ref intern(const LtlPtr& f) {
        if (f->op == LtlOp::Not) {
            Ref r = intern(f->lhs);
            return {r.idx, !r.neg};
        }
        std::string key = node_key(f);
        auto it = keys.find(key);
        if (it != keys.end()) return {it->second, false};

        Ref l{-1, false}, r{-1, false};
        if (f->lhs) l = intern(f->lhs);
        if (f->rhs) r = intern(f->rhs);
        int idx = static_cast<int>(c.nodes.size());
        keys[key] = idx;
        c.nodes.push_back(f);
        c.children.push_back({l, r});
        int atom = -1;
        if (f->op == LtlOp::Atom) {
            IndexedProp p{f->atom_base, f->atom_index < 0 ? 0 : f->atom_index};
            auto pos = std::find(c.atoms.begin(), c.atoms.end(), p);
            atom = static_cast<int>(pos - c.atoms.begin());
            if (pos == c.atoms.end()) c.atoms.push_back(p);
        }
        c.atom_of_node.push_back(atom);
        return {idx, false};
    }

    static std::string node_key(const LtlPtr& f) {
        switch (f->op) {
            case LtlOp::True: return "t";
            case LtlOp::Atom:
                return "a:" + f->atom_base + "#" + std::to_string(f->atom_index);
            case LtlOp::And: return "&(" + node_key_ref(f->lhs) + "," + node_key_ref(f->rhs) + ")";
            case LtlOp::Next: return "X(" + node_key_ref(f->lhs) + ")";
            case LtlOp::Until:
                return "U(" + node_key_ref(f->lhs) + "," + node_key_ref(f->rhs) + ")";
            default:
                throw PhlError("closure: formula not in desugared core");
        }
    }

    static std::string node_key_ref(const LtlPtr& f) {
        if (f->op == LtlOp::Not) return "!" + node_key_ref(f->lhs);
        return node_key(f);
    }
};

bool ref_val(uint32_t assignment, Ref r) {
    bool v = (assignment >> r.idx) & 1u;
    return r.neg ? !v : v;
}

} // namespace

Nba ltl_to_nba(const LtlPtr& formula, const AutomataCaps& caps) {
    ClosureBuilder cb;
    LtlPtr core = desugar(formula);
    cb.c.root = cb.intern(core);
    Closure& cl = cb.c;
    const int n = static_cast<int>(cl.nodes.size());
    if (n > 24) throw FormulaTooLargeError("closure of " + ltl_to_string(formula) + " has " +
                                           std::to_string(n) + " members");

    std::vector<int> untils, nexts;
    for (int i = 0; i < n; ++i) {
        if (cl.nodes[i]->op == LtlOp::Until) untils.push_back(i);
        if (cl.nodes[i]->op == LtlOp::Next) nexts.push_back(i);
    }

    // enumerate elementary assignments
    std::vector<uint32_t> elems;
    for (uint32_t v = 0; v < (1u << n); ++v) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
            bool vi = (v >> i) & 1u;
            const auto& node = cl.nodes[i];
            const auto& [l, r] = cl.children[i];
            switch (node->op) {
                case LtlOp::True:
                    ok = vi;
                    break;
                case LtlOp::And:
                    ok = vi == (ref_val(v, l) && ref_val(v, r));
                    break;
                case LtlOp::Until:
                    if (ref_val(v, r)) ok = vi;                    // rhs now forces U
                    else if (vi) ok = ref_val(v, l);               // U without rhs needs lhs
                    break;
                default:
                    break;
            }
        }
        if (ok) {
            elems.push_back(v);
            if (static_cast<int>(elems.size()) > caps.closure_cap)
                throw FormulaTooLargeError("elementary set count exceeds cap for " +
                                           ltl_to_string(formula));
        }
    }

    // GNBA transitions between elementary sets
    const int ne = static_cast<int>(elems.size());
    std::vector<std::vector<int>> succ(ne);
    for (int i = 0; i < ne; ++i) {
        uint32_t b = elems[i];
        for (int j = 0; j < ne; ++j) {
            uint32_t b2 = elems[j];
            bool ok = true;
            for (int x : nexts) {
                if (ref_val(b, {x, false}) != ref_val(b2, cl.children[x].first)) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                for (int u : untils) {
                    const auto& [l, r] = cl.children[u];
                    bool want = ref_val(b, r) || (ref_val(b, l) && ref_val(b2, {u, false}));
                    if (ref_val(b, {u, false}) != want) {
                        ok = false;
                        break;
                    }
                }
            }
            if (ok) succ[i].push_back(j);
        }
    }

    // guard of a state: agreement with its atom valuation
    uint32_t atom_mask_all = 0;
    std::vector<uint32_t> state_bits(ne, 0);
    for (int i = 0; i < n; ++i) {
        if (cl.atom_of_node[i] >= 0) atom_mask_all |= 1u << cl.atom_of_node[i];
    }
    for (int e = 0; e < ne; ++e) {
        for (int i = 0; i < n; ++i)
            if (cl.atom_of_node[i] >= 0 && ((elems[e] >> i) & 1u))
                state_bits[e] |= 1u << cl.atom_of_node[i];
    }

    const int m = static_cast<int>(untils.size());
    // degeneralization: copy j waits for acceptance set j
    auto accepts = [&](int e, int j) {
        int u = untils[j];
        return !ref_val(elems[e], {u, false}) || ref_val(elems[e], cl.children[u].second);
    };

    struct Key {
        int e, j;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, int> index;
    std::vector<Key> states;
    std::deque<Key> queue;
    auto intern_state = [&](Key k) {
        auto it = index.find(k);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        index[k] = id;
        states.push_back(k);
        queue.push_back(k);
        return id;
    };

    Nba out;
    out.props = cl.atoms;
    std::vector<std::vector<int>> raw_succ;
    for (int e = 0; e < ne; ++e)
        if (ref_val(elems[e], cl.root)) intern_state({e, 0});
    while (!queue.empty()) {
        Key k = queue.front();
        queue.pop_front();
        int id = index[k];
        int j2 = m == 0 ? 0 : (accepts(k.e, k.j) ? (k.j + 1) % m : k.j);
        std::vector<int> dsts;
        for (int t : succ[k.e]) dsts.push_back(intern_state({t, j2}));
        raw_succ.resize(states.size());
        raw_succ[id] = std::move(dsts);
    }
    raw_succ.resize(states.size());

    out.edges.assign(states.size(), {});
    out.accepting.assign(states.size(), false);
    for (size_t i = 0; i < states.size(); ++i) {
        for (int d : raw_succ[i])
            out.edges[i].push_back({atom_mask_all, state_bits[states[i].e], d});
        out.accepting[i] = m == 0 || (states[i].j == 0 && accepts(states[i].e, 0));
    }
    for (int e = 0; e < ne; ++e)
        if (ref_val(elems[e], cl.root)) out.initial.push_back(index[{e, 0}]);

    // prune states with no successors (they admit no infinite run), then trim
    std::vector<bool> alive(out.num_states(), true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int s = 0; s < out.num_states(); ++s) {
            if (!alive[s]) continue;
            bool any = false;
            for (const auto& e : out.edges[s])
                if (alive[e.dst]) {
                    any = true;
                    break;
                }
            if (!any) {
                alive[s] = false;
                changed = true;
            }
        }
    }
    std::vector<bool> reach(out.num_states(), false);
    std::deque<int> bfs;
    for (int s : out.initial)
        if (alive[s] && !reach[s]) {
            reach[s] = true;
            bfs.push_back(s);
        }
    while (!bfs.empty()) {
        int s = bfs.front();
        bfs.pop_front();
        for (const auto& e : out.edges[s])
            if (alive[e.dst] && !reach[e.dst]) {
                reach[e.dst] = true;
                bfs.push_back(e.dst);
            }
    }
    std::vector<int> remap(out.num_states(), -1);
    Nba trimmed;
    trimmed.props = out.props;
    for (int s = 0; s < out.num_states(); ++s) {
        if (!reach[s]) continue;
        remap[s] = static_cast<int>(trimmed.edges.size());
        trimmed.edges.emplace_back();
        trimmed.accepting.push_back(out.accepting[s]);
    }
    for (int s = 0; s < out.num_states(); ++s) {
        if (remap[s] < 0) continue;
        for (const auto& e : out.edges[s])
            if (remap[e.dst] >= 0)
                trimmed.edges[remap[s]].push_back({e.guard_mask, e.guard_bits, remap[e.dst]});
    }
    for (int s : out.initial)
        if (remap[s] >= 0) trimmed.initial.push_back(remap[s]);
    return trimmed;
}

// ---------------------------------------------------------------------------
// Safra determinization

namespace {

struct SafraNode {
    int name;
    std::vector<int> label;  // sorted NBA states
    bool mark = false;
    std::vector<SafraNode> children;  // ordered oldest first
};

// empty label on the root encodes the empty tree (rejecting sink)
using SafraTree = std::vector<SafraNode>;  // zero or one root

void serialize(const SafraNode& n, std::string& out) {
    out += std::to_string(n.name) + (n.mark ? "!" : ".") + "[";
    for (int q : n.label) out += std::to_string(q) + ",";
    out += "](";
    for (const auto& c : n.children) serialize(c, out);
    out += ")";
}

std::string tree_key(const SafraTree& t) {
    std::string out;
    for (const auto& n : t) serialize(n, out);
    return out;
}

void collect_names(const SafraNode& n, std::set<int>& names) {
    names.insert(n.name);
    for (const auto& c : n.children) collect_names(c, names);
}

void clear_marks(SafraNode& n) {
    n.mark = false;
    for (auto& c : n.children) clear_marks(c);
}

void spawn(SafraNode& n, const std::vector<bool>& acc, std::set<int>& used, int& name_bound) {
    // children existing before this step are processed first; the spawned
    // child is youngest and not revisited
    size_t existing = n.children.size();
    std::vector<int> inter;
    for (int q : n.label)
        if (acc[q]) inter.push_back(q);
    for (size_t i = 0; i < existing; ++i) spawn(n.children[i], acc, used, name_bound);
    if (!inter.empty()) {
        int fresh = 0;
        while (used.count(fresh)) ++fresh;
        used.insert(fresh);
        name_bound = std::max(name_bound, fresh);
        SafraNode child;
        child.name = fresh;
        child.label = std::move(inter);
        n.children.push_back(std::move(child));
    }
}

void powerset(SafraNode& n, const std::vector<std::vector<int>>& delta_letter) {
    std::set<int> next;
    for (int q : n.label) next.insert(delta_letter[q].begin(), delta_letter[q].end());
    n.label.assign(next.begin(), next.end());
    for (auto& c : n.children) powerset(c, delta_letter);
}

void remove_states(SafraNode& n, const std::set<int>& gone) {
    std::vector<int> keep;
    for (int q : n.label)
        if (!gone.count(q)) keep.push_back(q);
    n.label = std::move(keep);
    for (auto& c : n.children) remove_states(c, gone);
}

void horizontal_merge(SafraNode& n) {
    std::set<int> seen;
    for (auto& c : n.children) {
        remove_states(c, seen);
        seen.insert(c.label.begin(), c.label.end());
    }
    for (auto& c : n.children) horizontal_merge(c);
}

void drop_empty(SafraNode& n) {
    std::vector<SafraNode> keep;
    for (auto& c : n.children) {
        if (c.label.empty()) continue;
        drop_empty(c);
        keep.push_back(std::move(c));
    }
    n.children = std::move(keep);
}

void vertical_merge(SafraNode& n) {
    std::set<int> union_children;
    for (const auto& c : n.children) union_children.insert(c.label.begin(), c.label.end());
    if (!n.children.empty() &&
        std::vector<int>(union_children.begin(), union_children.end()) == n.label) {
        n.children.clear();
        n.mark = true;
        return;
    }
    for (auto& c : n.children) vertical_merge(c);
}

void name_presence(const SafraNode& n, std::vector<bool>& present, std::vector<bool>& marked) {
    if (n.name >= static_cast<int>(present.size())) {
        present.resize(n.name + 1, false);
        marked.resize(n.name + 1, false);
    }
    present[n.name] = true;
    if (n.mark) marked[n.name] = true;
    for (const auto& c : n.children) name_presence(c, present, marked);
}

} // namespace

Dra nba_to_dra(const Nba& a, const AutomataCaps& caps) {
    const int L = a.num_letters();
    const int nq = a.num_states();

    // delta[letter][state] -> sorted successor list
    std::vector<std::vector<std::vector<int>>> delta(L, std::vector<std::vector<int>>(nq));
    for (int letter = 0; letter < L; ++letter)
        for (int q = 0; q < nq; ++q)
            delta[letter][q] = a.successors(q, static_cast<uint32_t>(letter));

    SafraTree init_tree;
    if (!a.initial.empty()) {
        SafraNode root;
        root.name = 0;
        root.label = a.initial;
        std::sort(root.label.begin(), root.label.end());
        init_tree.push_back(std::move(root));
    }

    std::map<std::string, int> index;
    std::vector<SafraTree> trees;
    std::deque<int> queue;
    auto intern = [&](SafraTree t) {
        std::string key = tree_key(t);
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(trees.size());
        if (id >= caps.safra_cap)
            throw StateBlowupError("Safra tree count exceeds cap");
        index[key] = id;
        trees.push_back(std::move(t));
        queue.push_back(id);
        return id;
    };

    int max_name = 0;
    Dra out;
    out.props = a.props;
    out.initial = intern(init_tree);
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        out.delta.resize(trees.size());
        std::vector<int> row(L, -1);
        for (int letter = 0; letter < L; ++letter) {
            SafraTree t = trees[id];
            if (!t.empty()) {
                clear_marks(t[0]);
                std::set<int> used;
                collect_names(t[0], used);
                spawn(t[0], a.accepting, used, max_name);
                powerset(t[0], delta[letter]);
                horizontal_merge(t[0]);
                drop_empty(t[0]);
                if (t[0].label.empty()) t.clear();
                if (!t.empty()) vertical_merge(t[0]);
            }
            row[letter] = intern(std::move(t));
        }
        out.delta[id] = std::move(row);
    }
    out.delta.resize(trees.size());
    for (auto& row : out.delta)
        if (row.empty()) row.assign(L, out.initial);  // unreachable rows never queried

    // pairs per name: B = name absent, G = node marked
    const int nt = static_cast<int>(trees.size());
    for (int name = 0; name <= max_name; ++name) {
        RabinPair pair;
        pair.in_b.assign(nt, false);
        pair.in_g.assign(nt, false);
        bool any_g = false;
        for (int t = 0; t < nt; ++t) {
            std::vector<bool> present, marked;
            if (!trees[t].empty()) name_presence(trees[t][0], present, marked);
            bool p = name < static_cast<int>(present.size()) && present[name];
            bool g = name < static_cast<int>(marked.size()) && marked[name];
            pair.in_b[t] = !p;
            pair.in_g[t] = g;
            any_g = any_g || g;
        }
        if (any_g) out.pairs.push_back(std::move(pair));
    }
    if (out.pairs.empty()) {
        // no accepting behavior at all; keep one unsatisfiable pair so the
        // acceptance check is well defined
        RabinPair pair;
        pair.in_b.assign(nt, true);
        pair.in_g.assign(nt, false);
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

Dra ltl_to_dra(const LtlPtr& f, const AutomataCaps& caps) {
    return nba_to_dra(ltl_to_nba(f, caps), caps);
}

// ---------------------------------------------------------------------------
// safety DFA: deterministic automaton of non-bad-prefixes via obligation
// sets in disjunctive normal form

namespace {

struct SafetyCtx {
    std::vector<LtlPtr> nodes;  // interned NNF subformulas
    std::map<std::string, int> keys;
    std::vector<IndexedProp> atoms;

    static std::string key_of(const LtlPtr& f) {
        if (!f) return "";
        if (f->op == LtlOp::Atom)
            return "a(" + f->atom_base + "#" + std::to_string(f->atom_index) + ")";
        return std::to_string(static_cast<int>(f->op)) + "(" + key_of(f->lhs) + "," +
               key_of(f->rhs) + ")";
    }

    int intern(const LtlPtr& f) {
        std::string key = key_of(f);
        auto it = keys.find(key);
        if (it != keys.end()) return it->second;
        int id = static_cast<int>(nodes.size());
        keys[key] = id;
        nodes.push_back(f);
        return id;
    }
};

using Alt = std::vector<int>;   // sorted obligation set (conjunction)
using Dnf = std::vector<Alt>;   // sorted alternatives

void normalize_dnf(Dnf& d) {
    for (auto& alt : d) {
        std::sort(alt.begin(), alt.end());
        alt.erase(std::unique(alt.begin(), alt.end()), alt.end());
    }
    std::sort(d.begin(), d.end());
    d.erase(std::unique(d.begin(), d.end()), d.end());
    // absorption: drop alternatives that contain another alternative
    Dnf keep;
    for (const auto& alt : d) {
        bool subsumed = false;
        for (const auto& other : d) {
            if (&other == &alt || other.size() > alt.size()) continue;
            if (other.size() == alt.size() && other == alt) continue;
            if (std::includes(alt.begin(), alt.end(), other.begin(), other.end())) {
                subsumed = true;
                break;
            }
        }
        if (!subsumed) keep.push_back(alt);
    }
    d = std::move(keep);
}

Dnf dnf_product(const Dnf& a, const Dnf& b) {
    Dnf out;
    for (const auto& x : a)
        for (const auto& y : b) {
            Alt alt = x;
            alt.insert(alt.end(), y.begin(), y.end());
            out.push_back(std::move(alt));
        }
    return out;
}

// next obligations required to keep the word alive after reading `letter`
Dnf expand(SafetyCtx& ctx, const LtlPtr& f, uint32_t letter) {
    switch (f->op) {
        case LtlOp::True:
            return {{}};
        case LtlOp::False:
            return {};
        case LtlOp::Atom: {
            IndexedProp p{f->atom_base, f->atom_index < 0 ? 0 : f->atom_index};
            auto pos = std::find(ctx.atoms.begin(), ctx.atoms.end(), p);
            bool val = pos != ctx.atoms.end() &&
                       ((letter >> (pos - ctx.atoms.begin())) & 1u);
            return val ? Dnf{{}} : Dnf{};
        }
        case LtlOp::Not: {  // NNF: negation only over atoms
            Dnf pos = expand(ctx, f->lhs, letter);
            return pos.empty() ? Dnf{{}} : Dnf{};
        }
        case LtlOp::And:
            return dnf_product(expand(ctx, f->lhs, letter), expand(ctx, f->rhs, letter));
        case LtlOp::Or: {
            Dnf out = expand(ctx, f->lhs, letter);
            Dnf r = expand(ctx, f->rhs, letter);
            out.insert(out.end(), r.begin(), r.end());
            return out;
        }
        case LtlOp::Next:
            return {{ctx.intern(f->lhs)}};
        case LtlOp::Always: {
            Dnf now = expand(ctx, f->lhs, letter);
            return dnf_product(now, {{ctx.intern(f)}});
        }
        case LtlOp::WeakUntil: {
            // b \/ (a /\ X(a W b))
            Dnf out = expand(ctx, f->rhs, letter);
            Dnf cont = dnf_product(expand(ctx, f->lhs, letter), {{ctx.intern(f)}});
            out.insert(out.end(), cont.begin(), cont.end());
            return out;
        }
        default:
            throw NotSafetyError("operator not in the safety fragment: " + ltl_to_string(f));
    }
}

} // namespace

SafetyDfa safety_dfa(const HyperBody& body, const Mdp& m, int n, const AutomataCaps& caps) {
    (void)m;  // letters are read through labels; the MDP fixes only their meaning
    if (!body.all_universal())
        throw NotSafetyError("hyper body must be all-universal for the safety pipeline");
    for (const auto& q : body.prefix)
        if (q.sched_index < 0 || q.sched_index >= n)
            throw AlphabetMismatchError("path variable '" + q.path_var +
                                        "' is bound outside the " + std::to_string(n) +
                                        "-self-composition");
    if (!is_syntactic_safety(body.matrix))
        throw NotSafetyError("hyper body matrix is not syntactically safe: " +
                             ltl_to_string(body.matrix));

    // re-index atoms from path ordinals to composition copies
    LtlPtr matrix = nnf(body.matrix);
    struct Rewriter {
        const std::vector<PathQuant>& prefix;
        LtlPtr operator()(const LtlPtr& f) const {
            if (!f) return f;
            if (f->op == LtlOp::Atom) {
                int copy = prefix.at(f->atom_index).sched_index;
                return ltl_atom(f->atom_base, f->atom_var, copy);
            }
            Ltl node = *f;
            node.lhs = (*this)(f->lhs);
            node.rhs = (*this)(f->rhs);
            return std::make_shared<const Ltl>(std::move(node));
        }
    };
    matrix = Rewriter{body.prefix}(matrix);

    SafetyCtx ctx;
    struct AtomCollector {
        SafetyCtx& ctx;
        void operator()(const LtlPtr& f) const {
            if (!f) return;
            if (f->op == LtlOp::Atom) {
                IndexedProp p{f->atom_base, f->atom_index < 0 ? 0 : f->atom_index};
                if (std::find(ctx.atoms.begin(), ctx.atoms.end(), p) == ctx.atoms.end())
                    ctx.atoms.push_back(p);
                return;
            }
            (*this)(f->lhs);
            (*this)(f->rhs);
        }
    };
    AtomCollector{ctx}(matrix);
    std::sort(ctx.atoms.begin(), ctx.atoms.end());
    if (ctx.atoms.size() > 20)
        throw FormulaTooLargeError("safety matrix over more than 20 indexed atoms");

    SafetyDfa out;
    out.props = ctx.atoms;
    const int L = out.num_letters();

    std::map<Dnf, int> index;
    std::vector<Dnf> states;
    std::deque<int> queue;
    auto intern = [&](Dnf d) {
        normalize_dnf(d);
        auto it = index.find(d);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        if (id >= caps.closure_cap) throw StateBlowupError("safety DFA exceeds state cap");
        index[d] = id;
        states.push_back(std::move(d));
        queue.push_back(id);
        return id;
    };

    out.initial = intern({{ctx.intern(matrix)}});
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        out.delta.resize(states.size());
        std::vector<int> row(L, -1);
        for (int letter = 0; letter < L; ++letter) {
            Dnf next;
            for (const auto& alt : states[id]) {
                Dnf alt_next{{}};
                for (int ob : alt) {
                    alt_next = dnf_product(alt_next, expand(ctx, ctx.nodes[ob],
                                                            static_cast<uint32_t>(letter)));
                    if (alt_next.empty()) break;
                }
                next.insert(next.end(), alt_next.begin(), alt_next.end());
            }
            if (next.empty()) continue;  // bad prefix
            row[letter] = intern(std::move(next));
        }
        out.delta[id] = std::move(row);
    }
    out.delta.resize(states.size());
    return out;
}

uint32_t letter_of_labels(const std::vector<IndexedProp>& props,
                          const std::vector<IndexedProp>& chain_props,
                          const std::vector<PropId>& label) {
    uint32_t letter = 0;
    for (size_t i = 0; i < props.size(); ++i) {
        for (PropId p : label) {
            if (chain_props[p] == props[i]) {
                letter |= 1u << i;
                break;
            }
        }
    }
    return letter;
}

// ---------------------------------------------------------------------------
// textual DRA exchange format

Dra parse_dra_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Dra d;
    int lineno = 0;
    bool header = false;
    int declared_states = -1;
    std::vector<std::map<int, int>> rows;
    auto fail = [&](const std::string& msg) -> void { throw ParseError(lineno, 1, msg); };

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (!header) {
            if (word != "dra") fail("expected header 'dra'");
            header = true;
            continue;
        }
        if (word == "props:") {
            std::string p;
            while (ls >> p) {
                auto at = p.find('@');
                if (at == std::string::npos || at == 0 || at + 1 >= p.size())
                    fail("prop must be written base@copy");
                d.props.push_back({p.substr(0, at), std::stoi(p.substr(at + 1)) - 1});
            }
            continue;
        }
        if (word == "states:") {
            ls >> declared_states;
            if (declared_states <= 0) fail("positive state count required");
            rows.assign(declared_states, {});
            continue;
        }
        if (word == "initial:") {
            ls >> d.initial;
            continue;
        }
        if (word == "trans") {
            int s;
            std::string bits;
            ls >> s >> bits;
            if (!bits.empty() && bits.back() == ':') bits.pop_back();
            int t;
            if (!(ls >> t)) fail("missing transition target");
            if (s < 0 || s >= declared_states || t < 0 || t >= declared_states)
                fail("transition state out of range");
            if (bits.size() != d.props.size()) fail("letter width does not match props");
            uint32_t letter = 0;
            for (size_t i = 0; i < bits.size(); ++i)
                if (bits[i] == '1') letter |= 1u << i;
                else if (bits[i] != '0') fail("letter must be a 0/1 string");
            if (rows[s].count(static_cast<int>(letter))) fail("duplicate transition");
            rows[s][static_cast<int>(letter)] = t;
            continue;
        }
        if (word == "pair") {
            int j;
            std::string which;
            ls >> j >> which;
            if (!which.empty() && which.back() == ':') which.pop_back();
            if (j < 0) fail("pair index out of range");
            if (static_cast<int>(d.pairs.size()) <= j) d.pairs.resize(j + 1);
            auto& pair = d.pairs[j];
            if (pair.in_b.empty()) {
                pair.in_b.assign(declared_states, false);
                pair.in_g.assign(declared_states, false);
            }
            int s;
            while (ls >> s) {
                if (s < 0 || s >= declared_states) fail("pair state out of range");
                if (which == "B") pair.in_b[s] = true;
                else if (which == "G") pair.in_g[s] = true;
                else fail("pair line must name B or G");
            }
            continue;
        }
        fail("unrecognized line '" + word + "'");
    }
    if (declared_states <= 0) throw PhlError("dra: missing states line");
    const int L = d.num_letters();
    d.delta.assign(declared_states, std::vector<int>(L, -1));
    for (int s = 0; s < declared_states; ++s) {
        for (int letter = 0; letter < L; ++letter) {
            auto it = rows[s].find(letter);
            if (it == rows[s].end())
                throw PhlError("dra: state " + std::to_string(s) +
                               " missing a transition; the function must be total");
            d.delta[s][letter] = it->second;
        }
    }
    for (auto& pair : d.pairs)
        if (pair.in_b.empty()) {
            pair.in_b.assign(declared_states, false);
            pair.in_g.assign(declared_states, false);
        }
    if (d.pairs.empty()) throw PhlError("dra: at least one acceptance pair required");
    return d;
}

std::string write_dra_text(const Dra& d) {
    std::string out = "dra\nprops:";
    for (const auto& p : d.props)
        out += " " + p.base + "@" + std::to_string(p.copy + 1);
    out += "\nstates: " + std::to_string(d.num_states());
    out += "\ninitial: " + std::to_string(d.initial) + "\n";
    const int L = d.num_letters();
    for (int s = 0; s < d.num_states(); ++s) {
        for (int letter = 0; letter < L; ++letter) {
            std::string bits;
            for (size_t i = 0; i < d.props.size(); ++i)
                bits += ((letter >> i) & 1) ? '1' : '0';
            out += "trans " + std::to_string(s) + " " + bits + ": " +
                   std::to_string(d.delta[s][letter]) + "\n";
        }
    }
    for (size_t j = 0; j < d.pairs.size(); ++j) {
        out += "pair " + std::to_string(j) + " B:";
        for (int s = 0; s < d.num_states(); ++s)
            if (d.pairs[j].in_b[s]) out += " " + std::to_string(s);
        out += "\npair " + std::to_string(j) + " G:";
        for (int s = 0; s < d.num_states(); ++s)
            if (d.pairs[j].in_g[s]) out += " " + std::to_string(s);
        out += "\n";
    }
    return out;
}

} // namespace phl
