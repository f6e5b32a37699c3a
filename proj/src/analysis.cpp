#include "analysis.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace phl {

// iterative Tarjan
std::vector<std::vector<int>> tarjan_sccs(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> idx(n, -1), low(n, 0), on(n, 0), stack;
    std::vector<std::vector<int>> sccs;
    int counter = 0;

    struct Frame {
        int v;
        size_t child;
    };
    for (int root = 0; root < n; ++root) {
        if (idx[root] != -1) continue;
        std::vector<Frame> frames{{root, 0}};
        idx[root] = low[root] = counter++;
        stack.push_back(root);
        on[root] = 1;
        while (!frames.empty()) {
            auto& [v, child] = frames.back();
            if (child < adj[v].size()) {
                int w = adj[v][child++];
                if (idx[w] == -1) {
                    idx[w] = low[w] = counter++;
                    stack.push_back(w);
                    on[w] = 1;
                    frames.push_back({w, 0});
                } else if (on[w]) {
                    low[v] = std::min(low[v], idx[w]);
                }
            } else {
                if (low[v] == idx[v]) {
                    std::vector<int> scc;
                    while (true) {
                        int w = stack.back();
                        stack.pop_back();
                        on[w] = 0;
                        scc.push_back(w);
                        if (w == v) break;
                    }
                    std::sort(scc.begin(), scc.end());
                    sccs.push_back(std::move(scc));
                }
                int v0 = v;
                frames.pop_back();
                if (!frames.empty()) low[frames.back().v] = std::min(low[frames.back().v], low[v0]);
            }
        }
    }
    return sccs;
}

std::vector<EndComponent> maximal_end_components(const Mdp& m, const std::vector<bool>& allowed) {
    const int n = m.num_states();
    std::vector<bool> alive = allowed;
    // action_ok[s][j] follows m.trans[s] positions
    std::vector<std::vector<bool>> action_ok(n);
    for (int s = 0; s < n; ++s) action_ok[s].assign(m.trans[s].size(), true);

    std::vector<int> scc_of(n, -1);
    while (true) {
        // digraph restricted to alive states and surviving actions
        std::vector<std::vector<int>> adj(n);
        for (int s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            for (size_t j = 0; j < m.trans[s].size(); ++j) {
                if (!action_ok[s][j]) continue;
                for (const auto& [t, p] : m.trans[s][j].second) adj[s].push_back(t);
            }
        }
        auto sccs = tarjan_sccs(adj);
        scc_of.assign(n, -1);
        for (size_t i = 0; i < sccs.size(); ++i)
            for (int s : sccs[i]) scc_of[s] = static_cast<int>(i);

        bool changed = false;
        for (int s = 0; s < n; ++s) {
            if (!alive[s]) continue;
            bool any = false;
            for (size_t j = 0; j < m.trans[s].size(); ++j) {
                if (!action_ok[s][j]) continue;
                bool ok = true;
                for (const auto& [t, p] : m.trans[s][j].second) {
                    if (!alive[t] || scc_of[t] != scc_of[s]) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) {
                    action_ok[s][j] = false;
                    changed = true;
                } else {
                    any = true;
                }
            }
            if (!any) {
                alive[s] = false;
                changed = true;
            }
        }
        if (!changed) break;
    }

    std::map<int, EndComponent> by_scc;
    for (int s = 0; s < n; ++s) {
        if (!alive[s]) continue;
        std::vector<ActionId> acts;
        for (size_t j = 0; j < m.trans[s].size(); ++j)
            if (action_ok[s][j]) acts.push_back(m.trans[s][j].first);
        if (acts.empty()) continue;
        auto& ec = by_scc[scc_of[s]];
        ec.states.push_back(s);
        ec.actions.push_back(std::move(acts));
    }
    std::vector<EndComponent> out;
    for (auto& [id, ec] : by_scc) out.push_back(std::move(ec));
    return out;
}

SuccessSetTable success_sets(const ProductMdp& p, int k) {
    const int n = p.mdp.num_states();
    SuccessSetTable table;
    table.k = k;
    table.in_u.assign(1 << k, std::vector<bool>(n, false));
    if (k == 0) return table;

    for (int mask = 1; mask < (1 << k); ++mask) {
        std::vector<int> members;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) members.push_back(i);
        // all pair selections (j_i) for i in I
        std::vector<int> pick(members.size(), 0);
        while (true) {
            std::vector<bool> allowed(n, true);
            for (size_t x = 0; x < members.size(); ++x) {
                const auto& pair = p.lifted[members[x]][pick[x]];
                for (int s = 0; s < n; ++s)
                    if (pair.in_b[s]) allowed[s] = false;
            }
            for (const auto& ec : maximal_end_components(p.mdp, allowed)) {
                bool good = true;
                for (size_t x = 0; x < members.size() && good; ++x) {
                    const auto& pair = p.lifted[members[x]][pick[x]];
                    bool hit = false;
                    for (int s : ec.states)
                        if (pair.in_g[s]) {
                            hit = true;
                            break;
                        }
                    good = hit;
                }
                if (good)
                    for (int s : ec.states) table.in_u[mask][s] = true;
            }
            size_t x = members.size();
            while (x > 0 &&
                   ++pick[x - 1] == static_cast<int>(p.lifted[members[x - 1]].size()))
                pick[--x] = 0;
            if (x == 0) break;
        }
    }
    return table;
}

OptimizationResult solve_optimal_value(
    const ProductMdp& p, const SuccessSetTable& u, const std::vector<double>& coeffs,
    double residual, long max_iterations,
    const std::function<void(const std::vector<double>&)>& observer) {
    const int n = p.mdp.num_states();
    const int k = u.k;

    // only the largest floor per state matters
    std::vector<double> floor_val(n, 0.0);
    for (int mask = 1; mask < (1 << k); ++mask) {
        double sum = 0.0;
        for (int i = 0; i < k; ++i)
            if (mask & (1 << i)) sum += coeffs[i];
        for (int s = 0; s < n; ++s)
            if (u.in_u[mask][s]) floor_val[s] = std::max(floor_val[s], sum);
    }

    OptimizationResult res;
    res.value.assign(n, 0.0);
    std::vector<double> next(n);
    for (long it = 0; it < max_iterations; ++it) {
        double delta = 0.0;
        for (int s = 0; s < n; ++s) {
            double best = floor_val[s];
            for (const auto& [a, dist] : p.mdp.trans[s]) {
                double v = 0.0;
                for (const auto& [t, pr] : dist) v += pr * res.value[t];
                best = std::max(best, v);
            }
            next[s] = best;
            delta = std::max(delta, std::abs(best - res.value[s]));
        }
        res.value.swap(next);
        res.iterations = it + 1;
        if (observer) observer(res.value);
        if (delta < residual) {
            // policy extraction for diagnostics
            res.policy.assign(n, -1);
            for (int s = 0; s < n; ++s) {
                double best = floor_val[s];
                int arg = -1;
                for (const auto& [a, dist] : p.mdp.trans[s]) {
                    double v = 0.0;
                    for (const auto& [t, pr] : dist) v += pr * res.value[t];
                    if (v > best + kProbTol) {
                        best = v;
                        arg = a;
                    }
                }
                res.policy[s] = arg;
            }
            res.c_star = 0.0;
            for (const auto& [s, pr] : p.mdp.init) res.c_star += pr * res.value[s];
            return res;
        }
    }
    throw NonConvergenceError("value iteration did not reach residual " +
                              std::to_string(residual) + " within " +
                              std::to_string(max_iterations) + " iterations");
}

std::vector<std::vector<int>> bottom_sccs(
    const std::vector<std::vector<std::pair<int, double>>>& rows) {
    std::vector<std::vector<int>> adj(rows.size());
    for (size_t s = 0; s < rows.size(); ++s)
        for (const auto& [t, p] : rows[s]) adj[s].push_back(t);
    auto sccs = tarjan_sccs(adj);
    std::vector<int> scc_of(rows.size());
    for (size_t i = 0; i < sccs.size(); ++i)
        for (int s : sccs[i]) scc_of[s] = static_cast<int>(i);
    std::vector<std::vector<int>> out;
    for (const auto& scc : sccs) {
        bool bottom = true;
        for (int s : scc) {
            for (const auto& [t, p] : rows[s])
                if (scc_of[t] != scc_of[s]) {
                    bottom = false;
                    break;
                }
            if (!bottom) break;
        }
        if (bottom) out.push_back(scc);
    }
    return out;
}

std::vector<double> reach_probability(const MarkovChain& c, const std::vector<bool>& target) {
    const int n = c.num_states();
    // states that can reach the target
    std::vector<std::vector<int>> radj(n);
    for (int s = 0; s < n; ++s)
        for (const auto& [t, p] : c.rows[s]) radj[t].push_back(s);
    std::vector<bool> can(n, false);
    std::deque<int> queue;
    for (int s = 0; s < n; ++s)
        if (target[s]) {
            can[s] = true;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        for (int t : radj[s])
            if (!can[t]) {
                can[t] = true;
                queue.push_back(t);
            }
    }

    std::vector<double> x(n, 0.0);
    std::vector<int> sys_index(n, -1);
    int unknowns = 0;
    for (int s = 0; s < n; ++s) {
        if (target[s]) x[s] = 1.0;
        else if (can[s]) sys_index[s] = unknowns++;
    }
    if (unknowns == 0) return x;

    // (I - Q) y = b over the transient unknowns
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(unknowns);
    for (int s = 0; s < n; ++s) {
        int row = sys_index[s];
        if (row < 0) continue;
        trip.emplace_back(row, row, 1.0);
        for (const auto& [t, p] : c.rows[s]) {
            if (target[t]) b[row] += p;
            else if (sys_index[t] >= 0) trip.emplace_back(row, sys_index[t], -p);
        }
    }
    Eigen::SparseMatrix<double> A(unknowns, unknowns);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
        throw PhlError("linear solve failed in reachability computation");
    Eigen::VectorXd y = solver.solve(b);
    for (int s = 0; s < n; ++s)
        if (sys_index[s] >= 0) x[s] = std::clamp(y[sys_index[s]], 0.0, 1.0);
    return x;
}

double chain_ltl_probability(const MarkovChain& c, const LtlPtr& f, const AutomataCaps& caps) {
    Dra dra = ltl_to_dra(f, caps);

    std::vector<uint32_t> letter(c.num_states());
    for (int s = 0; s < c.num_states(); ++s)
        letter[s] = letter_of_labels(dra.props, c.props, c.labels[s]);

    struct Key {
        int s, q;
        auto operator<=>(const Key&) const = default;
    };
    std::map<Key, int> index;
    std::vector<Key> states;
    std::deque<int> queue;
    auto intern = [&](Key k) {
        auto it = index.find(k);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        index[k] = id;
        states.push_back(k);
        queue.push_back(id);
        return id;
    };

    MarkovChain prod;
    prod.props = c.props;
    Distribution init;
    for (const auto& [s, p] : c.init)
        init.push_back({intern({s, dra.delta[dra.initial][letter[s]]}), p});
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        auto [s, q] = states[id];
        prod.rows.resize(states.size());
        std::vector<std::pair<int, double>> row;
        for (const auto& [t, p] : c.rows[s])
            row.push_back({intern({t, dra.delta[q][letter[t]]}), p});
        std::sort(row.begin(), row.end());
        prod.rows.resize(states.size());
        prod.rows[id] = std::move(row);
    }
    prod.rows.resize(states.size());
    prod.init = std::move(init);

    // accepting bottom SCCs per the Rabin condition
    std::vector<bool> target(prod.num_states(), false);
    for (const auto& scc : bottom_sccs(prod.rows)) {
        bool accepting = false;
        for (const auto& pair : dra.pairs) {
            bool hits_b = false, hits_g = false;
            for (int s : scc) {
                if (pair.in_b[states[s].q]) hits_b = true;
                if (pair.in_g[states[s].q]) hits_g = true;
            }
            if (!hits_b && hits_g) {
                accepting = true;
                break;
            }
        }
        if (accepting)
            for (int s : scc) target[s] = true;
    }

    auto x = reach_probability(prod, target);
    double result = 0.0;
    for (const auto& [s, p] : prod.init) result += p * x[s];
    return std::clamp(result, 0.0, 1.0);
}

bool check_hyper_body_on_tuple(const Mdp& m, const SchedulerTuple& tuple, const HyperBody& body,
                               const AutomataCaps& caps) {
    if (!body.all_universal())
        throw ConfigError("hyper bodies with existential path quantifiers are not supported");
    const int vars = static_cast<int>(body.prefix.size());
    if (vars == 0) return true;

    // one induced chain per distinct scheduler variable
    std::vector<MarkovChain> chains;
    std::vector<int> chain_of_member(tuple.size(), -1);
    std::vector<int> chain_of_var(vars);
    for (int j = 0; j < vars; ++j) {
        int member = body.prefix[j].sched_index;
        if (member < 0 || member >= tuple.size())
            throw ConfigError("path variable bound to a scheduler outside the tuple");
        if (chain_of_member[member] < 0) {
            chain_of_member[member] = static_cast<int>(chains.size());
            chains.push_back(induced_chain(m, tuple.members[member]));
        }
        chain_of_var[j] = chain_of_member[member];
    }

    Nba nba = ltl_to_nba(ltl_not(body.matrix), caps);

    // per path variable and chain state: bits of the NBA props owned by it
    std::vector<std::vector<uint32_t>> bits(vars);
    for (int j = 0; j < vars; ++j) {
        const auto& chain = chains[chain_of_var[j]];
        bits[j].assign(chain.num_states(), 0);
        for (size_t i = 0; i < nba.props.size(); ++i) {
            if (nba.props[i].copy != j) continue;
            int pid = chain.prop_id(nba.props[i].base, 0);
            if (pid < 0) continue;
            for (int s = 0; s < chain.num_states(); ++s)
                if (chain.has_prop(s, pid)) bits[j][s] |= 1u << i;
        }
    }

    std::map<std::vector<int>, int> index;  // (x_0..x_{vars-1}, q) -> id
    std::vector<std::vector<int>> nodes;
    std::deque<int> queue;
    std::vector<bool> accepting_node;
    auto intern = [&](std::vector<int> key) {
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(nodes.size());
        if (id > 5'000'000) throw SizeCapError("hyper body product exceeds the node cap");
        index[key] = id;
        accepting_node.push_back(nba.accepting[key[vars]]);
        nodes.push_back(std::move(key));
        queue.push_back(id);
        return id;
    };

    // tuples of paths start synchronously in the same underlying state
    for (const auto& [s0, p] : m.init) {
        if (p <= 0) continue;
        std::vector<int> key(vars + 1);
        bool ok = true;
        for (int j = 0; j < vars && ok; ++j) {
            const auto& chain = chains[chain_of_var[j]];
            int q0 = tuple.members[body.prefix[j].sched_index].init_memory;
            int found = -1;
            for (const auto& [cs, cp] : chain.init)
                if (chain.origin[cs] == std::make_pair(s0, q0)) {
                    found = cs;
                    break;
                }
            if (found < 0) ok = false;
            key[j] = found;
        }
        if (!ok) continue;
        for (int q : nba.initial) {
            key[vars] = q;
            intern(key);
        }
    }

    std::vector<std::vector<int>> adj;
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        auto key = nodes[id];
        uint32_t letter = 0;
        for (int j = 0; j < vars; ++j) letter |= bits[j][key[j]];
        auto nba_succ = nba.successors(key[vars], letter);
        // product over component chain successors
        std::vector<std::vector<int>> succ_sets(vars);
        for (int j = 0; j < vars; ++j)
            for (const auto& [t, p] : chains[chain_of_var[j]].rows[key[j]])
                succ_sets[j].push_back(t);
        std::vector<int> out;
        std::vector<int> pick(vars, 0);
        if (!nba_succ.empty()) {
            while (true) {
                std::vector<int> tkey(vars + 1);
                for (int j = 0; j < vars; ++j) tkey[j] = succ_sets[j][pick[j]];
                for (int q2 : nba_succ) {
                    tkey[vars] = q2;
                    out.push_back(intern(tkey));
                }
                int j = vars - 1;
                while (j >= 0 && ++pick[j] == static_cast<int>(succ_sets[j].size())) pick[j--] = 0;
                if (j < 0) break;
            }
        }
        adj.resize(nodes.size());
        adj[id] = std::move(out);
    }
    adj.resize(nodes.size());

    // violating path tuple exists iff some reachable SCC is accepting and
    // nontrivial (or carries a self loop)
    auto sccs = tarjan_sccs(adj);
    std::vector<int> scc_of(nodes.size());
    for (size_t i = 0; i < sccs.size(); ++i)
        for (int s : sccs[i]) scc_of[s] = static_cast<int>(i);
    for (const auto& scc : sccs) {
        bool has_acc = false;
        for (int s : scc)
            if (accepting_node[s]) {
                has_acc = true;
                break;
            }
        if (!has_acc) continue;
        bool nontrivial = scc.size() > 1;
        if (!nontrivial) {
            int s = scc[0];
            for (int t : adj[s])
                if (t == s) {
                    nontrivial = true;
                    break;
                }
        }
        if (nontrivial) return false;
    }
    return true;
}

PredicateValue evaluate_predicate(const MarkovChain& joint, const ProbPredicate& pred,
                                  const AutomataCaps& caps) {
    if (pred.cmp != Cmp::Le && pred.cmp != Cmp::Lt)
        throw ConfigError("evaluate_predicate expects a normalized predicate");
    PredicateValue out;
    for (const auto& term : pred.terms)
        out.value += to_double(term.coeff) * chain_ltl_probability(joint, term.operand, caps);
    double bound = to_double(pred.bound);
    out.knife_edge = std::abs(out.value - bound) <= kProbTol;
    out.satisfied = pred.cmp == Cmp::Le ? out.value <= bound + kProbTol
                                        : out.value < bound - kProbTol;
    return out;
}

} // namespace phl
