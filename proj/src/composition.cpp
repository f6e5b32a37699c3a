#include "composition.hpp"

#include <algorithm>
#include <deque>
#include <map>

namespace phl {

namespace {

std::string tuple_name(const std::vector<std::string>& names, const std::vector<int>& xs) {
    std::string out = "(";
    for (size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        out += names[xs[i]];
    }
    return out + ")";
}

} // namespace

SelfCompositionMdp self_compose(const Mdp& m, int n, const CompositionCaps& caps) {
    if (n < 1) throw ConfigError("self-composition requires n >= 1");
    long long total = 1;
    for (int i = 0; i < n; ++i) {
        total *= m.num_states();
        if (total > caps.self_comp_cap)
            throw SizeCapError("self-composition would have " + std::to_string(m.num_states()) +
                               "^" + std::to_string(n) + " states, over the cap of " +
                               std::to_string(caps.self_comp_cap));
    }

    SelfCompositionMdp out;
    out.copies = n;
    out.base_states = m.num_states();
    out.base_actions = m.num_actions();
    Mdp& c = out.mdp;

    for (int copy = 0; copy < n; ++copy)
        for (const auto& p : m.props) c.props.push_back({p.base, copy});

    long long num_actions = 1;
    for (int i = 0; i < n; ++i) num_actions *= m.num_actions();

    c.state_names.reserve(total);
    for (long long s = 0; s < total; ++s) {
        auto ss = tuple_unrank(s, m.num_states(), n);
        c.state_names.push_back(tuple_name(m.state_names, ss));
        std::vector<PropId> label;
        for (int i = 0; i < n; ++i)
            for (PropId p : m.labels[ss[i]])
                label.push_back(i * static_cast<int>(m.props.size()) + p);
        std::sort(label.begin(), label.end());
        c.labels.push_back(std::move(label));
    }
    for (long long a = 0; a < num_actions; ++a)
        c.action_names.push_back(tuple_name(m.action_names, tuple_unrank(a, m.num_actions(), n)));

    c.trans.resize(total);
    for (long long s = 0; s < total; ++s) {
        auto ss = tuple_unrank(s, m.num_states(), n);
        // enabled joint actions: the product of the components' enabled sets
        std::vector<std::vector<ActionId>> en(n);
        for (int i = 0; i < n; ++i) en[i] = m.enabled(ss[i]);
        std::vector<int> pick(n, 0);
        while (true) {
            long long joint = 0;
            for (int i = 0; i < n; ++i) joint = joint * m.num_actions() + en[i][pick[i]];
            // product distribution
            std::vector<std::pair<long long, double>> dist{{0, 1.0}};
            for (int i = 0; i < n; ++i) {
                const Distribution* di = m.dist(ss[i], en[i][pick[i]]);
                std::vector<std::pair<long long, double>> next;
                next.reserve(dist.size() * di->size());
                for (const auto& [acc, p] : dist)
                    for (const auto& [t, pt] : *di)
                        next.push_back({acc * m.num_states() + t, p * pt});
                dist = std::move(next);
            }
            Distribution d;
            d.reserve(dist.size());
            for (const auto& [t, p] : dist) d.push_back({static_cast<StateId>(t), p});
            std::sort(d.begin(), d.end());
            // identical successor tuples cannot repeat: the product expansion
            // enumerates distinct tuples
            c.trans[s].push_back({static_cast<ActionId>(joint), std::move(d)});

            int i = n - 1;
            while (i >= 0 && ++pick[i] == static_cast<int>(en[i].size())) pick[i--] = 0;
            if (i < 0) break;
        }
        std::sort(c.trans[s].begin(), c.trans[s].end());
    }

    // diagonal initial distribution
    for (const auto& [s, p] : m.init) {
        long long diag = 0;
        for (int i = 0; i < n; ++i) diag = diag * m.num_states() + s;
        c.init.push_back({static_cast<StateId>(diag), p});
    }
    std::sort(c.init.begin(), c.init.end());
    return out;
}

ProductMdp product_with_safety(const SelfCompositionMdp& mc, const SafetyDfa& d,
                               const CompositionCaps& caps) {
    const Mdp& m = mc.mdp;
    auto letter_of = [&](StateId s) {
        return letter_of_labels(d.props, m.props, m.labels[s]);
    };

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
        if (id >= caps.product_cap) throw SizeCapError("safety product exceeds the state cap");
        index[k] = id;
        states.push_back(k);
        queue.push_back(id);
        return id;
    };

    double initial_mass = 0.0;
    std::vector<std::pair<int, double>> inits;
    for (const auto& [s, p] : m.init) {
        int q = d.delta[d.initial][letter_of(s)];
        if (q < 0) continue;  // chi-violating from the first letter
        inits.push_back({intern({s, q}), p});
        initial_mass += p;
    }
    if (inits.empty())
        throw EmptyProductError("every initial state violates the hyper body");

    // forward exploration; an action survives only if the automaton step is
    // defined for all successors
    std::vector<std::vector<std::pair<ActionId, std::vector<std::pair<int, double>>>>> rows;
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        auto [s, q] = states[id];
        rows.resize(states.size());
        std::vector<std::pair<ActionId, std::vector<std::pair<int, double>>>> out_row;
        for (const auto& [a, dist] : m.trans[s]) {
            std::vector<std::pair<int, double>> succ;
            bool ok = true;
            for (const auto& [t, p] : dist) {
                int q2 = d.delta[q][letter_of(t)];
                if (q2 < 0) {
                    ok = false;
                    break;
                }
                succ.push_back({intern({t, q2}), p});
            }
            if (ok) out_row.push_back({a, std::move(succ)});
        }
        rows.resize(states.size());
        rows[id] = std::move(out_row);
    }
    rows.resize(states.size());

    // iterative elimination: drop states without actions, then actions whose
    // successors were dropped, to a fixpoint; finally re-trim reachability
    const int sn = static_cast<int>(states.size());
    std::vector<bool> alive(sn, true);
    std::vector<std::vector<bool>> action_ok(sn);
    for (int i = 0; i < sn; ++i) action_ok[i].assign(rows[i].size(), true);
    bool changed = true;
    while (changed) {
        changed = false;
        for (int i = 0; i < sn; ++i) {
            if (!alive[i]) continue;
            bool any = false;
            for (size_t j = 0; j < rows[i].size(); ++j) {
                if (!action_ok[i][j]) continue;
                bool ok = true;
                for (const auto& [t, p] : rows[i][j].second)
                    if (!alive[t]) {
                        ok = false;
                        break;
                    }
                if (!ok) {
                    action_ok[i][j] = false;
                    changed = true;
                } else {
                    any = true;
                }
            }
            if (!any) {
                alive[i] = false;
                changed = true;
            }
        }
    }

    // reachability over surviving structure
    std::vector<bool> reach(sn, false);
    std::deque<int> bfs;
    double surviving_mass = 0.0;
    for (const auto& [i, p] : inits)
        if (alive[i]) {
            surviving_mass += p;
            if (!reach[i]) {
                reach[i] = true;
                bfs.push_back(i);
            }
        }
    if (surviving_mass <= 0.0)
        throw EmptyProductError("iterative elimination removed every initial state");
    while (!bfs.empty()) {
        int i = bfs.front();
        bfs.pop_front();
        for (size_t j = 0; j < rows[i].size(); ++j) {
            if (!action_ok[i][j]) continue;
            for (const auto& [t, p] : rows[i][j].second)
                if (!reach[t]) {
                    reach[t] = true;
                    bfs.push_back(t);
                }
        }
    }

    ProductMdp out;
    out.initial_mass = surviving_mass;
    std::vector<int> remap(sn, -1);
    for (int i = 0; i < sn; ++i) {
        if (!reach[i]) continue;
        remap[i] = static_cast<int>(out.comp_state.size());
        out.comp_state.push_back(states[i].s);
        out.dfa_state.push_back(states[i].q);
    }
    Mdp& pm = out.mdp;
    pm.props = m.props;
    pm.action_names = m.action_names;
    for (int i = 0; i < sn; ++i) {
        if (remap[i] < 0) continue;
        pm.state_names.push_back("(" + m.state_names[states[i].s] + ",q" +
                                 std::to_string(states[i].q) + ")");
        pm.labels.push_back(m.labels[states[i].s]);
        std::vector<std::pair<ActionId, Distribution>> row;
        for (size_t j = 0; j < rows[i].size(); ++j) {
            if (!action_ok[i][j]) continue;
            Distribution dd;
            for (const auto& [t, p] : rows[i][j].second) dd.push_back({remap[t], p});
            std::sort(dd.begin(), dd.end());
            row.push_back({rows[i][j].first, std::move(dd)});
        }
        pm.trans.push_back(std::move(row));
    }
    for (const auto& [i, p] : inits)
        if (remap[i] >= 0) pm.init.push_back({remap[i], p});
    std::sort(pm.init.begin(), pm.init.end());
    return out;
}

ProductMdp product_with_rabin(const ProductMdp& p, const std::vector<Dra>& automata,
                              const CompositionCaps& caps) {
    const int k = static_cast<int>(automata.size());
    if (k == 0) return p;
    const Mdp& m = p.mdp;

    std::vector<std::vector<uint32_t>> letters(k, std::vector<uint32_t>(m.num_states()));
    for (int i = 0; i < k; ++i)
        for (int s = 0; s < m.num_states(); ++s)
            letters[i][s] = letter_of_labels(automata[i].props, m.props, m.labels[s]);

    std::map<std::vector<int>, int> index;  // (s, q1..qk) -> id
    std::vector<std::vector<int>> states;
    std::deque<int> queue;
    auto intern = [&](std::vector<int> key) {
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(states.size());
        if (id >= caps.product_cap) throw SizeCapError("Rabin product exceeds the state cap");
        index[key] = id;
        states.push_back(std::move(key));
        queue.push_back(id);
        return id;
    };

    ProductMdp out;
    out.initial_mass = p.initial_mass;
    Mdp& pm = out.mdp;
    pm.props = m.props;
    pm.action_names = m.action_names;

    for (const auto& [s, pr] : m.init) {
        std::vector<int> key(k + 1);
        key[0] = s;
        for (int i = 0; i < k; ++i)
            key[i + 1] = automata[i].delta[automata[i].initial][letters[i][s]];
        pm.init.push_back({intern(key), pr});
    }

    std::vector<std::vector<std::pair<ActionId, Distribution>>> rows;
    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        auto key = states[id];
        int s = key[0];
        std::vector<std::pair<ActionId, Distribution>> row;
        for (const auto& [a, dist] : m.trans[s]) {
            Distribution dd;
            for (const auto& [t, pr] : dist) {
                std::vector<int> tkey(k + 1);
                tkey[0] = t;
                for (int i = 0; i < k; ++i)
                    tkey[i + 1] = automata[i].delta[key[i + 1]][letters[i][t]];
                dd.push_back({intern(std::move(tkey)), pr});
            }
            std::sort(dd.begin(), dd.end());
            row.push_back({a, std::move(dd)});
        }
        rows.resize(states.size());
        rows[id] = std::move(row);
    }
    rows.resize(states.size());

    const int sn = static_cast<int>(states.size());
    for (int i = 0; i < sn; ++i) {
        int s = states[i][0];
        std::string name = "(" + m.state_names[s];
        for (int j = 0; j < k; ++j) name += "," + std::to_string(states[i][j + 1]);
        name += ")";
        pm.state_names.push_back(name);
        pm.labels.push_back(m.labels[s]);
        pm.trans.push_back(std::move(rows[i]));
        out.comp_state.push_back(p.comp_state[s]);
        out.dfa_state.push_back(p.dfa_state[s]);
    }
    std::sort(pm.init.begin(), pm.init.end());

    out.aut_state.assign(k, std::vector<int>(sn));
    out.lifted.resize(k);
    for (int i = 0; i < k; ++i) {
        for (int st = 0; st < sn; ++st) out.aut_state[i][st] = states[st][i + 1];
        for (const auto& pair : automata[i].pairs) {
            RabinPair lifted;
            lifted.in_b.resize(sn);
            lifted.in_g.resize(sn);
            for (int st = 0; st < sn; ++st) {
                lifted.in_b[st] = pair.in_b[states[st][i + 1]];
                lifted.in_g[st] = pair.in_g[states[st][i + 1]];
            }
            out.lifted[i].push_back(std::move(lifted));
        }
    }
    return out;
}

} // namespace phl
