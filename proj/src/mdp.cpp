#include "mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace phl {

std::string to_string(const IndexedProp& p) {
    if (p.copy == 0) return p.base;
    return p.base + "@" + std::to_string(p.copy + 1);
}

const Distribution* Mdp::dist(StateId s, ActionId a) const {
    for (const auto& [act, d] : trans[s])
        if (act == a) return &d;
    return nullptr;
}

std::vector<ActionId> Mdp::enabled(StateId s) const {
    std::vector<ActionId> out;
    out.reserve(trans[s].size());
    for (const auto& [a, d] : trans[s]) out.push_back(a);
    return out;
}

bool Mdp::has_prop(StateId s, PropId p) const {
    const auto& l = labels[s];
    return std::binary_search(l.begin(), l.end(), p);
}

int Mdp::prop_id(const std::string& base, int copy) const {
    for (size_t i = 0; i < props.size(); ++i)
        if (props[i].base == base && props[i].copy == copy) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> validate_mdp(const Mdp& m) {
    std::vector<std::string> violations;
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (m.trans[s].empty())
            violations.push_back("state " + m.state_names[s] + " has no enabled action");
        for (const auto& [a, d] : m.trans[s]) {
            double sum = 0.0;
            for (const auto& [t, p] : d) {
                sum += p;
                if (p < 0.0 || p > 1.0 + kProbTol)
                    violations.push_back("probability out of [0,1] in row (" + m.state_names[s] +
                                         "," + m.action_names[a] + ")");
                if (t < 0 || t >= m.num_states())
                    violations.push_back("dangling target in row (" + m.state_names[s] + "," +
                                         m.action_names[a] + ")");
            }
            if (std::abs(sum - 1.0) > kProbTol) {
                char buf[64];
                snprintf(buf, sizeof buf, "%.10g", sum);
                violations.push_back("row (" + m.state_names[s] + "," + m.action_names[a] +
                                     ") sums to " + buf);
            }
        }
    }
    double isum = 0.0;
    for (const auto& [s, p] : m.init) isum += p;
    if (std::abs(isum - 1.0) > kProbTol) {
        char buf[64];
        snprintf(buf, sizeof buf, "%.10g", isum);
        violations.push_back(std::string("initial distribution sums to ") + buf);
    }
    return violations;
}

int FiniteMemoryScheduler::num_actions() const {
    if (act.empty() || act[0].empty()) return 0;
    return update.empty() || update[0].empty() || update[0][0].empty()
               ? 0
               : static_cast<int>(update[0][0].size());
}

bool FiniteMemoryScheduler::deterministic() const {
    for (const auto& per_q : act)
        for (const auto& d : per_q)
            if (d.size() > 1) return false;
    return true;
}

FiniteMemoryScheduler memoryless_scheduler(const Mdp& m, const std::vector<ActionId>& choice) {
    FiniteMemoryScheduler s;
    s.memory_size = 1;
    s.init_memory = 0;
    s.act.assign(1, std::vector<std::vector<std::pair<ActionId, double>>>(m.num_states()));
    s.update.assign(1, std::vector<std::vector<int>>(
                           m.num_states(), std::vector<int>(m.num_actions(), 0)));
    for (StateId st = 0; st < m.num_states(); ++st)
        s.act[0][st] = {{choice[st], 1.0}};
    return s;
}

std::vector<int> tuple_unrank(long long id, int base, int n) {
    std::vector<int> xs(n);
    for (int i = n - 1; i >= 0; --i) {
        xs[i] = static_cast<int>(id % base);
        id /= base;
    }
    return xs;
}

MarkovChain induced_chain(const Mdp& m, const FiniteMemoryScheduler& sched) {
    MarkovChain c;
    c.props = m.props;

    std::map<std::pair<int, int>, int> index;  // (s,q) -> chain state
    std::deque<std::pair<int, int>> queue;
    auto intern = [&](int s, int q) {
        auto it = index.find({s, q});
        if (it != index.end()) return it->second;
        int id = static_cast<int>(c.origin.size());
        index[{s, q}] = id;
        c.origin.push_back({s, q});
        c.labels.push_back(m.labels[s]);
        c.rows.emplace_back();
        queue.push_back({s, q});
        return id;
    };

    for (const auto& [s, p] : m.init) {
        int id = intern(s, sched.init_memory);
        c.init.push_back({id, p});
    }

    while (!queue.empty()) {
        auto [s, q] = queue.front();
        queue.pop_front();
        int id = index[{s, q}];
        const auto& choice = sched.act[q][s];
        std::map<std::pair<int, int>, double> succ;  // (s',q') -> prob
        for (const auto& [a, pa] : choice) {
            const Distribution* d = m.dist(s, a);
            if (!d)
                throw SchedulerActionDisabledError("scheduler selects disabled action " +
                                                   m.action_names[a] + " in state " +
                                                   m.state_names[s]);
            int q2 = sched.update[q][s][a];
            for (const auto& [t, pt] : *d) succ[{t, q2}] += pa * pt;
        }
        for (const auto& [key, p] : succ) {
            int tid = intern(key.first, key.second);
            c.rows[id].push_back({tid, p});
        }
        std::sort(c.rows[id].begin(), c.rows[id].end());
    }
    return c;
}

MarkovChain composed_induced_chain(const Mdp& m, const SchedulerTuple& tuple) {
    const int n = tuple.size();
    const int ns = m.num_states();
    const int nq = [&] {
        int r = 1;
        for (const auto& s : tuple.members) r *= s.memory_size;
        return r;
    }();
    (void)nq;

    MarkovChain c;
    c.props.reserve(m.props.size() * n);
    for (int i = 0; i < n; ++i)
        for (const auto& p : m.props) c.props.push_back({p.base, i});

    // chain state = (joint model state, joint memory), both mixed radix
    std::map<std::pair<long long, long long>, int> index;
    std::deque<std::pair<std::vector<int>, std::vector<int>>> queue;

    auto flat_label = [&](const std::vector<int>& ss) {
        std::vector<PropId> l;
        for (int i = 0; i < n; ++i)
            for (PropId p : m.labels[ss[i]])
                l.push_back(i * static_cast<int>(m.props.size()) + p);
        std::sort(l.begin(), l.end());
        return l;
    };

    auto intern = [&](const std::vector<int>& ss, const std::vector<int>& qs) {
        long long sid = tuple_rank(ss, ns);
        long long qid = 0;
        for (int i = 0; i < n; ++i) qid = qid * tuple.members[i].memory_size + qs[i];
        auto it = index.find({sid, qid});
        if (it != index.end()) return it->second;
        int id = static_cast<int>(c.origin.size());
        index[{sid, qid}] = id;
        c.origin.push_back({static_cast<int>(sid), static_cast<int>(qid)});
        c.labels.push_back(flat_label(ss));
        c.rows.emplace_back();
        queue.push_back({ss, qs});
        return id;
    };

    // diagonal initial distribution of the self-composition
    for (const auto& [s, p] : m.init) {
        std::vector<int> ss(n, s), qs(n);
        for (int i = 0; i < n; ++i) qs[i] = tuple.members[i].init_memory;
        c.init.push_back({intern(ss, qs), p});
    }

    std::vector<std::pair<StateId, double>> comp[2];
    (void)comp;
    while (!queue.empty()) {
        auto [ss, qs] = queue.front();
        queue.pop_front();
        long long sid = tuple_rank(ss, ns);
        long long qid = 0;
        for (int i = 0; i < n; ++i) qid = qid * tuple.members[i].memory_size + qs[i];
        int id = index[{sid, qid}];

        // successors per component, then the product of distributions
        std::map<std::pair<long long, long long>, double> succ;
        struct Branch {
            std::vector<int> ss, qs;
            double p;
        };
        std::vector<Branch> partial{{{}, {}, 1.0}};
        bool dead = false;
        for (int i = 0; i < n && !dead; ++i) {
            const auto& sched = tuple.members[i];
            const auto& choice = sched.act[qs[i]][ss[i]];
            std::vector<Branch> next;
            for (const auto& br : partial) {
                for (const auto& [a, pa] : choice) {
                    const Distribution* d = m.dist(ss[i], a);
                    if (!d)
                        throw SchedulerActionDisabledError(
                            "member " + std::to_string(i + 1) + " selects disabled action " +
                            m.action_names[a] + " in state " + m.state_names[ss[i]]);
                    int q2 = sched.update[qs[i]][ss[i]][a];
                    for (const auto& [t, pt] : *d) {
                        Branch b = br;
                        b.ss.push_back(t);
                        b.qs.push_back(q2);
                        b.p *= pa * pt;
                        next.push_back(std::move(b));
                    }
                }
            }
            partial = std::move(next);
        }
        for (auto& br : partial) {
            long long tsid = tuple_rank(br.ss, ns);
            long long tqid = 0;
            for (int i = 0; i < n; ++i) tqid = tqid * tuple.members[i].memory_size + br.qs[i];
            succ[{tsid, tqid}] += br.p;
        }
        for (const auto& [key, p] : succ) {
            auto ss2 = tuple_unrank(key.first, ns, n);
            std::vector<int> qs2(n);
            long long q = key.second;
            for (int i = n - 1; i >= 0; --i) {
                qs2[i] = static_cast<int>(q % tuple.members[i].memory_size);
                q /= tuple.members[i].memory_size;
            }
            int tid = intern(ss2, qs2);  // may reallocate c.rows
            c.rows[id].push_back({tid, p});
        }
        std::sort(c.rows[id].begin(), c.rows[id].end());
    }
    return c;
}

FiniteMemoryScheduler compose_schedulers(const SchedulerTuple& tuple) {
    const int n = tuple.size();
    if (n == 0) throw ConfigError("empty scheduler tuple");
    const int ns = static_cast<int>(tuple.members[0].act[0].size());
    const int na = static_cast<int>(tuple.members[0].update[0][0].size());

    long long mem = 1, states = 1, actions = 1;
    for (const auto& s : tuple.members) mem *= s.memory_size;
    for (int i = 0; i < n; ++i) {
        states *= ns;
        actions *= na;
    }
    if (mem * states > 20'000'000)
        throw SizeCapError("composed scheduler table would exceed the size cap");

    FiniteMemoryScheduler out;
    out.memory_size = static_cast<int>(mem);
    {
        std::vector<int> q0s(n);
        for (int i = 0; i < n; ++i) q0s[i] = tuple.members[i].init_memory;
        long long q0 = 0;
        for (int i = 0; i < n; ++i) q0 = q0 * tuple.members[i].memory_size + q0s[i];
        out.init_memory = static_cast<int>(q0);
    }
    out.act.assign(mem, std::vector<std::vector<std::pair<ActionId, double>>>(states));
    out.update.assign(mem, std::vector<std::vector<int>>(states, std::vector<int>(actions, 0)));

    for (long long q = 0; q < mem; ++q) {
        std::vector<int> qs(n);
        long long tmp = q;
        for (int i = n - 1; i >= 0; --i) {
            qs[i] = static_cast<int>(tmp % tuple.members[i].memory_size);
            tmp /= tuple.members[i].memory_size;
        }
        for (long long s = 0; s < states; ++s) {
            auto ss = tuple_unrank(s, ns, n);
            // act: product distribution over joint actions
            std::vector<std::pair<long long, double>> joint{{0, 1.0}};
            for (int i = 0; i < n; ++i) {
                std::vector<std::pair<long long, double>> next;
                for (const auto& [ja, jp] : joint)
                    for (const auto& [a, pa] : tuple.members[i].act[qs[i]][ss[i]])
                        next.push_back({ja * na + a, jp * pa});
                joint = std::move(next);
            }
            auto& cell = out.act[q][s];
            for (const auto& [ja, jp] : joint) cell.push_back({static_cast<ActionId>(ja), jp});
            std::sort(cell.begin(), cell.end());
            // update: componentwise
            for (long long a = 0; a < actions; ++a) {
                auto as = tuple_unrank(a, na, n);
                long long q2 = 0;
                for (int i = 0; i < n; ++i)
                    q2 = q2 * tuple.members[i].memory_size +
                         tuple.members[i].update[qs[i]][ss[i]][as[i]];
                out.update[q][s][a] = static_cast<int>(q2);
            }
        }
    }
    return out;
}

int MarkovChain::prop_id(const std::string& base, int copy) const {
    for (size_t i = 0; i < props.size(); ++i)
        if (props[i].base == base && props[i].copy == copy) return static_cast<int>(i);
    return -1;
}

bool MarkovChain::has_prop(StateId s, PropId p) const {
    const auto& l = labels[s];
    return std::binary_search(l.begin(), l.end(), p);
}

} // namespace phl
