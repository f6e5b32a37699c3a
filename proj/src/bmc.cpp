#include "bmc.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <map>
#include <set>

namespace phl {

// ---------------------------------------------------------------------------
// canonical scheduler enumeration
//
// A canonical scheduler is a partial assignment of (action, memory target)
// to the (memory, state) pairs reachable under its own choices, with fresh
// memory states numbered in discovery order. The enumeration is a DFS over
// those assignments: within one pair, actions ascend first, then memory
// targets (existing states before one fresh state).

struct SchedulerEnumerator::Impl {
    const Mdp& m;
    int bound;

    struct Pair {
        int q, s;
        auto operator<=>(const Pair&) const = default;
    };
    struct Choice {
        int pair_idx;
        int act_pos, mem_pos;
        size_t discovered_before;
        int used_before;
    };

    // per-layer DFS state; layer = exact number of memory states
    int layer = 1;
    bool layer_started = false;
    std::vector<Pair> discovered;
    std::map<Pair, int> discovered_idx;
    std::vector<std::pair<int, int>> assignment;  // per discovered idx: (action, mem target), -1 unassigned
    std::vector<Choice> stack;
    int used = 1;
    bool exhausted = false;

    std::vector<FiniteMemoryScheduler> cache;

    explicit Impl(const Mdp& m_, int bound_) : m(m_), bound(bound_) {}

    void reset_layer() {
        discovered.clear();
        discovered_idx.clear();
        assignment.clear();
        stack.clear();
        used = 1;
        for (const auto& [s, p] : m.init) discover({0, s});
        layer_started = true;
    }

    void discover(Pair p) {
        if (discovered_idx.count(p)) return;
        discovered_idx[p] = static_cast<int>(discovered.size());
        discovered.push_back(p);
        assignment.push_back({-1, -1});
    }

    int first_unassigned() const {
        for (size_t i = 0; i < discovered.size(); ++i)
            if (assignment[i].first < 0) return static_cast<int>(i);
        return -1;
    }

    int mem_options(int used_before) const {
        return used_before < layer ? used_before + 1 : used_before;
    }

    void apply(const Choice& c) {
        const auto& [q, s] = discovered[c.pair_idx];
        (void)q;
        ActionId a = m.trans[s][c.act_pos].first;
        int target = c.mem_pos;
        assignment[c.pair_idx] = {a, target};
        if (target == c.used_before) used = c.used_before + 1;
        for (const auto& [t, p] : m.trans[s][c.act_pos].second) discover({target, t});
    }

    void undo(const Choice& c) {
        for (size_t i = c.discovered_before; i < discovered.size(); ++i)
            discovered_idx.erase(discovered[i]);
        discovered.resize(c.discovered_before);
        assignment.resize(c.discovered_before);
        if (c.pair_idx < static_cast<int>(assignment.size()))
            assignment[c.pair_idx] = {-1, -1};
        used = c.used_before;
    }

    bool descend() {
        while (true) {
            int idx = first_unassigned();
            if (idx < 0) return true;
            Choice c{idx, 0, 0, discovered.size(), used};
            apply(c);
            stack.push_back(c);
        }
    }

    // advance the deepest choice; true when a fresh complete assignment is reached
    bool backtrack_and_descend() {
        while (!stack.empty()) {
            Choice c = stack.back();
            stack.pop_back();
            undo(c);
            const auto& [q, s] = discovered[c.pair_idx];
            (void)q;
            int acts = static_cast<int>(m.trans[s].size());
            if (++c.mem_pos >= mem_options(c.used_before)) {
                c.mem_pos = 0;
                ++c.act_pos;
            }
            if (c.act_pos >= acts) continue;
            c.discovered_before = discovered.size();
            apply(c);
            stack.push_back(c);
            if (descend()) return true;
        }
        return false;
    }

    FiniteMemoryScheduler build() const {
        FiniteMemoryScheduler s;
        s.memory_size = used;
        s.init_memory = 0;
        s.act.assign(used, std::vector<std::vector<std::pair<ActionId, double>>>(m.num_states()));
        s.update.assign(used, std::vector<std::vector<int>>(
                                  m.num_states(), std::vector<int>(m.num_actions())));
        for (int q = 0; q < used; ++q)
            for (int st = 0; st < m.num_states(); ++st) {
                // canonical completion of the unreachable part
                ActionId a0 = m.trans[st].empty() ? 0 : m.trans[st][0].first;
                s.act[q][st] = {{a0, 1.0}};
                for (int a = 0; a < m.num_actions(); ++a) s.update[q][st][a] = q;
            }
        for (size_t i = 0; i < discovered.size(); ++i) {
            auto [a, target] = assignment[i];
            if (a < 0) continue;
            auto [q, st] = discovered[i];
            s.act[q][st] = {{a, 1.0}};
            s.update[q][st][a] = target;
        }
        return s;
    }

    bool produce_one() {
        while (!exhausted) {
            bool found;
            if (!layer_started) {
                reset_layer();
                found = descend();
            } else {
                found = backtrack_and_descend();
            }
            while (found) {
                if (used == layer) {
                    FiniteMemoryScheduler s = build();
                    if (scheduler_minimal(s)) {
                        cache.push_back(std::move(s));
                        return true;
                    }
                }
                found = backtrack_and_descend();
            }
            layer_started = false;
            if (++layer > bound) exhausted = true;
        }
        return false;
    }
};

SchedulerEnumerator::SchedulerEnumerator(const Mdp& m, int bound)
    : impl_(std::make_unique<Impl>(m, bound)) {
    if (bound < 1) throw ConfigError("scheduler memory bound must be at least 1");
}

SchedulerEnumerator::~SchedulerEnumerator() = default;

const FiniteMemoryScheduler* SchedulerEnumerator::get(size_t i) {
    while (impl_->cache.size() <= i) {
        if (!impl_->produce_one()) return nullptr;
    }
    return &impl_->cache[i];
}

namespace {

// Moore-style partition refinement over the completed tables
std::vector<int> memory_classes(const FiniteMemoryScheduler& s) {
    const int nq = s.memory_size;
    const int ns = s.num_states();
    auto act_signature = [&](int q) {
        std::string sig;
        for (int st = 0; st < ns; ++st) {
            for (const auto& [a, p] : s.act[q][st])
                sig += std::to_string(a) + ":" + std::to_string(p) + ",";
            sig += ";";
        }
        return sig;
    };
    std::vector<int> cls(nq);
    {
        std::map<std::string, int> by_sig;
        for (int q = 0; q < nq; ++q) {
            std::string sig = act_signature(q);
            auto it = by_sig.find(sig);
            if (it == by_sig.end()) it = by_sig.emplace(sig, static_cast<int>(by_sig.size())).first;
            cls[q] = it->second;
        }
    }
    while (true) {
        std::map<std::vector<int>, int> by_sig;
        std::vector<int> next(nq);
        for (int q = 0; q < nq; ++q) {
            std::vector<int> sig{cls[q]};
            for (int st = 0; st < ns; ++st)
                for (int a = 0; a < s.num_actions(); ++a) sig.push_back(cls[s.update[q][st][a]]);
            auto it = by_sig.find(sig);
            if (it == by_sig.end()) it = by_sig.emplace(sig, static_cast<int>(by_sig.size())).first;
            next[q] = it->second;
        }
        if (next == cls) break;
        cls = std::move(next);
    }
    return cls;
}

} // namespace

bool scheduler_minimal(const FiniteMemoryScheduler& s) {
    auto cls = memory_classes(s);
    std::set<int> distinct(cls.begin(), cls.end());
    return static_cast<int>(distinct.size()) == s.memory_size;
}

FiniteMemoryScheduler canonicalize_scheduler(const FiniteMemoryScheduler& input, const Mdp& m) {
    FiniteMemoryScheduler cur = input;
    for (int round = 0; round < cur.memory_size + 2; ++round) {
        // reachable part with discovery-order memory relabeling
        std::map<int, int> relabel;
        std::vector<int> order;
        auto name_of = [&](int q) {
            auto it = relabel.find(q);
            if (it != relabel.end()) return it->second;
            int id = static_cast<int>(order.size());
            relabel[q] = id;
            order.push_back(q);
            return id;
        };
        std::set<std::pair<int, int>> seen;
        std::vector<std::pair<int, int>> queue;
        name_of(cur.init_memory);
        for (const auto& [st, p] : m.init)
            if (seen.insert({cur.init_memory, st}).second) queue.push_back({cur.init_memory, st});
        struct Cell {
            int q, st;
            std::vector<std::pair<ActionId, double>> act;
            std::vector<std::pair<ActionId, int>> update;  // chosen actions only
        };
        std::vector<Cell> cells;
        for (size_t i = 0; i < queue.size(); ++i) {
            auto [q, st] = queue[i];
            Cell cell{name_of(q), st, cur.act[q][st], {}};
            for (const auto& [a, pa] : cur.act[q][st]) {
                int q2 = cur.update[q][st][a];
                cell.update.push_back({a, name_of(q2)});
                const Distribution* d = m.dist(st, a);
                if (!d) continue;
                for (const auto& [t, p] : *d)
                    if (seen.insert({q2, t}).second) queue.push_back({q2, t});
            }
            cells.push_back(std::move(cell));
        }
        const int used = static_cast<int>(order.size());
        FiniteMemoryScheduler out;
        out.memory_size = used;
        out.init_memory = 0;
        out.act.assign(used, std::vector<std::vector<std::pair<ActionId, double>>>(m.num_states()));
        out.update.assign(used, std::vector<std::vector<int>>(
                                    m.num_states(), std::vector<int>(m.num_actions())));
        for (int q = 0; q < used; ++q)
            for (int st = 0; st < m.num_states(); ++st) {
                ActionId a0 = m.trans[st].empty() ? 0 : m.trans[st][0].first;
                out.act[q][st] = {{a0, 1.0}};
                for (int a = 0; a < m.num_actions(); ++a) out.update[q][st][a] = q;
            }
        for (const auto& cell : cells) {
            out.act[cell.q][cell.st] = cell.act;
            for (const auto& [a, q2] : cell.update) out.update[cell.q][cell.st][a] = q2;
        }

        auto cls = memory_classes(out);
        std::set<int> distinct(cls.begin(), cls.end());
        if (static_cast<int>(distinct.size()) == out.memory_size) return out;

        // quotient by the equivalence, then canonicalize again
        std::map<int, int> rep;  // class -> representative memory state
        for (int q = 0; q < out.memory_size; ++q)
            if (!rep.count(cls[q])) rep[cls[q]] = q;
        std::map<int, int> class_id;
        for (int q = 0; q < out.memory_size; ++q)
            if (!class_id.count(cls[q])) class_id[cls[q]] = static_cast<int>(class_id.size());
        FiniteMemoryScheduler quot;
        quot.memory_size = static_cast<int>(class_id.size());
        quot.init_memory = class_id[cls[out.init_memory]];
        quot.act.assign(quot.memory_size,
                        std::vector<std::vector<std::pair<ActionId, double>>>(m.num_states()));
        quot.update.assign(quot.memory_size,
                           std::vector<std::vector<int>>(m.num_states(),
                                                         std::vector<int>(m.num_actions())));
        for (const auto& [c, r] : rep) {
            int id = class_id[c];
            for (int st = 0; st < m.num_states(); ++st) {
                quot.act[id][st] = out.act[r][st];
                for (int a = 0; a < m.num_actions(); ++a)
                    quot.update[id][st][a] = class_id[cls[out.update[r][st][a]]];
            }
        }
        cur = std::move(quot);
    }
    return cur;
}

std::string SchedulerEnumerator::canonical_key(const FiniteMemoryScheduler& s, const Mdp& m) {
    // reachable part in discovery order
    std::string key = "b" + std::to_string(s.memory_size) + ";";
    std::vector<std::pair<int, int>> queue;
    std::set<std::pair<int, int>> seen;
    for (const auto& [st, p] : m.init)
        if (seen.insert({s.init_memory, st}).second) queue.push_back({s.init_memory, st});
    for (size_t i = 0; i < queue.size(); ++i) {
        auto [q, st] = queue[i];
        for (const auto& [a, pa] : s.act[q][st]) {
            int q2 = s.update[q][st][a];
            key += std::to_string(q) + "," + std::to_string(st) + "->" + std::to_string(a) +
                   "," + std::to_string(q2) + ";";
            const Distribution* d = m.dist(st, a);
            if (!d) continue;
            for (const auto& [t, p] : *d)
                if (seen.insert({q2, t}).second) queue.push_back({q2, t});
        }
    }
    return key;
}

// ---------------------------------------------------------------------------
// tuple search

namespace {

// diagonal product order: layer L contains the index vectors with maximum
// entry L-1, in lexicographic order
class TupleOrder {
  public:
    explicit TupleOrder(int n) : n_(n), layer_(1), vec_(n, 0) {}

    const std::vector<int>& current() const { return vec_; }

    // exists(i) probes the scheduler stream lazily
    bool advance(const std::function<bool(size_t)>& exists) {
        while (true) {
            if (!next_vec()) {
                ++layer_;
                if (!exists(layer_ - 1)) return false;
                std::fill(vec_.begin(), vec_.end(), 0);
                vec_.back() = layer_ - 1;  // first lex vector with max = layer-1
                return true;
            }
            if (valid()) return true;
        }
    }

  private:
    int n_, layer_;
    std::vector<int> vec_;

    bool next_vec() {
        int i = n_ - 1;
        while (i >= 0 && vec_[i] == layer_ - 1) --i;
        if (i < 0) return false;
        ++vec_[i];
        for (int j = i + 1; j < n_; ++j) vec_[j] = 0;
        return true;
    }

    bool valid() const {
        for (int x : vec_)
            if (x == layer_ - 1) return true;
        return false;
    }
};

struct TupleOutcome {
    bool body_passed = false;
    bool satisfied = false;
    bool knife_edge = false;
    double value = 0.0;            // normalized predicate value
    double original_value = 0.0;   // user-written predicate value
    double filter_ms = 0.0;
    double model_check_ms = 0.0;
};

TupleOutcome evaluate_tuple(const Mdp& m, const SchedulerTuple& tuple,
                            const std::optional<HyperBody>& body,
                            const ProbPredicate& normalized, const ProbPredicate& original,
                            const AutomataCaps& caps) {
    using clock = std::chrono::steady_clock;
    TupleOutcome out;
    auto t0 = clock::now();
    bool pass = !body || check_hyper_body_on_tuple(m, tuple, *body, caps);
    out.filter_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    if (!pass) return out;
    out.body_passed = true;
    auto t1 = clock::now();
    MarkovChain joint = composed_induced_chain(m, tuple);
    auto pv = evaluate_predicate(joint, normalized, caps);
    out.satisfied = pv.satisfied;
    out.knife_edge = pv.knife_edge;
    out.value = pv.value;
    if (out.satisfied) {
        // the value as the user wrote the predicate, for the report
        for (const auto& t : original.terms)
            out.original_value +=
                to_double(t.coeff) * chain_ltl_probability(joint, t.operand, caps);
    }
    out.model_check_ms = std::chrono::duration<double, std::milli>(clock::now() - t1).count();
    return out;
}

} // namespace

Verdict bmc_search(const Mdp& m, const FragmentView& view, const BmcConfig& cfg) {
    const int n = static_cast<int>(view.sched_vars.size());
    if (view.body) {
        for (const auto& q : view.body->prefix)
            if (!q.universal)
                throw ConfigError(
                    "existential path quantifiers are not supported by the bounded search");
    }

    Verdict v;
    v.bound = cfg.bound;
    auto norm = normalize_predicate(view.pred);
    if (norm.constant && !*norm.constant) {
        v.kind = Verdict::Kind::NoWitnessWithinBound;
        v.diagnostics.push_back("predicate is unsatisfiable after normalization");
        return v;
    }

    SchedulerEnumerator enumerator(m, cfg.bound);
    std::set<std::string> exclusion_log;
    TupleOrder order(n);

    auto t0 = std::chrono::steady_clock::now();
    long considered = 0, evaluated = 0;
    bool knife_noted = false;

    auto report = [&] {
        if (!cfg.progress) return;
        auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        cfg.progress({considered, evaluated, dt > 0 ? considered / dt : 0.0});
    };

    auto tuple_at = [&](const std::vector<int>& idx) {
        SchedulerTuple tuple;
        for (int i = 0; i < n; ++i) tuple.members.push_back(*enumerator.get(idx[i]));
        return tuple;
    };
    auto exists = [&](size_t i) { return enumerator.get(i) != nullptr; };

    if (!exists(0)) {
        v.kind = Verdict::Kind::NoWitnessWithinBound;
        return v;
    }

    bool more = true;
    while (more) {
        // collect a batch of candidate index vectors
        std::vector<std::vector<int>> batch;
        int batch_size = std::max(1, cfg.threads);
        while (static_cast<int>(batch.size()) < batch_size && more) {
            if (considered + static_cast<long>(batch.size()) >= cfg.max_iterations) {
                more = false;
                break;
            }
            batch.push_back(order.current());
            if (!order.advance(exists)) more = false;
        }
        if (batch.empty()) break;

        std::vector<TupleOutcome> outcomes(batch.size());
        if (cfg.threads > 1) {
            std::vector<std::future<TupleOutcome>> futs;
            for (const auto& idx : batch) {
                SchedulerTuple tuple = tuple_at(idx);
                futs.push_back(std::async(std::launch::async, [&, tuple] {
                    return evaluate_tuple(m, tuple, view.body, norm.pred, view.pred, cfg.caps);
                }));
            }
            for (size_t i = 0; i < futs.size(); ++i) outcomes[i] = futs[i].get();
        } else {
            for (size_t i = 0; i < batch.size(); ++i)
                outcomes[i] =
                    evaluate_tuple(m, tuple_at(batch[i]), view.body, norm.pred, view.pred, cfg.caps);
        }

        for (size_t i = 0; i < batch.size(); ++i) {
            ++considered;
            SchedulerTuple tuple = tuple_at(batch[i]);
            std::string key;
            for (const auto& member : tuple.members)
                key += SchedulerEnumerator::canonical_key(member, m) + "|";
            const auto& out = outcomes[i];
            if (out.body_passed) {
                ++evaluated;
                if (cfg.iteration_hook)
                    cfg.iteration_hook(evaluated, out.filter_ms, out.model_check_ms);
                bool satisfied = norm.constant ? *norm.constant : out.satisfied;
                if (satisfied) {
                    v.kind = Verdict::Kind::WitnessFound;
                    v.witness = tuple;
                    v.witness_value = out.original_value;
                    v.schedulers_checked = evaluated;
                    v.tuples_considered = considered;
                    report();
                    return v;
                }
                if (out.knife_edge && !knife_noted) {
                    knife_noted = true;
                    v.diagnostics.push_back(
                        "a candidate evaluated within tolerance of the bound and was rejected");
                }
            }
            exclusion_log.insert(key);
            if (considered % 64 == 0) report();
        }
    }

    v.kind = Verdict::Kind::NoWitnessWithinBound;
    v.schedulers_checked = evaluated;
    v.tuples_considered = considered;
    v.diagnostics.push_back(
        "no deterministic finite-memory witness with at most " + std::to_string(cfg.bound) +
        " memory states; randomized schedulers are outside this search and may still exist");
    report();
    return v;
}

Verdict bmc_check(const Mdp& m, const PhlFormula& f, const BmcConfig& cfg) {
    auto view = existential_conjunction_view(f);
    if (!view)
        throw ConfigError("bounded model checking needs an existential conjunction formula");
    return bmc_search(m, *view, cfg);
}

Verdict refute_universal(const Mdp& m, const PhlFormula& f, const BmcConfig& cfg) {
    auto view = universal_implication_view(f);
    if (!view) throw ConfigError("refutation needs a universal implication formula");
    // negate: the witness search runs on chi /\ !(P bowtie c)
    switch (view->pred.cmp) {
        case Cmp::Le: view->pred.cmp = Cmp::Gt; break;
        case Cmp::Lt: view->pred.cmp = Cmp::Ge; break;
        case Cmp::Ge: view->pred.cmp = Cmp::Lt; break;
        case Cmp::Gt: view->pred.cmp = Cmp::Le; break;
    }
    return bmc_search(m, *view, cfg);
}

} // namespace phl
