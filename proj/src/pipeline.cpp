#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <set>

namespace phl {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

nlohmann::json witness_json(const SchedulerTuple& tuple, const Mdp& m) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& s : tuple.members) {
        nlohmann::json member;
        member["memorySize"] = s.memory_size;
        member["initMemory"] = s.init_memory;
        nlohmann::json act = nlohmann::json::array();
        nlohmann::json update = nlohmann::json::array();
        // reachable entries in discovery order
        std::vector<std::pair<int, int>> queue;
        std::set<std::pair<int, int>> seen;
        for (const auto& [st, p] : m.init)
            if (seen.insert({s.init_memory, st}).second) queue.push_back({s.init_memory, st});
        for (size_t i = 0; i < queue.size(); ++i) {
            auto [q, st] = queue[i];
            for (const auto& [a, pa] : s.act[q][st]) {
                nlohmann::json row;
                row["memory"] = q;
                row["state"] = m.state_names[st];
                row["action"] = m.action_names[a];
                if (s.act[q][st].size() > 1) row["probability"] = pa;
                act.push_back(row);
                int q2 = s.update[q][st][a];
                nlohmann::json urow;
                urow["memory"] = q;
                urow["state"] = m.state_names[st];
                urow["action"] = m.action_names[a];
                urow["next"] = q2;
                update.push_back(urow);
                const Distribution* d = m.dist(st, a);
                if (!d) continue;
                for (const auto& [t, p] : *d)
                    if (seen.insert({q2, t}).second) queue.push_back({q2, t});
            }
        }
        member["act"] = std::move(act);
        member["update"] = std::move(update);
        members.push_back(std::move(member));
    }
    nlohmann::json out;
    out["members"] = std::move(members);
    return out;
}

struct UiOutcome {
    Verdict verdict;
    std::map<std::string, long> sizes;
    long iterations = 0;
};

UiOutcome check_universal_implication(const Mdp& m, const FragmentView& view,
                                      const PipelineOptions& opts) {
    UiOutcome out;
    const int n = static_cast<int>(view.sched_vars.size());
    out.sizes["mdp_states"] = m.num_states();
    out.sizes["mdp_actions"] = m.num_actions();
    out.sizes["scheduler_vars"] = n;

    auto norm = normalize_predicate(view.pred);
    double bound = to_double(norm.pred.bound);


    SafetyDfa dfa;
    if (view.body) {
        dfa = safety_dfa(*view.body, m, n, opts.automata_caps);
    } else {
        dfa.props = {};
        dfa.delta = {{0}};
        dfa.initial = 0;
    }
    out.sizes["safety_dfa_states"] = dfa.num_states();

    double c_star = 0.0;
    try {
        SelfCompositionMdp comp = self_compose(m, n, opts.composition_caps);
        out.sizes["self_composition_states"] = comp.mdp.num_states();

        ProductMdp safety_prod = product_with_safety(comp, dfa, opts.composition_caps);
        out.sizes["safety_product_states"] = safety_prod.mdp.num_states();
        if (safety_prod.initial_mass < 1.0 - kProbTol)
            out.verdict.diagnostics.push_back(
                "part of the initial distribution violates the hyper body (mass " +
                std::to_string(1.0 - safety_prod.initial_mass) +
                " excluded, not renormalized)");

        std::vector<Dra> operands;
        std::vector<double> coeffs;
        for (size_t i = 0; i < norm.pred.terms.size(); ++i) {
            auto it = opts.dra_overrides.find(static_cast<int>(i));
            if (it != opts.dra_overrides.end()) operands.push_back(it->second);
            else operands.push_back(ltl_to_dra(norm.pred.terms[i].operand, opts.automata_caps));
            coeffs.push_back(to_double(norm.pred.terms[i].coeff));
            out.sizes["dra_" + std::to_string(i) + "_states"] = operands.back().num_states();
        }
        const int k = static_cast<int>(operands.size());

        ProductMdp rabin = k > 0 ? product_with_rabin(safety_prod, operands, opts.composition_caps)
                                 : safety_prod;
        out.sizes["rabin_product_states"] = rabin.mdp.num_states();

        if (k > 0) {
            auto table = success_sets(rabin, k);
            auto res = solve_optimal_value(rabin, table, coeffs, opts.vi_residual,
                                           opts.vi_max_iterations);
            c_star = res.c_star;
            out.iterations = res.iterations;
        }
    } catch (const EmptyProductError& e) {
        out.verdict.kind = Verdict::Kind::Holds;
        out.verdict.c_star = 0.0;
        out.verdict.has_c_star = true;
        out.verdict.diagnostics.push_back(std::string(e.what()) +
                                          "; the hyper body is unsatisfiable, the "
                                          "implication holds vacuously");
        return out;
    }

    out.verdict.c_star = c_star;
    out.verdict.has_c_star = true;
    bool knife_edge = std::abs(c_star - bound) <= kProbTol;
    if (norm.pred.cmp == Cmp::Lt) {
        // a strict comparison at the knife edge cannot be certified by a
        // float solve
        if (knife_edge) {
            out.verdict.kind = Verdict::Kind::Inconclusive;
            out.verdict.diagnostics.push_back(
                "optimal value lies within tolerance of the strict bound; the comparison "
                "cannot be certified");
        } else {
            out.verdict.kind =
                c_star < bound ? Verdict::Kind::Holds : Verdict::Kind::Inconclusive;
        }
    } else {
        out.verdict.kind =
            c_star <= bound + kProbTol ? Verdict::Kind::Holds : Verdict::Kind::Inconclusive;
        if (knife_edge)
            out.verdict.diagnostics.push_back("optimal value meets the bound exactly within "
                                              "tolerance");
    }
    return out;
}

// positive Boolean combinations of universal implications are checked
// conjunct by conjunct
std::optional<UiOutcome> check_combination(const Mdp& m, const PhlPtr& node,
                                           const PipelineOptions& opts, int depth) {
    if (node->kind == PhlKind::And || node->kind == PhlKind::Or) {
        auto l = check_combination(m, node->lhs, opts, depth + 1);
        if (!l) return std::nullopt;
        auto r = check_combination(m, node->rhs, opts, depth + 1);
        if (!r) return std::nullopt;
        UiOutcome out;
        bool lh = l->verdict.kind == Verdict::Kind::Holds;
        bool rh = r->verdict.kind == Verdict::Kind::Holds;
        bool holds = node->kind == PhlKind::And ? (lh && rh) : (lh || rh);
        out.verdict.kind = holds ? Verdict::Kind::Holds : Verdict::Kind::Inconclusive;
        for (const auto& sub : {l, r}) {
            for (const auto& d : sub->verdict.diagnostics) out.verdict.diagnostics.push_back(d);
            out.iterations += sub->iterations;
        }
        int idx = 0;
        for (const auto& sub : {l, r}) {
            for (const auto& [key, val] : sub->sizes)
                out.sizes["sub" + std::to_string(depth) + "_" + std::to_string(idx) + "_" + key] =
                    val;
            ++idx;
        }
        out.verdict.diagnostics.push_back(
            std::string(node->kind == PhlKind::And ? "conjunction" : "disjunction") +
            " of universal implications combined " + (lh ? "Holds" : "Inconclusive") + " and " +
            (rh ? "Holds" : "Inconclusive"));
        return out;
    }
    PhlFormula sub{node};
    auto view = universal_implication_view(sub);
    if (!view) return std::nullopt;
    return check_universal_implication(m, *view, opts);
}

} // namespace

RunReport run_approx(const Mdp& m, const PhlFormula& f, const PipelineOptions& opts) {
    auto t0 = clock_type::now();
    RunReport report;
    report.command = "approx";
    report.formula = pretty_print(f);

    std::optional<UiOutcome> outcome;
    if (auto view = universal_implication_view(f)) {
        outcome = check_universal_implication(m, *view, opts);
    } else {
        outcome = check_combination(m, f.root, opts, 0);
    }
    if (!outcome)
        throw ConfigError(
            "the approximate pipeline needs a universal implication (or a positive Boolean "
            "combination of them); classification: Other");

    report.verdict = outcome->verdict;
    report.sizes = outcome->sizes;
    report.iterations = outcome->iterations;
    report.timings["total_ms"] = ms_since(t0);
    report.exit_code = report.verdict.kind == Verdict::Kind::Holds ? 0 : 1;
    return report;
}

RunReport run_bmc(const Mdp& m, const PhlFormula& f, const PipelineOptions& opts) {
    auto t0 = clock_type::now();
    RunReport report;
    report.command = "bmc";
    report.formula = pretty_print(f);
    report.sizes["mdp_states"] = m.num_states();
    report.sizes["mdp_actions"] = m.num_actions();

    BmcConfig cfg;
    cfg.bound = opts.bmc_bound;
    cfg.max_iterations = opts.bmc_max_iterations;
    cfg.threads = opts.threads;
    cfg.caps = opts.automata_caps;
    cfg.progress = opts.progress;
    cfg.iteration_hook = [&](long it, double search_ms, double mc_ms) {
        report.iteration_timings.push_back({it, search_ms, mc_ms});
    };

    Fragment frag = classify_fragment(f);
    Verdict v;
    if (frag == Fragment::ExistentialConjunction) {
        v = bmc_check(m, f, cfg);
    } else if (frag == Fragment::UniversalImplication) {
        v = refute_universal(m, f, cfg);
        if (v.kind == Verdict::Kind::WitnessFound)
            v.diagnostics.push_back("witness refutes the universal formula");
    } else {
        throw ConfigError("bounded model checking needs a universal implication or an "
                          "existential conjunction; classification: Other");
    }

    if (v.kind == Verdict::Kind::WitnessFound && opts.recheck_witness) {
        // independent re-verification with fresh automata and chains
        auto view = frag == Fragment::ExistentialConjunction ? existential_conjunction_view(f)
                                                             : universal_implication_view(f);
        ProbPredicate pred = view->pred;
        if (frag == Fragment::UniversalImplication) {
            switch (pred.cmp) {
                case Cmp::Le: pred.cmp = Cmp::Gt; break;
                case Cmp::Lt: pred.cmp = Cmp::Ge; break;
                case Cmp::Ge: pred.cmp = Cmp::Lt; break;
                case Cmp::Gt: pred.cmp = Cmp::Le; break;
            }
        }
        bool body_ok = !view->body ||
                       check_hyper_body_on_tuple(m, v.witness, *view->body, opts.automata_caps);
        auto norm = normalize_predicate(pred);
        bool pred_ok = norm.constant.has_value()
                           ? *norm.constant
                           : evaluate_predicate(composed_induced_chain(m, v.witness), norm.pred,
                                                opts.automata_caps)
                                 .satisfied;
        if (!body_ok || !pred_ok)
            throw PhlError("witness failed independent re-verification");
        v.diagnostics.push_back("witness re-verified from scratch");
    }

    report.verdict = v;
    report.iterations = v.schedulers_checked;
    report.timings["total_ms"] = ms_since(t0);
    report.exit_code = v.kind == Verdict::Kind::WitnessFound ? 0 : 1;
    return report;
}

nlohmann::json RunReport::to_json(const Mdp& m) const {
    nlohmann::json j;
    j["schema"] = schema;
    j["command"] = command;
    j["formula"] = formula;
    j["verdict"] = to_string(verdict.kind);
    j["cStar"] = verdict.has_c_star ? nlohmann::json(verdict.c_star) : nlohmann::json(nullptr);
    j["value"] = verdict.kind == Verdict::Kind::WitnessFound
                     ? nlohmann::json(verdict.witness_value)
                     : nlohmann::json(nullptr);
    j["bound"] = verdict.bound;
    j["iterations"] = iterations;
    j["tuplesConsidered"] = verdict.tuples_considered;
    j["witness"] = verdict.kind == Verdict::Kind::WitnessFound ? witness_json(verdict.witness, m)
                                                               : nlohmann::json(nullptr);
    nlohmann::json sizes_json;
    for (const auto& [k, v] : sizes) sizes_json[k] = v;
    j["sizes"] = std::move(sizes_json);
    nlohmann::json timings_json;
    for (const auto& [k, v] : timings) timings_json[k] = v;
    j["timings"] = std::move(timings_json);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : iteration_timings) {
        nlohmann::json row;
        row["iteration"] = r.iteration;
        row["search_ms"] = r.search_ms;
        row["modelCheck_ms"] = r.model_check_ms;
        rows.push_back(std::move(row));
    }
    j["iterationTimings"] = std::move(rows);
    j["diagnostics"] = verdict.diagnostics;
    j["exitCode"] = exit_code;
    return j;
}

Mdp gen_grid(int size, int robots, double slip, long long state_cap) {
    if (size < 2) throw ConfigError("grid size must be at least 2");
    if (robots < 2 || robots > 3) throw ConfigError("robot count must be 2 or 3");
    if (slip <= 0.0 || slip > 1.0) throw ConfigError("slip must be in (0,1]");
    const int cells = size * size;
    long long total = 1;
    for (int i = 0; i < robots; ++i) {
        total *= cells;
        if (total > state_cap)
            throw SizeCapError("grid would have " + std::to_string(cells) + "^" +
                               std::to_string(robots) + " joint states, over the cap");
    }

    auto row_of = [&](int c) { return c / size; };
    auto col_of = [&](int c) { return c % size; };
    // goal is the bottom-right cell; advancing routes right, then down
    const int goal = cells - 1;
    auto advance_cell = [&](int c) {
        if (col_of(c) < size - 1) return c + 1;
        if (row_of(c) < size - 1) return c + size;
        return c;
    };
    auto retreat_cell = [&](int c) {
        if (col_of(c) > 0) return c - 1;
        if (row_of(c) > 0) return c - size;
        return c;
    };

    Mdp m;
    for (int i = 0; i < robots; ++i) m.props.push_back({"move" + std::to_string(i + 1), 0});
    for (int i = 0; i < robots; ++i) m.props.push_back({"goal" + std::to_string(i + 1), 0});

    const char letters[3] = {'g', 'h', 'a'};
    const int num_actions = [&] {
        int r = 1;
        for (int i = 0; i < robots; ++i) r *= 3;
        return r;
    }();
    for (int a = 0; a < num_actions; ++a) {
        auto moves = tuple_unrank(a, 3, robots);
        std::string name;
        for (int mv : moves) name += letters[mv];
        m.action_names.push_back(name);
    }

    m.state_names.resize(total);
    m.labels.resize(total);
    m.trans.resize(total);
    for (long long s = 0; s < total; ++s) {
        auto pos = tuple_unrank(s, cells, robots);
        std::string name = "c";
        for (int i = 0; i < robots; ++i) {
            if (i) name += "_";
            name += std::to_string(pos[i]);
        }
        m.state_names[s] = name;
        for (int i = 0; i < robots; ++i) {
            if (row_of(pos[i]) == size - 1 || col_of(pos[i]) == size - 1)
                m.labels[s].push_back(i);
            if (pos[i] == goal) m.labels[s].push_back(robots + i);
        }
        std::sort(m.labels[s].begin(), m.labels[s].end());

        for (int a = 0; a < num_actions; ++a) {
            auto moves = tuple_unrank(a, 3, robots);
            std::vector<std::pair<long long, double>> dist{{0, 1.0}};
            for (int i = 0; i < robots; ++i) {
                int target = pos[i];
                if (moves[i] == 0) target = advance_cell(pos[i]);
                else if (moves[i] == 2) target = retreat_cell(pos[i]);
                std::vector<std::pair<int, double>> options;
                if (target == pos[i] || slip >= 1.0) {
                    options = {{target, 1.0}};
                } else {
                    options = {{target, slip}, {pos[i], 1.0 - slip}};
                }
                std::vector<std::pair<long long, double>> next;
                for (const auto& [acc, p] : dist)
                    for (const auto& [t, pt] : options) next.push_back({acc * cells + t, p * pt});
                dist = std::move(next);
            }
            Distribution d;
            for (const auto& [t, p] : dist) d.push_back({static_cast<StateId>(t), p});
            std::sort(d.begin(), d.end());
            m.trans[s].push_back({a, std::move(d)});
        }
    }

    // every robot starts at a far end of the grid, on its own corridor
    std::vector<int> start(robots);
    start[0] = size - 1;           // top-right, advancing down the right column
    start[1] = (size - 1) * size;  // bottom-left, advancing along the bottom row
    if (robots == 3) start[2] = 0;  // top-left
    long long init = 0;
    for (int i = 0; i < robots; ++i) init = init * cells + start[i];
    m.init.push_back({static_cast<StateId>(init), 1.0});

    auto violations = validate_mdp(m);
    if (!violations.empty()) throw PhlError("generated grid failed validation: " + violations[0]);
    return m;
}

} // namespace phl
