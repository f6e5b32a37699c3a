#include <doctest.h>

#include <random>
#include <set>

#include "analysis.hpp"
#include "bmc.hpp"
#include "mdp_io.hpp"
#include "oracles.hpp"
#include "parser.hpp"
#include "test_util.hpp"

using namespace phl;

TEST_CASE("memoryless enumeration of the choice MDP yields both plans") {
    Mdp m = test::fig3();
    SchedulerEnumerator en(m, 1);
    REQUIRE(en.get(0));
    REQUIRE(en.get(1));
    CHECK(en.get(2) == nullptr);
    // first plan takes a1, second takes a2
    CHECK(en.get(0)->act[0][0][0].first == 0);
    CHECK(en.get(1)->act[0][0][0].first == 1);
}

TEST_CASE("a one-state one-action MDP admits exactly one canonical scheduler") {
    Mdp m = parse_mdp_text("mdp\nstates: s\nactions: a\ninit: s:1.0\ntrans s a: s:1.0\n");
    SchedulerEnumerator en(m, 3);
    REQUIRE(en.get(0));
    CHECK(en.get(1) == nullptr);
}

TEST_CASE("the enumeration matches brute-force table enumeration modulo canonicalization") {
    Mdp m = parse_mdp_text(
        "mdp\nstates: s0 s1\nactions: x y\ninit: s0:1.0\n"
        "trans s0 x: s1:1.0\ntrans s0 y: s0:0.5 s1:0.5\n"
        "trans s1 x: s0:1.0\ntrans s1 y: s1:1.0\n");
    std::set<std::string> stream_keys;
    SchedulerEnumerator en(m, 2);
    for (size_t i = 0; en.get(i); ++i)
        stream_keys.insert(SchedulerEnumerator::canonical_key(*en.get(i), m));

    // every total 2-memory table, canonicalized
    std::set<std::string> oracle_keys;
    const int cells = 2 * 2;  // (q,s) act cells
    for (int act_word = 0; act_word < (1 << cells); ++act_word) {
        for (long long upd_word = 0; upd_word < (1 << (2 * 2 * 2)); ++upd_word) {
            FiniteMemoryScheduler s;
            s.memory_size = 2;
            s.init_memory = 0;
            s.act.assign(2, std::vector<std::vector<std::pair<ActionId, double>>>(2));
            s.update.assign(2, std::vector<std::vector<int>>(2, std::vector<int>(2)));
            int bit = 0;
            for (int q = 0; q < 2; ++q)
                for (int st = 0; st < 2; ++st)
                    s.act[q][st] = {{(act_word >> bit++) & 1, 1.0}};
            int ubit = 0;
            for (int q = 0; q < 2; ++q)
                for (int st = 0; st < 2; ++st)
                    for (int a = 0; a < 2; ++a)
                        s.update[q][st][a] = (upd_word >> ubit++) & 1;
            auto canon = canonicalize_scheduler(s, m);
            if (canon.memory_size > 2) continue;
            oracle_keys.insert(SchedulerEnumerator::canonical_key(canon, m));
        }
    }
    CHECK(stream_keys == oracle_keys);
}

TEST_CASE("enumerated schedulers are valid, canonical and duplicate-free") {
    std::mt19937_64 rng(3131);
    for (int trial = 0; trial < 10; ++trial) {
        Mdp m = oracle::random_mdp(rng, 3, 2, 1);
        SchedulerEnumerator en(m, 2);
        std::set<std::string> keys;
        for (size_t i = 0; en.get(i) && i < 400; ++i) {
            const auto& s = *en.get(i);
            CHECK(s.deterministic());
            CHECK(scheduler_minimal(s));
            // canonicalization is the identity on stream members
            auto canon = canonicalize_scheduler(s, m);
            CHECK(SchedulerEnumerator::canonical_key(canon, m) ==
                  SchedulerEnumerator::canonical_key(s, m));
            CHECK(keys.insert(SchedulerEnumerator::canonical_key(s, m)).second);
            // the scheduler induces a well-formed chain
            MarkovChain c = induced_chain(m, s);
            for (int st = 0; st < c.num_states(); ++st) {
                double sum = 0.0;
                for (const auto& [t, p] : c.rows[st]) sum += p;
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("the witness search finds the reaching plan of the choice MDP") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl(test::read_fixture("fig3_reach.phl"));
    BmcConfig cfg;
    cfg.bound = 1;
    Verdict v = bmc_check(m, f, cfg);
    REQUIRE(v.kind == Verdict::Kind::WitnessFound);
    CHECK(v.witness_value == doctest::Approx(1.0));
    CHECK(v.schedulers_checked <= 2);
    REQUIRE(v.witness.members.size() == 1);
    CHECK(v.witness.members[0].act[0][0][0].first == 0);
}

TEST_CASE("an unsatisfiable probability bound exhausts the bounded search") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl("exists s1. P(F a@s1) >= 2");
    BmcConfig cfg;
    cfg.bound = 1;
    Verdict v = bmc_check(m, f, cfg);
    CHECK(v.kind == Verdict::Kind::NoWitnessWithinBound);
}

TEST_CASE("existential path quantifiers are a configuration error") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl("exists s1. (exists p1 : s1. X a@p1) /\\ P(true) >= 0");
    BmcConfig cfg;
    CHECK_THROWS_AS(bmc_check(m, f, cfg), ConfigError);
}

TEST_CASE("the deterministic-semantics fixture has no witness within bound three") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl(test::read_fixture("fig3_exists.phl"));
    BmcConfig cfg;
    cfg.bound = 3;
    Verdict v = bmc_check(m, f, cfg);
    CHECK(v.kind == Verdict::Kind::NoWitnessWithinBound);
    CHECK(v.schedulers_checked == 0);  // every tuple fails the hyper body
}

TEST_CASE("an irrefutable tautology survives refutation") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl("forall s1. P(true) <= 1");
    BmcConfig cfg;
    cfg.bound = 2;
    Verdict v = refute_universal(m, f, cfg);
    CHECK(v.kind == Verdict::Kind::NoWitnessWithinBound);
}

TEST_CASE("an unsatisfiable hyper body filters every tuple") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl(
        "forall s1. !(forall p1 : s1. X false) \\/ P(F a@s1) <= 1");
    BmcConfig cfg;
    cfg.bound = 1;
    Verdict v = refute_universal(m, f, cfg);
    CHECK(v.kind == Verdict::Kind::NoWitnessWithinBound);
    CHECK(v.schedulers_checked == 0);
}

TEST_CASE("witnesses survive an independent re-check") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl(test::read_fixture("fig3_reach.phl"));
    BmcConfig cfg;
    cfg.bound = 2;
    Verdict v = bmc_check(m, f, cfg);
    REQUIRE(v.kind == Verdict::Kind::WitnessFound);
    // fresh evaluation from scratch
    auto view = existential_conjunction_view(f);
    auto norm = normalize_predicate(view->pred);
    MarkovChain joint = composed_induced_chain(m, v.witness);
    CHECK(evaluate_predicate(joint, norm.pred).satisfied);
}

TEST_CASE("replaying the search is deterministic") {
    Mdp m = test::fig3();
    PhlFormula f = parse_phl("exists s1. P(F a@s1) >= 0.5");
    BmcConfig cfg;
    cfg.bound = 2;
    Verdict v1 = bmc_check(m, f, cfg);
    Verdict v2 = bmc_check(m, f, cfg);
    CHECK(v1.kind == v2.kind);
    CHECK(v1.tuples_considered == v2.tuples_considered);
    CHECK(v1.schedulers_checked == v2.schedulers_checked);
    if (v1.kind == Verdict::Kind::WitnessFound) {
        REQUIRE(v1.witness.members.size() == v2.witness.members.size());
        for (size_t i = 0; i < v1.witness.members.size(); ++i)
            CHECK(SchedulerEnumerator::canonical_key(v1.witness.members[i], m) ==
                  SchedulerEnumerator::canonical_key(v2.witness.members[i], m));
    }
}

TEST_CASE("a parallel work pool returns the same verdict as the sequential search") {
    Mdp m = test::fig3();
    for (const char* text : {"exists s1. P(F a@s1) >= 1", "exists s1. P(F a@s1) >= 2"}) {
        PhlFormula f = parse_phl(text);
        BmcConfig seq, par;
        seq.bound = par.bound = 2;
        par.threads = 3;
        Verdict v1 = bmc_check(m, f, seq);
        Verdict v2 = bmc_check(m, f, par);
        CHECK(v1.kind == v2.kind);
        if (v1.kind == Verdict::Kind::WitnessFound)
            CHECK(SchedulerEnumerator::canonical_key(v1.witness.members[0], m) ==
                  SchedulerEnumerator::canonical_key(v2.witness.members[0], m));
    }
}

TEST_CASE("bounded search agrees with exhaustive memoryless evaluation") {
    std::mt19937_64 rng(606060);
    int agreements = 0;
    for (int trial = 0; trial < 15; ++trial) {
        Mdp m = oracle::random_mdp(rng, 3, 2, 1);
        FragmentView view;
        view.sched_vars = {"s1", "s2"};
        HyperBody body;
        body.prefix = {{true, "p1", "s1", 0}, {true, "p2", "s2", 1}};
        body.matrix = ltl_un(LtlOp::Always, ltl_bin(LtlOp::Iff, ltl_atom("a", "p1", 0),
                                                    ltl_atom("a", "p2", 1)));
        view.body = body;
        view.pred.terms.push_back(
            {Rational(1), false, ltl_un(LtlOp::Eventually, ltl_atom("a", "s1", 0))});
        view.pred.cmp = Cmp::Ge;
        view.pred.bound = Rational(trial % 4, 4);

        BmcConfig cfg;
        cfg.bound = 1;
        Verdict v = bmc_search(m, view, cfg);

        // exhaustive truth over all memoryless deterministic pairs
        auto norm = normalize_predicate(view.pred);
        bool witness_exists = false;
        for (const auto& c1 : oracle::all_memoryless_choices(m)) {
            for (const auto& c2 : oracle::all_memoryless_choices(m)) {
                SchedulerTuple tuple{{memoryless_scheduler(m, c1), memoryless_scheduler(m, c2)}};
                if (!check_hyper_body_on_tuple(m, tuple, body)) continue;
                bool sat = norm.constant
                               ? *norm.constant
                               : evaluate_predicate(composed_induced_chain(m, tuple), norm.pred)
                                     .satisfied;
                if (sat) witness_exists = true;
            }
        }
        CHECK((v.kind == Verdict::Kind::WitnessFound) == witness_exists);
        ++agreements;
    }
    CHECK(agreements == 15);
}
