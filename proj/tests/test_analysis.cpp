#include <doctest.h>

#include <numeric>
#include <random>
#include <set>

#include "analysis.hpp"
#include "mdp_io.hpp"
#include "oracles.hpp"
#include "parser.hpp"
#include "test_util.hpp"

using namespace phl;

namespace {

ProductMdp make_product(Mdp m, std::vector<std::vector<RabinPair>> lifted) {
    ProductMdp p;
    p.mdp = std::move(m);
    p.lifted = std::move(lifted);
    p.comp_state.resize(p.mdp.num_states());
    std::iota(p.comp_state.begin(), p.comp_state.end(), 0);
    p.dfa_state.assign(p.mdp.num_states(), 0);
    return p;
}

RabinPair pair_of(int n, const std::vector<int>& b, const std::vector<int>& g) {
    RabinPair p;
    p.in_b.assign(n, false);
    p.in_g.assign(n, false);
    for (int s : b) p.in_b[s] = true;
    for (int s : g) p.in_g[s] = true;
    return p;
}

std::vector<std::vector<RabinPair>> random_pairs(std::mt19937_64& rng, int n, int k) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    std::vector<std::vector<RabinPair>> lifted(k);
    for (int i = 0; i < k; ++i) {
        int pairs = pick(1, 2);
        for (int j = 0; j < pairs; ++j) {
            std::vector<int> b, g;
            for (int s = 0; s < n; ++s) {
                int r = pick(0, 4);
                if (r == 0) b.push_back(s);
                else if (r <= 2) g.push_back(s);
            }
            lifted[i].push_back(pair_of(n, b, g));
        }
    }
    return lifted;
}

// chains almost surely satisfy the Rabin pair conjunction from s iff every
// bottom SCC reachable from s is good for all members
bool almost_sure_conjunction(const MarkovChain& c, int from,
                             const ProductMdp& p, const std::vector<int>& members,
                             const std::vector<int>& origin) {
    auto bs = bottom_sccs(c.rows);
    std::vector<int> bscc_of(c.num_states(), -1);
    for (size_t i = 0; i < bs.size(); ++i)
        for (int s : bs[i]) bscc_of[s] = static_cast<int>(i);
    // reachable set from `from`
    std::vector<bool> seen(c.num_states(), false);
    std::vector<int> queue{from};
    seen[from] = true;
    for (size_t i = 0; i < queue.size(); ++i)
        for (const auto& [t, pr] : c.rows[queue[i]])
            if (!seen[t]) {
                seen[t] = true;
                queue.push_back(t);
            }
    for (size_t i = 0; i < bs.size(); ++i) {
        bool reachable = false;
        for (int s : bs[i])
            if (seen[s]) reachable = true;
        if (!reachable) continue;
        for (int member : members) {
            bool ok = false;
            for (const auto& pair : p.lifted[member]) {
                bool hit_b = false, hit_g = false;
                for (int s : bs[i]) {
                    if (pair.in_b[origin[s]]) hit_b = true;
                    if (pair.in_g[origin[s]]) hit_g = true;
                }
                if (!hit_b && hit_g) ok = true;
            }
            if (!ok) return false;
        }
    }
    return true;
}

} // namespace

TEST_CASE("an absorbing goal state forms its own success set") {
    Mdp m = parse_mdp_text(
        "mdp\nstates: s t\nactions: a\ninit: s:1.0\ntrans s a: t:1.0\ntrans t a: t:1.0\n");
    ProductMdp p = make_product(m, {{pair_of(2, {}, {1})}});
    auto table = success_sets(p, 1);
    CHECK_FALSE(table.in_u[1][0]);
    CHECK(table.in_u[1][1]);
}

TEST_CASE("a success set is empty when every component through G is poisoned by B") {
    // the only end component containing g also contains b
    Mdp m = parse_mdp_text(
        "mdp\nstates: b g\nactions: a\ninit: b:1.0\ntrans b a: g:1.0\ntrans g a: b:1.0\n");
    ProductMdp p = make_product(m, {{pair_of(2, {0}, {1})}});
    auto table = success_sets(p, 1);
    CHECK_FALSE(table.in_u[1][0]);
    CHECK_FALSE(table.in_u[1][1]);
}

TEST_CASE("the joint success set matches a policy-enumeration oracle on a hand product") {
    // six states; two Rabin operands, one pair each
    Mdp m = parse_mdp_text(
        "mdp\nstates: s0 s1 s2 s3 s4 s5\nactions: x y\ninit: s0:1.0\n"
        "trans s0 x: s1:1.0\ntrans s0 y: s3:1.0\n"
        "trans s1 x: s2:1.0\ntrans s2 x: s1:1.0\n"
        "trans s3 x: s4:1.0\ntrans s4 x: s3:0.5 s5:0.5\n"
        "trans s5 x: s5:1.0\n");
    // operand 1 wants s1/s3 infinitely often, operand 2 wants s2/s4; s5 is
    // poison for operand 2
    ProductMdp p = make_product(
        m, {{pair_of(6, {}, {1, 3})}, {pair_of(6, {5}, {2, 4})}});
    auto table = success_sets(p, 2);

    std::vector<bool> expect(6, false);
    for (const auto& choice : oracle::all_memoryless_choices(m)) {
        auto sched = memoryless_scheduler(m, choice);
        MarkovChain c = induced_chain(m, sched);
        std::vector<int> origin(c.num_states());
        for (int s = 0; s < c.num_states(); ++s) origin[s] = c.origin[s].first;
        for (int s = 0; s < c.num_states(); ++s)
            if (almost_sure_conjunction(c, s, p, {0, 1}, origin)) expect[origin[s]] = true;
    }
    for (int s = 0; s < 6; ++s) CHECK_MESSAGE(table.in_u[3][s] == expect[s], "state " << s);
}

TEST_CASE("the floor constraint sets the optimal value on an absorbing target") {
    Mdp m = parse_mdp_text("mdp\nstates: u\nactions: a\ninit: u:1.0\ntrans u a: u:1.0\n");
    ProductMdp p = make_product(m, {{pair_of(1, {}, {0})}});
    auto table = success_sets(p, 1);
    REQUIRE(table.in_u[1][0]);
    auto res = solve_optimal_value(p, table, {0.7});
    CHECK(res.c_star == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("the optimal policy picks the larger of two floors") {
    Mdp m = parse_mdp_text(
        "mdp\nstates: s u v\nactions: x y\ninit: s:1.0\n"
        "trans s x: u:1.0\ntrans s y: v:1.0\ntrans u x: u:1.0\ntrans v x: v:1.0\n");
    ProductMdp p = make_product(m, {{pair_of(3, {}, {1})}, {pair_of(3, {}, {2})}});
    auto table = success_sets(p, 2);
    auto res = solve_optimal_value(p, table, {0.7, 0.3});
    CHECK(res.c_star == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("value iteration agrees with policy enumeration on random products") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 12; ++trial) {
        Mdp m = oracle::random_mdp(rng, 6, 2, 1);
        int k = 1 + trial % 2;
        ProductMdp p = make_product(m, random_pairs(rng, m.num_states(), k));
        auto table = success_sets(p, k);
        std::vector<double> coeffs;
        for (int i = 0; i < k; ++i) coeffs.push_back(0.25 + 0.5 * (i % 2));
        auto res = solve_optimal_value(p, table, coeffs);
        auto floors = oracle::floors_from_table(p, table, coeffs);
        double expect = oracle::enumerate_policies_max(p, floors);
        CHECK(res.c_star == doctest::Approx(expect).epsilon(1e-6));
    }
}

TEST_CASE("value iteration satisfies the optimization constraints") {
    std::mt19937_64 rng(5353);
    for (int trial = 0; trial < 10; ++trial) {
        Mdp m = oracle::random_mdp(rng, 6, 2, 1);
        ProductMdp p = make_product(m, random_pairs(rng, m.num_states(), 1));
        auto table = success_sets(p, 1);
        auto res = solve_optimal_value(p, table, {0.8});
        auto floors = oracle::floors_from_table(p, table, {0.8});
        for (int s = 0; s < p.mdp.num_states(); ++s) {
            CHECK(res.value[s] >= -1e-7);
            CHECK(res.value[s] >= floors[s] - 1e-7);
            for (const auto& [a, dist] : p.mdp.trans[s]) {
                double v = 0.0;
                for (const auto& [t, pr] : dist) v += pr * res.value[t];
                CHECK(res.value[s] >= v - 1e-7);
            }
        }
    }
}

TEST_CASE("value iteration is monotone from the zero vector") {
    std::mt19937_64 rng(727);
    Mdp m = oracle::random_mdp(rng, 6, 2, 1);
    ProductMdp p = make_product(m, random_pairs(rng, m.num_states(), 2));
    auto table = success_sets(p, 2);
    std::vector<double> previous(p.mdp.num_states(), 0.0);
    bool monotone = true;
    solve_optimal_value(p, table, {0.5, 0.25}, 1e-9, 1'000'000,
                        [&](const std::vector<double>& x) {
                            for (size_t i = 0; i < x.size(); ++i)
                                if (x[i] < previous[i] - 1e-12) monotone = false;
                            previous = x;
                        });
    CHECK(monotone);
}

TEST_CASE("value iteration reports non-convergence instead of truncating") {
    Mdp m = parse_mdp_text(
        "mdp\nstates: s t\nactions: a\ninit: s:1.0\n"
        "trans s a: s:0.5 t:0.5\ntrans t a: t:1.0\n");
    ProductMdp p = make_product(m, {{pair_of(2, {}, {1})}});
    auto table = success_sets(p, 1);
    CHECK_THROWS_AS(solve_optimal_value(p, table, {1.0}, 1e-9, 3), NonConvergenceError);
}

TEST_CASE("reachability probability of a half-split chain") {
    MarkovChain c;
    c.props = {{"a", 0}};
    c.labels = {{}, {0}, {}};
    c.rows = {{{1, 0.5}, {2, 0.5}}, {{1, 1.0}}, {{2, 1.0}}};
    c.init = {{0, 1.0}};
    CHECK(chain_ltl_probability(c, parse_ltl("F a@s1")) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(chain_ltl_probability(c, parse_ltl("true")) == doctest::Approx(1.0));
}

TEST_CASE("chain model checking agrees with the exact and sampling oracles") {
    std::mt19937_64 rng(140);
    const char* templates[5] = {"F a@s1", "G a@s1", "G F a@s1", "F G a@s1", "a@s1 U b@s1"};
    oracle::Template kinds[5] = {oracle::Template::EvA, oracle::Template::AlwA,
                                 oracle::Template::AlwEvA, oracle::Template::EvAlwA,
                                 oracle::Template::AUntilB};
    for (int trial = 0; trial < 3; ++trial) {
        MarkovChain c = oracle::random_chain(rng, 8, 2);
        for (int f = 0; f < 5; ++f) {
            LtlPtr formula = parse_ltl(templates[f]);
            double mine = chain_ltl_probability(c, formula);
            double exact = oracle::chain_ltl_probability_exact(c, formula);
            CHECK(mine == doctest::Approx(exact).epsilon(1e-9));
            double mc = oracle::chain_probability_mc(c, kinds[f], c.prop_id("a", 0),
                                                     c.prop_id("b", 0), 100000,
                                                     1000 + trial * 5 + f);
            CHECK(std::abs(mine - mc) < 0.01);
        }
    }
}

TEST_CASE("a formula and its negation have complementary probabilities") {
    std::mt19937_64 rng(808);
    for (int trial = 0; trial < 20; ++trial) {
        MarkovChain c = oracle::random_chain(rng, 6, 2);
        LtlPtr f = oracle::random_ltl(rng, 1 + trial % 4, 2);
        double p = chain_ltl_probability(c, f);
        double q = chain_ltl_probability(c, ltl_not(f));
        CHECK(p + q == doctest::Approx(1.0).epsilon(1e-7));
    }
}

TEST_CASE("identical deterministic plans satisfy the agreement body") {
    Mdp m = test::fig3();
    auto s1 = memoryless_scheduler(m, {0, 0, 1});
    HyperBody body;
    body.prefix = {{true, "p1", "s1", 0}, {true, "p2", "s2", 1}};
    body.matrix = ltl_un(LtlOp::Always, ltl_bin(LtlOp::Iff, ltl_atom("a", "p1", 0),
                                                ltl_atom("a", "p2", 1)));
    CHECK(check_hyper_body_on_tuple(m, SchedulerTuple{{s1, s1}}, body));
}

TEST_CASE("diverging plans violate the agreement body at the first step") {
    Mdp m = test::fig3();
    auto s1 = memoryless_scheduler(m, {0, 0, 1});
    auto s2 = memoryless_scheduler(m, {1, 0, 1});
    HyperBody body;
    body.prefix = {{true, "p1", "s1", 0}, {true, "p2", "s2", 1}};
    body.matrix = ltl_un(LtlOp::Always, ltl_bin(LtlOp::Iff, ltl_atom("a", "p1", 0),
                                                ltl_atom("a", "p2", 1)));
    CHECK_FALSE(check_hyper_body_on_tuple(m, SchedulerTuple{{s1, s2}}, body));
}

TEST_CASE("a true matrix holds for every tuple") {
    Mdp m = test::fig3();
    auto s1 = memoryless_scheduler(m, {0, 0, 1});
    auto s2 = memoryless_scheduler(m, {1, 0, 1});
    HyperBody body;
    body.prefix = {{true, "p1", "s1", 0}, {true, "p2", "s2", 1}};
    body.matrix = ltl_true();
    CHECK(check_hyper_body_on_tuple(m, SchedulerTuple{{s1, s2}}, body));
}

TEST_CASE("existential path quantifiers are rejected") {
    Mdp m = test::fig3();
    auto s1 = memoryless_scheduler(m, {0, 0, 1});
    HyperBody body;
    body.prefix = {{false, "p1", "s1", 0}};
    body.matrix = ltl_true();
    CHECK_THROWS_AS(check_hyper_body_on_tuple(m, SchedulerTuple{{s1}}, body), ConfigError);
}

TEST_CASE("evaluating a trivial predicate yields probability one") {
    Mdp m = test::fig3();
    MarkovChain c = composed_induced_chain(m, SchedulerTuple{{memoryless_scheduler(m, {0, 0, 1})}});
    ProbPredicate pred;
    pred.terms.push_back({Rational(1), false, ltl_true()});
    pred.cmp = Cmp::Le;
    pred.bound = Rational(1);
    auto pv = evaluate_predicate(c, pred);
    CHECK(pv.value == doctest::Approx(1.0));
    CHECK(pv.satisfied);
}

TEST_CASE("the next-step probability of the labeled branch is one under alpha1") {
    Mdp m = test::fig3();
    MarkovChain c = induced_chain(m, memoryless_scheduler(m, {0, 0, 1}));
    CHECK(chain_ltl_probability(c, parse_ltl("X a@s1")) == doctest::Approx(1.0));
}

TEST_CASE("two-term predicates sum their independent solves") {
    Mdp m = parse_mdp_text(
        "mdp\nstates: s0 s1 s2\nactions: a\ninit: s0:1.0\nlabel s1: goal1\nlabel s2: goal2\n"
        "trans s0 a: s1:0.25 s2:0.75\ntrans s1 a: s1:1.0\ntrans s2 a: s2:1.0\n");
    MarkovChain c = induced_chain(m, memoryless_scheduler(m, {0, 0, 0}));
    ProbPredicate pred;
    pred.terms.push_back({Rational(1), false, parse_ltl("F goal1@s1")});
    pred.terms.push_back({Rational(1), false, parse_ltl("F goal2@s1")});
    pred.cmp = Cmp::Le;
    pred.bound = Rational(2);
    auto pv = evaluate_predicate(c, pred);
    double lhs = chain_ltl_probability(c, parse_ltl("F goal1@s1")) +
                 chain_ltl_probability(c, parse_ltl("F goal2@s1"));
    CHECK(pv.value == doctest::Approx(lhs).epsilon(1e-12));
    CHECK(pv.value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("runs satisfying the pair conjunction visit the success set infinitely often") {
    std::mt19937_64 rng(9001);
    int satisfied_runs = 0, visiting_runs = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Mdp m = oracle::random_mdp(rng, 5, 2, 1);
        int k = 1 + trial % 2;
        ProductMdp p = make_product(m, random_pairs(rng, m.num_states(), k));
        auto table = success_sets(p, k);
        int full_mask = (1 << k) - 1;
        std::vector<int> members(k);
        std::iota(members.begin(), members.end(), 0);

        auto choices = oracle::all_memoryless_choices(m);
        for (int run = 0; run < 1000; ++run) {
            const auto& choice = choices[rng() % choices.size()];
            MarkovChain c = induced_chain(m, memoryless_scheduler(m, choice));
            // structural resolution: a run settles in one bottom SCC and
            // almost surely visits all of its states infinitely often
            auto bs = bottom_sccs(c.rows);
            const auto& scc = bs[rng() % bs.size()];
            bool sat = true;
            for (int member : members) {
                bool ok = false;
                for (const auto& pair : p.lifted[member]) {
                    bool hit_b = false, hit_g = false;
                    for (int s : scc) {
                        if (pair.in_b[c.origin[s].first]) hit_b = true;
                        if (pair.in_g[c.origin[s].first]) hit_g = true;
                    }
                    if (!hit_b && hit_g) ok = true;
                }
                sat = sat && ok;
            }
            if (!sat) continue;
            ++satisfied_runs;
            bool visits = false;
            for (int s : scc)
                if (table.in_u[full_mask][c.origin[s].first]) visits = true;
            if (visits) ++visiting_runs;
        }
    }
    CHECK(satisfied_runs == visiting_runs);
    CHECK(satisfied_runs > 0);
}
