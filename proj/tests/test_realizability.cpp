#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "tcg/realizability.hpp"

using namespace tcg;

namespace {

WeightedGraph random_linear_graph(std::mt19937& rng, int max_nodes, int max_M, int max_edges) {
    WeightedGraph g;
    g.node_count = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    g.max_const = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_M));
    for (int i = 0; i + 1 < g.node_count; ++i) g.order_edges.push_back({i, i + 1});
    int edges = static_cast<int>(rng() % static_cast<unsigned>(max_edges + 1));
    for (int k = 0; k < edges; ++k) {
        int u = static_cast<int>(rng() % static_cast<unsigned>(g.node_count));
        int v = static_cast<int>(rng() % static_cast<unsigned>(g.node_count));
        if (u == v) continue;
        int w = static_cast<int>(rng() % static_cast<unsigned>(2 * g.max_const - 1)) -
                (g.max_const - 1);
        g.constraint_edges.push_back({u, rng() % 2 ? Cmp::lt : Cmp::le, w, v});
    }
    g.normalize();
    return g;
}

} // namespace

TEST_CASE("the five-node graph is realizable and its tightening is not") {
    WeightedGraph g = fixtures::five_node_graph();

    // frozen witness, verified by direct constraint substitution
    Realization frozen{{Rat(0), Rat(7, 2), Rat(6), Rat(6), Rat(15, 2)}};
    CHECK(realizes(g, frozen));

    RealizeResult r = check_realizable(g);
    REQUIRE(is_realizable(r));
    CHECK(realizes(g, std::get<Realization>(r)));

    WeightedGraph bad = fixtures::five_node_graph(true);
    RealizeResult rb = check_realizable(bad);
    REQUIRE(!is_realizable(rb));
    const auto& w = std::get<NegCycleWitness>(rb);
    std::set<int> nodes(w.nodes.begin(), w.nodes.end());
    CHECK(nodes == std::set<int>{0, 1, 2, 3});
    CHECK(w.nodes.size() == 4);
    CHECK(verify_neg_cycle(bad, w));
    CHECK(w.total_weight == 0);
    CHECK(w.contains_strict);
}

TEST_CASE("trivial graphs") {
    WeightedGraph g;
    g.node_count = 1;
    RealizeResult r = check_realizable(g);
    REQUIRE(is_realizable(r));
    CHECK(std::get<Realization>(r).ts == std::vector<Rat>{Rat(0)});
}

TEST_CASE("strict self-loops refute, non-strict ones are vacuous") {
    WeightedGraph g;
    g.node_count = 2;
    g.max_const = 2;
    g.order_edges = {{0, 1}};
    g.constraint_edges = {{0, Cmp::lt, 0, 0}};
    REQUIRE(!is_realizable(check_realizable(g)));
    CHECK(verify_neg_cycle(g, std::get<NegCycleWitness>(check_realizable(g))));

    g.constraint_edges = {{0, Cmp::le, 0, 0}};
    CHECK(is_realizable(check_realizable(g)));
}

TEST_CASE("normalization contracts the documented large gap") {
    WeightedGraph g = fixtures::gap_graph();
    Realization ts = fixtures::gap_realization();
    REQUIRE(realizes(g, ts));
    REQUIRE(!is_slowly_monotone(g, ts));

    Realization out = slowly_monotone_normalize(g, ts);
    CHECK(realizes(g, out));
    CHECK(is_slowly_monotone(g, out));
    // prefix untouched, contracted floor pinned by the construction
    CHECK(out.ts[0] == Rat(0));
    CHECK(out.ts[1] == Rat(1, 5));
    CHECK(out.ts[2].floor() == 2);
}

TEST_CASE("already slowly monotone maps are unchanged") {
    WeightedGraph g = fixtures::five_node_graph();
    Realization ts{{Rat(0), Rat(7, 2), Rat(6), Rat(6), Rat(15, 2)}};
    REQUIRE(is_slowly_monotone(g, ts));
    Realization out = slowly_monotone_normalize(g, ts);
    CHECK(out.ts == ts.ts);
}

TEST_CASE("two consecutive large gaps are both contracted") {
    WeightedGraph g;
    g.node_count = 3;
    g.max_const = 2;
    g.order_edges = {{0, 1}, {1, 2}};
    Realization ts{{Rat(0), Rat(5), Rat(21, 2)}};
    REQUIRE(realizes(g, ts));
    Realization out = slowly_monotone_normalize(g, ts);
    CHECK(realizes(g, out));
    CHECK(is_slowly_monotone(g, out));
}

TEST_CASE("normalize rejects non-realizations") {
    WeightedGraph g = fixtures::five_node_graph();
    Realization bogus{{Rat(0), Rat(0), Rat(0), Rat(0), Rat(0)}};
    CHECK_THROWS_AS(slowly_monotone_normalize(g, bogus), SemanticError);
}

TEST_CASE("normalization property on random realizable graphs") {
    std::mt19937 rng(23);
    int seen = 0;
    while (seen < 50) {
        WeightedGraph g = random_linear_graph(rng, 6, 4, 6);
        RealizeResult r = check_realizable(g);
        if (!is_realizable(r)) continue;
        ++seen;
        Realization out = slowly_monotone_normalize(g, std::get<Realization>(r));
        CHECK(realizes(g, out));
        CHECK(is_slowly_monotone(g, out));
    }
}

TEST_CASE("modular distance examples") {
    WeightedGraph g = fixtures::gap_graph(); // linear, M = 3
    Tsm t{3, {0, 0, 2, 0, 1}};
    ModularDistances md(g, t);
    CHECK(md.d(0, 2) == 2);
    CHECK(md.d_plus(0, 4) == 3);
    CHECK(md.is_big(0, 4));
    CHECK(md.d_plus(4, 0) == -3);
    for (int u = 0; u < 5; ++u) CHECK(md.d_plus(u, u) == 0);
    CHECK(!md.is_big(4, 0)); // pairs against the order are never big
}

TEST_CASE("modulus one collapses every distance") {
    WeightedGraph g;
    g.node_count = 4;
    g.max_const = 1;
    for (int i = 0; i < 3; ++i) g.order_edges.push_back({i, i + 1});
    Tsm t{1, {0, 0, 0, 0}};
    ModularDistances md(g, t);
    for (int u = 0; u < 4; ++u)
        for (int v = u; v < 4; ++v) {
            CHECK(md.d(u, v) == 0);
            CHECK(md.d_plus(u, v) == 0);
            CHECK(!md.is_big(u, v));
        }
}

TEST_CASE("tsm machinery rejects non-linear graphs") {
    WeightedGraph two_chains = gen_anbm(2, 2);
    Tsm t{2, {0, 0, 0, 0}};
    CHECK_THROWS_AS(ModularDistances(two_chains, t), SemanticError);
    CHECK_THROWS_AS(search_certificate(two_chains), SemanticError);
}

TEST_CASE("derived distances satisfy the slowly monotone characterization") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 6u);
        int M = 1 + static_cast<int>(rng() % 4u);
        WeightedGraph g;
        g.node_count = n;
        g.max_const = M;
        for (int i = 0; i + 1 < n; ++i) g.order_edges.push_back({i, i + 1});
        // random slowly monotone map
        Realization ts;
        long long cur = static_cast<int>(rng() % 3u);
        for (int i = 0; i < n; ++i) {
            ts.ts.push_back(Rat(cur * 10 + static_cast<int>(rng() % 10u), 10));
            cur += static_cast<int>(rng() % static_cast<unsigned>(M));
        }
        REQUIRE(is_slowly_monotone(g, ts));
        Tsm t = tsm_from_realization(M, ts);
        ModularDistances md(g, t);
        for (int u = 0; u < n; ++u)
            for (int v = u; v < n; ++v) {
                long long floor_diff =
                    ts.ts[static_cast<std::size_t>(v)].floor() -
                    ts.ts[static_cast<std::size_t>(u)].floor();
                CHECK(md.d_plus(u, v) == std::min<long long>(floor_diff, M));
                CHECK(md.is_big(u, v) == (md.d_plus(u, v) == M));
                if (!md.is_big(u, v)) CHECK(md.d_plus(u, v) == md.d(u, v));
            }
    }
}

TEST_CASE("weak satisfaction clause examples") {
    WeightedGraph g;
    g.node_count = 2;
    g.max_const = 2;
    g.order_edges = {{0, 1}};
    g.constraint_edges = {{0, Cmp::le, 0, 1}};
    CHECK(!weakly_satisfies(g, Tsm{2, {0, 1}})); // d = 1 > 0
    CHECK(weakly_satisfies(g, Tsm{2, {0, 0}}));

    WeightedGraph empty;
    empty.node_count = 3;
    empty.max_const = 2;
    empty.order_edges = {{0, 1}, {1, 2}};
    CHECK(weakly_satisfies(empty, Tsm{2, {1, 0, 1}}));

    CHECK_THROWS_AS(weakly_satisfies(g, Tsm{3, {0, 0}}), SemanticError);
}

TEST_CASE("fractional relation membership examples") {
    // cover pair with equal residues
    WeightedGraph g;
    g.node_count = 2;
    g.max_const = 2;
    g.order_edges = {{0, 1}};
    FracRelations fr = fractional_relations(g, Tsm{2, {1, 1}});
    CHECK(fr.geq_has(1, 0));
    CHECK(!fr.gt_has(1, 0));

    // tight strict forward edge
    g.constraint_edges = {{0, Cmp::lt, 1, 1}};
    fr = fractional_relations(g, Tsm{2, {0, 1}});
    CHECK(fr.geq_has(0, 1));
    CHECK(fr.gt_has(0, 1));
}

TEST_CASE("fractional relations nest on random instances") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        WeightedGraph g = random_linear_graph(rng, 5, 3, 5);
        Tsm t{g.max_const, {}};
        for (int i = 0; i < g.node_count; ++i)
            t.residues.push_back(static_cast<int>(rng() % static_cast<unsigned>(g.max_const)));
        FracRelations fr = fractional_relations(g, t);
        for (auto pr : fr.gt) CHECK(fr.geq_has(pr.first, pr.second));
    }
}

TEST_CASE("certificate check examples") {
    // forced fractional contradiction: (0,<,0,1) and (1,<=,0,0)
    WeightedGraph g;
    g.node_count = 2;
    g.max_const = 2;
    g.order_edges = {{0, 1}};
    g.constraint_edges = {{0, Cmp::lt, 0, 1}, {1, Cmp::le, 0, 0}};
    CHECK(!check_tsm_certificate(g, Tsm{2, {0, 0}}));
    CHECK(!search_certificate(g).has_value());
    CHECK(!is_realizable(check_realizable(g)));

    // closed variant is fine
    g.constraint_edges = {{0, Cmp::le, 0, 1}, {1, Cmp::le, 0, 0}};
    CHECK(check_tsm_certificate(g, Tsm{2, {0, 0}}));
    Realization ts = realization_from_certificate(g, Tsm{2, {0, 0}});
    CHECK(realizes(g, ts));
}

TEST_CASE("closed graphs reduce the certificate to weak satisfaction") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 150; ++trial) {
        WeightedGraph g = random_linear_graph(rng, 5, 3, 4);
        for (auto& e : g.constraint_edges) e.cmp = Cmp::le; // close it
        Tsm t{g.max_const, {}};
        for (int i = 0; i < g.node_count; ++i)
            t.residues.push_back(static_cast<int>(rng() % static_cast<unsigned>(g.max_const)));
        FracRelations fr = fractional_relations(g, t);
        CHECK(fr.gt.empty());
        CHECK(check_tsm_certificate(g, t) == weakly_satisfies(g, t));
    }
}

TEST_CASE("certificates from realizations validate") {
    WeightedGraph g = fixtures::five_node_graph();
    RealizeResult r = check_realizable(g);
    REQUIRE(is_realizable(r));
    Realization slow = slowly_monotone_normalize(g, std::get<Realization>(r));
    Tsm t = tsm_from_realization(g.max_const, slow);
    CHECK(weakly_satisfies(g, t)); // realizability implies weak satisfaction
    CHECK(check_tsm_certificate(g, t));
    Realization rebuilt = realization_from_certificate(g, t);
    CHECK(realizes(g, rebuilt));
}

TEST_CASE("certificate reconstruction base cases") {
    WeightedGraph g;
    g.node_count = 3;
    g.max_const = 2;
    g.order_edges = {{0, 1}, {1, 2}};
    Realization ts = realization_from_certificate(g, Tsm{2, {0, 0, 0}});
    CHECK(ts.ts == std::vector<Rat>{Rat(0), Rat(0), Rat(0)});

    CHECK_THROWS_AS(realization_from_certificate(
                        g, Tsm{3, {0, 0, 0}}),
                    SemanticError); // wrong modulus is not a certificate
}

TEST_CASE("certificate search agrees with the direct solver") {
    WeightedGraph g = fixtures::five_node_graph();
    auto cert = search_certificate(g);
    REQUIRE(cert.has_value());
    CHECK(check_tsm_certificate(g, *cert));
    CHECK(realizes(g, realization_from_certificate(g, *cert)));

    CHECK(!search_certificate(fixtures::five_node_graph(true)).has_value());

    WeightedGraph single;
    single.node_count = 1;
    single.max_const = 2;
    auto c1 = search_certificate(single);
    REQUIRE(c1.has_value());
    CHECK(c1->residues == std::vector<int>{0});
}

TEST_CASE("solver and certificate search agree on random instances") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 300; ++trial) {
        WeightedGraph g = random_linear_graph(rng, 5, 3, 5);
        bool direct = is_realizable(check_realizable(g));
        bool modular = search_certificate(g).has_value();
        CHECK(direct == modular);
        if (direct) {
            // realizability makes the derived residues weakly satisfying
            Realization slow =
                slowly_monotone_normalize(g, std::get<Realization>(check_realizable(g)));
            CHECK(weakly_satisfies(g, tsm_from_realization(g.max_const, slow)));
        }
    }
}

TEST_CASE("search respects the residue-space cap") {
    WeightedGraph g;
    g.node_count = 12;
    g.max_const = 16;
    for (int i = 0; i + 1 < g.node_count; ++i) g.order_edges.push_back({i, i + 1});
    CertificateSearchOptions opts;
    opts.max_maps = 1000;
    CHECK_THROWS_AS(search_certificate(g, opts), ResourceLimitError);
}
