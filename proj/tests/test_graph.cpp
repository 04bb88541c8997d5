#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "tcg/graph.hpp"

using namespace tcg;

TEST_CASE("validation accepts the empty cases") {
    LabeledGraph g;
    g.node_count = 1;
    g.labels = {{}};
    CHECK(validate(g).empty());

    WeightedGraph w;
    w.node_count = 1;
    CHECK(validate(w).empty());
}

TEST_CASE("weight at the maximal constant is rejected") {
    WeightedGraph g;
    g.node_count = 2;
    g.max_const = 3;
    g.order_edges = {{0, 1}};
    g.constraint_edges = {{0, Cmp::le, 3, 1}};
    auto ds = validate(g);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].message.find("weight out of range") != std::string::npos);
}

TEST_CASE("two succ chains are flagged as non-linear") {
    LabeledGraph g;
    g.node_count = 4;
    g.labels.assign(4, {});
    g.edges = {{0, kSuccSymbol, 1}, {2, kSuccSymbol, 3}};
    auto ds = validate(g);
    REQUIRE(!ds.empty());
    CHECK(ds[0].message.find("not") != std::string::npos);
}

TEST_CASE("edge out of node range is a semantic error at parse time") {
    CHECK_THROWS_AS(parse_labeled_graph(R"({"nodes":2,"labels":[[],[]],
        "edges":[[0,"succ",2]]})"),
                    SemanticError);
}

TEST_CASE("malformed comparator token is a syntax error") {
    CHECK_THROWS_AS(parse_weighted_graph(R"({"nodes":2,"order":[[0,1]],
        "constraints":[[0,"=<",1,1]]})"),
                    ParseError);
}

TEST_CASE("weighted graph parse defaults M to 1 + max|w|") {
    WeightedGraph g = parse_weighted_graph(R"({"nodes":3,"order":[[0,1],[1,2]],
        "constraints":[[0,"<",4,1],[2,"<=",-2,0]]})");
    CHECK(g.max_const == 5);
    CHECK(g.is_linear());
}

TEST_CASE("serialization round-trips the five-node graph") {
    WeightedGraph g = fixtures::five_node_graph();
    CHECK(parse_weighted_graph(serialize(g)) == g);
    // the serialized form is canonical: dumping it again is the identity
    std::string doc = serialize(g);
    CHECK(serialize(parse_weighted_graph(doc)) == doc);
}

TEST_CASE("labeled graph round-trip uses the ds: edge prefix") {
    LabeledGraph g = fixtures::example_graph();
    std::string doc = serialize(g);
    CHECK(doc.find("ds:d") != std::string::npos);
    CHECK(parse_labeled_graph(doc) == g);
    CHECK(serialize(parse_labeled_graph(doc)) == doc);
}

TEST_CASE("round-trip property on random graphs") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        LabeledGraph g;
        g.node_count = 1 + static_cast<int>(rng() % 5);
        g.labels.assign(static_cast<std::size_t>(g.node_count), {});
        for (auto& ls : g.labels)
            for (const char* p : {"p", "q", "r"})
                if (rng() % 2) ls.push_back(p);
        for (int i = 0; i + 1 < g.node_count; ++i) g.edges.push_back({i, kSuccSymbol, i + 1});
        for (int k = 0; k < 3; ++k) {
            int u = static_cast<int>(rng() % static_cast<unsigned>(g.node_count));
            int v = static_cast<int>(rng() % static_cast<unsigned>(g.node_count));
            g.edges.push_back({u, rng() % 2 ? "d1" : "d2", v});
        }
        g.normalize();
        REQUIRE(validate(g).empty());
        CHECK(parse_labeled_graph(serialize(g)) == g);

        WeightedGraph w;
        w.node_count = g.node_count;
        w.max_const = 3;
        for (int i = 0; i + 1 < w.node_count; ++i) w.order_edges.push_back({i, i + 1});
        for (int k = 0; k < 4; ++k) {
            int u = static_cast<int>(rng() % static_cast<unsigned>(w.node_count));
            int v = static_cast<int>(rng() % static_cast<unsigned>(w.node_count));
            if (u == v) continue;
            w.constraint_edges.push_back(
                {u, rng() % 2 ? Cmp::lt : Cmp::le, static_cast<int>(rng() % 5) - 2, v});
        }
        w.normalize();
        REQUIRE(validate(w).empty());
        CHECK(parse_weighted_graph(serialize(w)) == w);
    }
}

TEST_CASE("project intersects the label sets") {
    LabeledGraph g = fixtures::example_graph();

    LabeledGraph none = project(g, {});
    for (const auto& ls : none.labels) CHECK(ls.empty());
    CHECK(none.edges == g.edges);

    LabeledGraph all = project(g, g.label_alphabet());
    CHECK(all == g);

    LabeledGraph only_p = project(g, {"p"});
    CHECK(only_p.labels[0] == std::vector<std::string>{"p"});
    CHECK(only_p.labels[2] == std::vector<std::string>{"p"});
    for (int v : {1, 3, 4, 5}) CHECK(only_p.labels[static_cast<std::size_t>(v)].empty());
}

TEST_CASE("project is idempotent and monotone") {
    LabeledGraph g = fixtures::example_graph();
    std::vector<std::set<std::string>> keeps = {
        {}, {"p"}, {"q", "s"}, {"p", "q", "r", "s"}, {"r", "s"}};
    for (const auto& A : keeps)
        for (const auto& B : keeps) {
            std::set<std::string> meet;
            for (const auto& x : A)
                if (B.count(x)) meet.insert(x);
            CHECK(project(project(g, A), B) == project(g, meet));
        }
}

TEST_CASE("realizes checks strictness and monotonicity") {
    WeightedGraph g = fixtures::five_node_graph();
    Realization good{{Rat(0), Rat(7, 2), Rat(6), Rat(6), Rat(15, 2)}};
    CHECK(realizes(g, good));

    Realization strict_violated = good;
    strict_violated.ts[1] = Rat(4); // edge (0,<,4,1) needs ts1 - ts0 < 4
    CHECK(!realizes(g, strict_violated));

    Realization nonmonotone = good;
    nonmonotone.ts[3] = Rat(5);
    CHECK(!realizes(g, nonmonotone));
}

TEST_CASE("weighted graphs convert to labeled form and back") {
    WeightedGraph g = fixtures::five_node_graph();
    LabeledGraph l = to_labeled(g);
    CHECK(l.edges_with(kSuccSymbol).size() == 4);
    CHECK(weighted_from_labeled(l, g.max_const) == g);
}

TEST_CASE("dot output names every node") {
    WeightedGraph g = fixtures::five_node_graph();
    std::string dot = to_dot(g);
    for (int v = 0; v < g.node_count; ++v)
        CHECK(dot.find("n" + std::to_string(v)) != std::string::npos);
    CHECK(dot.find("<=6") != std::string::npos);
}
