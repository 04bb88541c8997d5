#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "fixtures.hpp"
#include "tcg/pdl.hpp"

using namespace tcg;

namespace {

PathPtr succ() { return p_edge(kSuccSymbol); }

EvalOptions wide_options() {
    EvalOptions o;
    o.sigma = std::set<std::string>{"p", "q", "r", "s"};
    o.gamma = std::set<std::string>{kSuccSymbol, "c", "d", "e", "f"};
    return o;
}

} // namespace

TEST_CASE("state formula examples on the six-node graph") {
    LabeledGraph g = fixtures::example_graph();

    StatePtr reach_r = s_exists_path(
        p_star(p_seq({p_test(s_or({s_prop("p"), s_prop("q")})), succ()})), s_prop("r"));
    auto sat = eval_state(g, reach_r);
    CHECK(sat.count(0) == 1);
    CHECK(eval_sentence(g, sen_e(reach_r)));

    CHECK(eval_state(g, s_top()).size() == 6);

    StatePtr next_ps = s_exists_path(succ(), s_and({s_prop("p"), s_prop("s")}));
    CHECK(eval_state(g, next_ps).empty());
    CHECK(eval_sentence(g, sen_not(sen_e(next_ps))));
}

TEST_CASE("path formula examples on the six-node graph") {
    LabeledGraph g = fixtures::example_graph();

    PathPtr pi = p_seq({p_test(s_prop("s")), p_edge("e"), p_test(s_prop("r")), p_edge("f"),
                        p_test(s_prop("s")), p_edge_inv("d"), p_edge("c")});
    auto rel = eval_path(g, pi);
    CHECK(rel.count({0, 0}) == 1);
    CHECK(eval_sentence(g, sen_e(s_exists_path(pi, s_prop("p")))));

    auto id = eval_path(g, p_test(s_top()));
    CHECK(id.size() == 6);
    for (int v = 0; v < 6; ++v) CHECK(id.count({v, v}) == 1);

    PathPtr pd = p_seq({p_test(s_prop("p")), p_edge("d")});
    CHECK(!eval_sentence(g, sen_e(s_exists_path(pd, s_prop("r")))));
}

TEST_CASE("sentence examples") {
    LabeledGraph g = fixtures::example_graph();
    CHECK(eval_sentence(g, sen_e(s_top())));

    std::vector<StatePtr> loops;
    for (std::string d1 : {"c", "d", "e", "f"})
        for (std::string d2 : {"c", "d", "e", "f"})
            if (d1 != d2) loops.push_back(s_loop(p_seq({p_edge(d1), p_inv(p_edge(d2))})));
    CHECK(!eval_sentence(g, sen_e(s_or(loops))));

    LabeledGraph one;
    one.node_count = 1;
    one.labels = {{}};
    CHECK(!eval_sentence(one, sen_not(sen_e(s_top()))));
}

TEST_CASE("undeclared symbols are evaluation errors") {
    LabeledGraph g = fixtures::example_graph();
    CHECK_THROWS_AS(eval_state(g, s_prop("zz")), EvalError);
    CHECK_THROWS_AS(eval_path(g, p_edge("zz")), EvalError);
    CHECK_THROWS_AS(eval_path(g, p_auto("nobody", "a", "b")), EvalError);
}

TEST_CASE("loop is the diagonal of the path relation") {
    LabeledGraph g = fixtures::example_graph();
    PathPtr pi = p_seq({p_edge("d"), p_inv(succ()), p_inv(p_edge("e")), p_star(succ())});
    auto rel = eval_path(g, pi);
    auto looping = eval_state(g, s_loop(pi));
    for (int v = 0; v < g.node_count; ++v)
        CHECK((looping.count(v) == 1) == (rel.count({v, v}) == 1));
}

TEST_CASE("automaton atoms denote product reachability") {
    // two states hopping along succ; q0 -> q1 on d
    TrackingAutomaton A;
    A.states = {"q0", "q1"};
    A.transitions.push_back({"q0", succ(), "q0"});
    A.transitions.push_back({"q0", p_edge("d"), "q1"});
    A.transitions.push_back({"q1", succ(), "q1"});
    AutoRegistry reg;
    reg.emplace("hop", A);
    EvalOptions opts = wide_options();
    opts.autos = &reg;

    LabeledGraph g = fixtures::example_graph();
    auto rel = eval_path(g, p_auto("hop", "q0", "q1"), opts);
    // must pass the single d edge (2,5): reachable pairs are u<=2, v>=5
    for (int u = 0; u < 6; ++u)
        for (int v = 0; v < 6; ++v)
            CHECK(rel.count({u, v}) == static_cast<std::size_t>(u <= 2 && v >= 5));
    auto self = eval_path(g, p_auto("hop", "q1", "q1"), opts);
    for (int v = 0; v < 6; ++v) CHECK(self.count({v, v}) == 1); // zero-step runs
}

namespace {

using PairSet = std::set<std::pair<int, int>>;

PairSet compose(const PairSet& a, const PairSet& b) {
    PairSet out;
    for (auto [u, v] : a)
        for (auto [x, y] : b)
            if (v == x) out.insert({u, y});
    return out;
}

// reflexive-transitive closure by bounded matrix powers, independent of the
// evaluator's iterated squaring
PairSet closure_oracle(const PairSet& r, int n) {
    PairSet acc;
    for (int v = 0; v < n; ++v) acc.insert({v, v});
    PairSet power = acc;
    for (int k = 0; k < n + 1; ++k) {
        power = compose(power, r);
        std::size_t before = acc.size();
        acc.insert(power.begin(), power.end());
        if (acc.size() == before) break;
    }
    return acc;
}

LabeledGraph random_graph(std::mt19937& rng, int max_nodes) {
    LabeledGraph g;
    g.node_count = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_nodes));
    g.labels.assign(static_cast<std::size_t>(g.node_count), {});
    for (auto& ls : g.labels) {
        if (rng() % 2) ls.push_back("p");
        if (rng() % 2) ls.push_back("q");
    }
    for (int i = 0; i + 1 < g.node_count; ++i) g.edges.push_back({i, kSuccSymbol, i + 1});
    for (int k = 0; k < 3; ++k)
        g.edges.push_back(
            {static_cast<int>(rng() % static_cast<unsigned>(g.node_count)), "d",
             static_cast<int>(rng() % static_cast<unsigned>(g.node_count))});
    g.normalize();
    return g;
}

PathPtr random_path(std::mt19937& rng, int depth) {
    if (depth == 0) {
        switch (rng() % 3) {
            case 0: return p_edge(kSuccSymbol);
            case 1: return p_edge("d");
            default: return p_test(rng() % 2 ? s_prop("p") : s_not(s_prop("q")));
        }
    }
    switch (rng() % 5) {
        case 0: return p_alt({random_path(rng, depth - 1), random_path(rng, depth - 1)});
        case 1: return p_seq({random_path(rng, depth - 1), random_path(rng, depth - 1)});
        case 2: return p_star(random_path(rng, depth - 1));
        case 3: return p_inv(random_path(rng, depth - 1));
        default: return p_cap(random_path(rng, depth - 1), random_path(rng, depth - 1));
    }
}

} // namespace

TEST_CASE("star matches the matrix-power closure oracle") {
    std::mt19937 rng(11);
    EvalOptions opts = wide_options();
    for (int trial = 0; trial < 80; ++trial) {
        LabeledGraph g = random_graph(rng, 6);
        PathPtr pi = random_path(rng, 2);
        PairSet base = eval_path(g, pi, opts);
        PairSet star = eval_path(g, p_star(pi), opts);
        CHECK(star == closure_oracle(base, g.node_count));
    }
}

TEST_CASE("alternation only grows the denotation") {
    std::mt19937 rng(12);
    EvalOptions opts = wide_options();
    for (int trial = 0; trial < 60; ++trial) {
        LabeledGraph g = random_graph(rng, 6);
        PathPtr a = random_path(rng, 2);
        PathPtr b = random_path(rng, 2);
        PairSet ra = eval_path(g, a, opts);
        PairSet rab = eval_path(g, p_alt({a, b}), opts);
        for (auto pr : ra) CHECK(rab.count(pr) == 1);
    }
}

TEST_CASE("eval_eq base cases") {
    LabeledGraph g = fixtures::example_graph();

    EQSentence some_p;
    some_p.props = {"w"};
    some_p.body = sen_e(s_prop("w"));
    auto r = eval_eq(g, some_p);
    REQUIRE(r.holds);
    int labeled = 0;
    for (int v = 0; v < g.node_count; ++v)
        labeled += static_cast<int>(!r.witness->labels_of(v).empty());
    CHECK(labeled == 1);

    LabeledGraph one;
    one.node_count = 1;
    one.labels = {{}};
    EQSentence contradiction;
    contradiction.props = {"w"};
    contradiction.body = sen_and({sen_e(s_prop("w")), sen_e(s_not(s_prop("w")))});
    CHECK(!eval_eq(one, contradiction).holds);
}

TEST_CASE("eval_eq with no props equals eval_sentence") {
    std::mt19937 rng(13);
    EvalOptions opts = wide_options();
    for (int trial = 0; trial < 40; ++trial) {
        LabeledGraph g = random_graph(rng, 5);
        SentencePtr phi = sen_e(s_exists_path(random_path(rng, 2), s_prop("p")));
        EQSentence closed;
        closed.body = phi;
        EvalEqOptions eopts;
        eopts.base = opts;
        CHECK(eval_eq(g, closed, eopts).holds == eval_sentence(g, phi, opts));
    }
}

TEST_CASE("eval_eq respects the prop cap") {
    LabeledGraph g = fixtures::example_graph();
    EQSentence f;
    for (int i = 0; i < 30; ++i) f.props.push_back("w" + std::to_string(i));
    f.body = sen_e(s_top());
    CHECK_THROWS_AS(eval_eq(g, f), ResourceLimitError);
}

TEST_CASE("intersection width follows the inductive definition") {
    CHECK(intersection_width(p_edge(kSuccSymbol)) == 1);
    CHECK(intersection_width(p_test(s_top())) == 1);
    PathPtr atom = p_edge(kSuccSymbol);
    CHECK(intersection_width(p_cap(p_cap(atom, atom), atom)) == 3);
    CHECK(intersection_width(p_seq({p_cap(atom, atom), atom})) == 2);
    CHECK(intersection_width(p_star(p_cap(atom, atom))) == 2);
}

TEST_CASE("backward translation with the identity interpretation") {
    Interpretation ident;
    ident.state_defs["p"] = s_prop("p");
    ident.state_defs["q"] = s_prop("q");
    ident.path_defs[kSuccSymbol] = p_edge(kSuccSymbol);
    ident.path_defs["d"] = p_edge("d");

    EQSentence f;
    f.props = {"w"};
    f.body = sen_e(s_and({s_prop("w"), s_exists_path(p_star(p_edge(kSuccSymbol)), s_prop("p"))}));
    EQSentence g = backward_translate(f, ident);
    CHECK(equal(f, g));
}

TEST_CASE("backward translation errors on missing symbols") {
    Interpretation empty;
    EQSentence f;
    f.body = sen_e(s_prop("p"));
    CHECK_THROWS_AS(backward_translate(f, empty), SemanticError);
}

namespace {

StatePtr random_state(std::mt19937& rng, int depth, const std::vector<std::string>& props,
                      const std::vector<std::string>& edges);

PathPtr random_path_over(std::mt19937& rng, int depth, const std::vector<std::string>& props,
                         const std::vector<std::string>& edges) {
    if (depth == 0) {
        if (rng() % 2) return p_edge(edges[rng() % edges.size()]);
        return p_test(random_state(rng, 0, props, edges));
    }
    switch (rng() % 4) {
        case 0:
            return p_alt({random_path_over(rng, depth - 1, props, edges),
                          random_path_over(rng, depth - 1, props, edges)});
        case 1:
            return p_seq({random_path_over(rng, depth - 1, props, edges),
                          random_path_over(rng, depth - 1, props, edges)});
        case 2: return p_star(random_path_over(rng, depth - 1, props, edges));
        default: return p_inv(random_path_over(rng, depth - 1, props, edges));
    }
}

StatePtr random_state(std::mt19937& rng, int depth, const std::vector<std::string>& props,
                      const std::vector<std::string>& edges) {
    if (depth == 0) {
        if (rng() % 3 == 0) return s_top();
        return s_prop(props[rng() % props.size()]);
    }
    switch (rng() % 3) {
        case 0:
            return s_or({random_state(rng, depth - 1, props, edges),
                         random_state(rng, depth - 1, props, edges)});
        case 1: return s_not(random_state(rng, depth - 1, props, edges));
        default:
            return s_exists_path(random_path_over(rng, depth - 1, props, edges),
                                 random_state(rng, depth - 1, props, edges));
    }
}

} // namespace

TEST_CASE("backward translation commutes with evaluation") {
    std::mt19937 rng(17);
    std::vector<std::string> src_props = {"p", "q"};
    std::vector<std::string> tgt_props = {"P", "Q"};
    std::vector<std::string> tgt_edges = {"A", "B"};

    EvalOptions src_opts;
    src_opts.sigma = std::set<std::string>{"p", "q"};
    src_opts.gamma = std::set<std::string>{kSuccSymbol, "d"};
    EvalOptions tgt_opts;
    tgt_opts.sigma = std::set<std::string>{"P", "Q"};
    tgt_opts.gamma = std::set<std::string>{"A", "B"};

    for (int trial = 0; trial < 40; ++trial) {
        LabeledGraph g = random_graph(rng, 5);

        Interpretation I;
        I.state_defs["P"] = random_state(rng, 2, src_props, {kSuccSymbol, "d"});
        I.state_defs["Q"] = random_state(rng, 2, src_props, {kSuccSymbol, "d"});
        I.path_defs["A"] = random_path_over(rng, 2, src_props, {kSuccSymbol, "d"});
        I.path_defs["B"] = random_path_over(rng, 1, src_props, {kSuccSymbol, "d"});

        EQSentence f;
        f.props = {"w"};
        StatePtr body = random_state(rng, 2, {"P", "Q", "w"}, {"A", "B"});
        f.body = sen_e(s_and(
            {s_exists_path(random_path_over(rng, 2, {"P", "Q", "w"}, {"A", "B"}), body),
             s_or({s_prop("w"), s_not(s_prop("w"))})}));

        LabeledGraph interpreted = apply_interpretation(g, I, src_opts);
        EQSentence translated = backward_translate(f, I);

        EvalEqOptions left;
        left.base = tgt_opts;
        EvalEqOptions right;
        right.base = src_opts;
        CHECK(eval_eq(interpreted, f, left).holds == eval_eq(g, translated, right).holds);
        CHECK(intersection_width(f) == intersection_width(translated));
    }
}

TEST_CASE("backward translation size bound") {
    Interpretation I;
    I.state_defs["P"] = s_or({s_prop("p"), s_prop("q")});
    I.path_defs["A"] = p_seq({p_edge(kSuccSymbol), p_edge("d")});
    EQSentence f;
    f.body = sen_e(s_exists_path(p_star(p_edge("A")), s_prop("P")));
    EQSentence g = backward_translate(f, I);
    std::size_t max_def = std::max(formula_size(sen_e(I.state_defs["P"])),
                                   formula_size(sen_e(s_diamond(I.path_defs["A"]))));
    CHECK(formula_size(g) <= formula_size(f) * max_def);
}

TEST_CASE("apply_interpretation materializes denotations") {
    LabeledGraph g = fixtures::example_graph();

    Interpretation succ_only;
    succ_only.path_defs[kSuccSymbol] = p_edge(kSuccSymbol);
    LabeledGraph s = apply_interpretation(g, succ_only);
    CHECK(s.node_count == g.node_count);
    CHECK(s.edges.size() == 5);
    for (const auto& e : s.edges) CHECK(e.symbol == kSuccSymbol);
    for (const auto& ls : s.labels) CHECK(ls.empty());

    Interpretation empty;
    LabeledGraph e = apply_interpretation(g, empty);
    CHECK(e.node_count == g.node_count);
    CHECK(e.edges.empty());
}

TEST_CASE("s-expression round trips") {
    std::vector<std::string> docs = {
        "(E (top))",
        "(not (E (prop p)))",
        "(and (E (prop p)) (not (E (prop q))))",
        "(E (ex-path (seq (test (prop p)) (edge succ)) (prop r)))",
        "(E (loop (cap (edge d) (star (inv (edge succ))))))",
        "(exists (w1 w2) (or (E (prop w1)) (E (prop w2))))",
        "(E (ex-path (alt) (top)))",
        "(E (ex-path (auto track q_x q_y) (top)))",
    };
    for (const auto& doc : docs) {
        EQSentence f = parse_eq_sentence(doc);
        CHECK(print_sexpr(f) == doc);
        CHECK(equal(parse_eq_sentence(print_sexpr(f)), f));
    }
}

TEST_CASE("generated formulas survive print/parse") {
    for (int M : {1, 2, 3}) {
        EQSentence f = gen_mixed_realizability(M).sentence;
        CHECK(equal(parse_eq_sentence(print_sexpr(f)), f));
    }
    EQSentence sys = gen_system_formula(fixtures::stack_system());
    CHECK(equal(parse_eq_sentence(print_sexpr(sys)), sys));
    EQSentence empt = gen_emptiness_formula(fixtures::renaming_system());
    CHECK(equal(parse_eq_sentence(print_sexpr(empt)), empt)); // includes with-autos
}

TEST_CASE("parser reports positions") {
    try {
        parse_eq_sentence("(E\n  (unknown-form))");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_eq_sentence("(E (top)"), ParseError);
    CHECK_THROWS_AS(parse_eq_sentence("(E (top)) junk"), ParseError);
}
