#ifndef TCG_TEST_FIXTURES_HPP
#define TCG_TEST_FIXTURES_HPP

#include <string>

#include "tcg/analysis.hpp"
#include "tcg/formula_gen.hpp"
#include "tcg/graph.hpp"
#include "tcg/pdl.hpp"
#include "tcg/realizability.hpp"
#include "tcg/timed_system.hpp"

namespace fixtures {

// Six-node labeled graph with extra edges d, e, f, c used by the evaluation
// examples: labels {p,s},{q,s},{p,q},{r},{q},{q,s}.
inline tcg::LabeledGraph example_graph() {
    tcg::LabeledGraph g;
    g.node_count = 6;
    g.labels = {{"p", "s"}, {"q", "s"}, {"p", "q"}, {"r"}, {"q"}, {"q", "s"}};
    for (int i = 0; i + 1 < 6; ++i) g.edges.push_back({i, tcg::kSuccSymbol, i + 1});
    g.edges.push_back({2, "d", 5});
    g.edges.push_back({0, "e", 3});
    g.edges.push_back({3, "f", 5});
    g.edges.push_back({2, "c", 0});
    g.normalize();
    return g;
}

// Five-node realizable linear weighted graph (two clocks, M = 7); changing
// the <=6 edge to <=5 makes it non-realizable with a 4-node negative cycle.
inline tcg::WeightedGraph five_node_graph(bool tightened = false) {
    tcg::WeightedGraph g;
    g.node_count = 5;
    g.max_const = 7;
    for (int i = 0; i + 1 < 5; ++i) g.order_edges.push_back({i, i + 1});
    g.constraint_edges = {
        {0, tcg::Cmp::lt, 4, 1},  {1, tcg::Cmp::le, -3, 0}, {2, tcg::Cmp::lt, -2, 1},
        {0, tcg::Cmp::le, tightened ? 5 : 6, 3},
        {3, tcg::Cmp::le, 3, 4},  {4, tcg::Cmp::lt, -1, 3},
    };
    g.normalize();
    return g;
}

// Large-gap example: M = 3, five nodes, four constraints; ts = (0, 0.2, 3.1,
// 3.8, 5.2) realizes it but is not slowly monotone.
inline tcg::WeightedGraph gap_graph() {
    tcg::WeightedGraph g;
    g.node_count = 5;
    g.max_const = 3;
    for (int i = 0; i + 1 < 5; ++i) g.order_edges.push_back({i, i + 1});
    g.constraint_edges = {{2, tcg::Cmp::lt, -2, 0},
                          {2, tcg::Cmp::le, -1, 1},
                          {2, tcg::Cmp::le, 1, 3},
                          {4, tcg::Cmp::lt, -2, 2}};
    g.normalize();
    return g;
}

inline tcg::Realization gap_realization() {
    return {{tcg::Rat(0), tcg::Rat(1, 5), tcg::Rat(31, 10), tcg::Rat(19, 5), tcg::Rat(26, 5)}};
}

// Ten-position run over one queue with guards, ages and diagonals; the
// weighted graph read off it has exactly nine constraint edges.
inline tcg::SystemAutomaton queue_run_system() {
    tcg::SystemAutomaton a;
    a.clocks = {"x", "y"};
    a.ds["d"] = tcg::DsKind::queue;
    a.max_const = 7;
    a.states = {"s0", "s1"};
    a.initial = "s0";
    a.finals = {"s1"};
    // one permissive self-loop automaton: shapes are driven by the run below
    tcg::SystemAutomaton::Transition start;
    start.from = "s0";
    start.label = {tcg::ins_nop(), tcg::ins_reset("x"), tcg::ins_reset("y")};
    start.to = "s1";
    a.transitions.push_back(start);
    return a;
}

inline tcg::Run timed_queue_run() {
    using namespace tcg;
    Run run;
    run.instructions = {
        {ins_nop(), ins_reset("x"), ins_reset("y")},
        {ins_write("d"), ins_guard_upper("x", Cmp::le, 0), ins_guard_lower("x", Cmp::le, 0)},
        {ins_nop(), ins_reset("y")},
        {ins_write("d"), ins_guard_upper("y", Cmp::le, 1)},
        {ins_read("d"), ins_diag_dx_low("d", "y", Cmp::lt, 2)},
        {ins_nop(), ins_reset("x")},
        {ins_write("d")},
        {ins_read("d"), ins_age_lower("d", Cmp::lt, 4), ins_age_upper("d", Cmp::le, 5),
         ins_guard_lower("x", Cmp::le, 2)},
        {ins_nop(), ins_diag_cc("y", "x", Cmp::lt, 6)},
        {ins_read("d"), ins_diag_xd("x", "d", Cmp::lt, 3)},
    };
    return run;
}

// The nine constraint edges read off the weighted-graph drawing of that run.
inline std::vector<tcg::ConstraintEdge> timed_queue_expected_edges() {
    using tcg::Cmp;
    return {{0, Cmp::le, 0, 1}, {1, Cmp::le, 0, 0},  {2, Cmp::lt, -2, 1},
            {2, Cmp::le, 1, 3}, {2, Cmp::lt, 6, 5},  {3, Cmp::le, 5, 7},
            {7, Cmp::lt, -4, 3}, {5, Cmp::lt, 3, 6}, {7, Cmp::le, -2, 5}};
}

// Renaming run: the value of x1 flows through d1, x2, d2 into x4; checking
// x3 < 3 and x4 < 4 yields edges (1,<,3,4) and (0,<,4,5).
inline tcg::SystemAutomaton renaming_system_shell() {
    tcg::SystemAutomaton a;
    a.clocks = {"x1", "x2", "x3", "x4"};
    a.ds["d1"] = tcg::DsKind::stack;
    a.ds["d2"] = tcg::DsKind::stack;
    a.max_const = 5;
    a.states = {"s0", "s1"};
    a.initial = "s0";
    a.finals = {"s1"};
    tcg::SystemAutomaton::Transition start;
    start.from = "s0";
    start.label = {tcg::ins_nop(), tcg::ins_reset("x1"), tcg::ins_reset("x2"),
                   tcg::ins_reset("x3"), tcg::ins_reset("x4")};
    start.to = "s1";
    a.transitions.push_back(start);
    // mark renaming usage so builders take the tracking route
    tcg::SystemAutomaton::Transition rename_probe;
    rename_probe.from = "s1";
    rename_probe.label = {tcg::ins_nop(), tcg::ins_rename_cc("x1", "x1"),
                          tcg::ins_rename_cc("x2", "x2"), tcg::ins_rename_cc("x3", "x3"),
                          tcg::ins_rename_cc("x4", "x4")};
    rename_probe.to = "s1";
    a.transitions.push_back(rename_probe);
    return a;
}

inline tcg::Run renaming_run() {
    using namespace tcg;
    Run run;
    run.instructions = {
        {ins_nop(), ins_reset("x1"), ins_reset("x2"), ins_reset("x3"), ins_reset("x4")},
        {ins_write("d1"), ins_rename_dc("d1", "x1"), ins_reset("x2")},
        {ins_read("d1"), ins_rename_cd("x2", "d1"), ins_reset("x1"), ins_rename_cc("x4", "x2")},
        {ins_write("d2"), ins_rename_dc("d2", "x2"), ins_reset("x2"), ins_rename_cc("x3", "x4")},
        {ins_read("d2"), ins_rename_cd("x4", "d2"), ins_guard_upper("x3", Cmp::lt, 3)},
        {ins_nop(), ins_guard_upper("x4", Cmp::lt, 4)},
    };
    return run;
}

// --- example systems for enumeration-based campaigns ------------------------

// Stack system: push freely, first pop young (d < 1), later pops old and
// bounded (2 < d, x <= 2).  Runs with a single push are feasible; more
// pushes force a strict contradiction.
inline tcg::SystemAutomaton stack_system() {
    using namespace tcg;
    SystemAutomaton a;
    a.clocks = {"x"};
    a.ds["d"] = DsKind::stack;
    a.max_const = 3;
    a.states = {"s0", "q1", "q2"};
    a.initial = "s0";
    a.finals = {"q2"};
    a.transitions.push_back({"s0", {ins_nop(), ins_reset("x")}, "q1"});
    a.transitions.push_back({"q1", {ins_write("d")}, "q1"});
    a.transitions.push_back({"q1", {ins_read("d"), ins_age_upper("d", Cmp::lt, 1)}, "q2"});
    a.transitions.push_back(
        {"q2", {ins_read("d"), ins_age_lower("d", Cmp::lt, 2), ins_guard_upper("x", Cmp::le, 2)},
         "q2"});
    return a;
}

// Queue system: writes at least 1 apart (guard on y), first read young,
// later reads old but the whole run bounded by x <= 3.
inline tcg::SystemAutomaton queue_system() {
    using namespace tcg;
    SystemAutomaton a;
    a.clocks = {"x", "y"};
    a.ds["c"] = DsKind::queue;
    a.max_const = 4;
    a.states = {"s0", "p1", "p2"};
    a.initial = "s0";
    a.finals = {"p2"};
    a.transitions.push_back({"s0", {ins_nop(), ins_reset("x"), ins_reset("y")}, "p1"});
    a.transitions.push_back(
        {"p1", {ins_write("c"), ins_guard_lower("y", Cmp::le, 1), ins_reset("y")}, "p1"});
    a.transitions.push_back({"p1", {ins_read("c"), ins_age_upper("c", Cmp::lt, 1)}, "p2"});
    a.transitions.push_back(
        {"p2", {ins_read("c"), ins_age_lower("c", Cmp::lt, 2), ins_guard_upper("x", Cmp::le, 3)},
         "p2"});
    return a;
}

// Stack + queue with an event clock: the h message must see an `a` within 2;
// one pop alternative is a strict contradiction (2 < g with x <= 1).
inline tcg::SystemAutomaton mixed_system() {
    using namespace tcg;
    SystemAutomaton a;
    a.clocks = {"x"};
    a.ds["g"] = DsKind::stack;
    a.ds["h"] = DsKind::queue;
    a.props = {"a"};
    a.max_const = 3;
    a.states = {"s0", "m1", "m2", "m3"};
    a.initial = "s0";
    a.finals = {"m3"};
    a.transitions.push_back({"s0", {ins_nop(), ins_reset("x")}, "m1"});
    a.transitions.push_back({"m1", {ins_write("g")}, "m1"});
    a.transitions.push_back({"m1", {ins_write("h"), ins_event_upper("a", Cmp::le, 2)}, "m2"});
    a.transitions.push_back({"m2", {ins_read("g"), ins_age_upper("g", Cmp::le, 1)}, "m2"});
    a.transitions.push_back(
        {"m2", {ins_read("g"), ins_age_lower("g", Cmp::lt, 2), ins_guard_upper("x", Cmp::le, 1)},
         "m2"});
    a.transitions.push_back(
        {"m2", {ins_read("h"), ins_prop("a"), ins_age_lower("h", Cmp::le, 1)}, "m3"});
    return a;
}

// Small renaming system for enumeration tests: a value hops through the
// stack and is checked after the read.
inline tcg::SystemAutomaton renaming_system() {
    using namespace tcg;
    SystemAutomaton a;
    a.clocks = {"x", "z"};
    a.ds["e"] = DsKind::stack;
    a.max_const = 3;
    a.states = {"s0", "r1", "r2", "r3"};
    a.initial = "s0";
    a.finals = {"r3"};
    a.transitions.push_back({"s0", {ins_nop(), ins_reset("x"), ins_reset("z")}, "r1"});
    a.transitions.push_back(
        {"r1", {ins_write("e"), ins_rename_dc("e", "x"), ins_reset("x")}, "r2"});
    a.transitions.push_back({"r2", {ins_read("e"), ins_rename_cd("z", "e")}, "r3"});
    a.transitions.push_back({"r3", {ins_nop(), ins_guard_upper("z", Cmp::le, 2)}, "r3"});
    return a;
}

inline std::string data_path(const std::string& name) {
    return std::string(TCG_TEST_DATA_DIR) + "/" + name;
}

} // namespace fixtures

#endif
