#ifndef TCG_GRAPH_HPP
#define TCG_GRAPH_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcg/diagnostics.hpp"
#include "tcg/rational.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Labeled graphs: finite node- and edge-labeled graphs with an optional
// "succ" edge symbol whose edges must form a single simple path covering
// every node.  Nodes are 0-based dense indices.
// ---------------------------------------------------------------------------

extern const std::string kSuccSymbol; // "succ"

struct LabeledEdge {
    int src;
    std::string symbol;
    int dst;

    friend bool operator==(const LabeledEdge& a, const LabeledEdge& b) {
        return a.src == b.src && a.symbol == b.symbol && a.dst == b.dst;
    }
    friend bool operator<(const LabeledEdge& a, const LabeledEdge& b) {
        if (a.src != b.src) return a.src < b.src;
        if (a.symbol != b.symbol) return a.symbol < b.symbol;
        return a.dst < b.dst;
    }
};

struct LabeledGraph {
    int node_count = 0;
    std::vector<std::vector<std::string>> labels; // per node, kept sorted+unique
    std::vector<LabeledEdge> edges;               // kept sorted+unique by normalize()

    void normalize();
    bool has_label(int v, const std::string& p) const;
    std::vector<std::pair<int, int>> edges_with(const std::string& symbol) const;
    std::set<std::string> label_alphabet() const;
    std::set<std::string> edge_alphabet() const;

    friend bool operator==(const LabeledGraph& a, const LabeledGraph& b) {
        return a.node_count == b.node_count && a.labels == b.labels && a.edges == b.edges;
    }
};

// ---------------------------------------------------------------------------
// Weighted constraint graphs.  A constraint edge (u, cmp, w, v) asserts
// ts(v) - ts(u) cmp w.  Order edges are the cover relation of the node
// order: (u, v) asserts ts(u) <= ts(v).  Linear graphs have exactly the
// chain 0 -> 1 -> ... -> n-1 as order edges.
// ---------------------------------------------------------------------------

enum class Cmp { lt, le };

inline const char* cmp_str(Cmp c) { return c == Cmp::lt ? "<" : "<="; }

struct OrderEdge {
    int src;
    int dst;
    friend bool operator==(const OrderEdge& a, const OrderEdge& b) {
        return a.src == b.src && a.dst == b.dst;
    }
    friend bool operator<(const OrderEdge& a, const OrderEdge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    }
};

struct ConstraintEdge {
    int src;
    Cmp cmp;
    int weight;
    int dst;
    friend bool operator==(const ConstraintEdge& a, const ConstraintEdge& b) {
        return a.src == b.src && a.cmp == b.cmp && a.weight == b.weight && a.dst == b.dst;
    }
    friend bool operator<(const ConstraintEdge& a, const ConstraintEdge& b) {
        if (a.src != b.src) return a.src < b.src;
        if (a.dst != b.dst) return a.dst < b.dst;
        if (a.weight != b.weight) return a.weight < b.weight;
        return static_cast<int>(a.cmp) < static_cast<int>(b.cmp);
    }
};

struct WeightedGraph {
    int node_count = 0;
    int max_const = 1; // M
    std::vector<OrderEdge> order_edges;
    std::vector<ConstraintEdge> constraint_edges;

    void normalize();
    bool is_linear() const; // order edges are exactly {(i, i+1)}
    bool is_closed() const; // no strict constraint edge

    friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
        return a.node_count == b.node_count && a.max_const == b.max_const &&
               a.order_edges == b.order_edges && a.constraint_edges == b.constraint_edges;
    }
};

struct Realization {
    std::vector<Rat> ts;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate(const LabeledGraph& g);
std::vector<Diagnostic> validate(const WeightedGraph& g);

// Keeps nodes and edges, intersects every label set with `keep`.
LabeledGraph project(const LabeledGraph& g, const std::set<std::string>& keep);

// Def. 1 check: all constraint edges satisfied with the tagged strictness
// and ts monotone along order edges.
bool realizes(const WeightedGraph& g, const Realization& ts);

// View of a linear weighted graph as a labeled graph: order edges become
// "succ", constraint edges become symbols "<=w" / "<w".
LabeledGraph to_labeled(const WeightedGraph& g);
std::string weight_symbol(Cmp cmp, int w);
std::optional<std::pair<Cmp, int>> parse_weight_symbol(const std::string& sym);
WeightedGraph weighted_from_labeled(const LabeledGraph& g, std::optional<int> max_const = {});

// JSON + DOT serialization.  parse_* throw ParseError on malformed input and
// SemanticError when a type invariant fails.
std::string serialize(const LabeledGraph& g);
std::string serialize(const WeightedGraph& g);
LabeledGraph parse_labeled_graph(const std::string& json_text);
WeightedGraph parse_weighted_graph(const std::string& json_text);
std::string to_dot(const LabeledGraph& g);
std::string to_dot(const WeightedGraph& g);

} // namespace tcg

#endif
