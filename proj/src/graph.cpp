#include "tcg/graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"

namespace tcg {

using nlohmann::json;

const std::string kSuccSymbol = "succ";

// ---------------------------------------------------------------------------
// LabeledGraph
// ---------------------------------------------------------------------------

void LabeledGraph::normalize() {
    labels.resize(static_cast<std::size_t>(std::max(node_count, 0)));
    for (auto& ls : labels) {
        std::sort(ls.begin(), ls.end());
        ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

bool LabeledGraph::has_label(int v, const std::string& p) const {
    if (v < 0 || v >= node_count) return false;
    const auto& ls = labels[static_cast<std::size_t>(v)];
    return std::binary_search(ls.begin(), ls.end(), p);
}

std::vector<std::pair<int, int>> LabeledGraph::edges_with(const std::string& symbol) const {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : edges)
        if (e.symbol == symbol) out.emplace_back(e.src, e.dst);
    return out;
}

std::set<std::string> LabeledGraph::label_alphabet() const {
    std::set<std::string> out;
    for (const auto& ls : labels) out.insert(ls.begin(), ls.end());
    return out;
}

std::set<std::string> LabeledGraph::edge_alphabet() const {
    std::set<std::string> out;
    for (const auto& e : edges) out.insert(e.symbol);
    return out;
}

namespace {

// succ edges must form one simple path visiting every node exactly once.
void check_succ_linearity(const LabeledGraph& g, std::vector<Diagnostic>& out) {
    auto succ = g.edges_with(kSuccSymbol);
    if (succ.empty()) return;
    if (static_cast<int>(succ.size()) != g.node_count - 1) {
        out.push_back({"succ edges do not form a single path: expected " +
                       std::to_string(g.node_count - 1) + " edges, found " +
                       std::to_string(succ.size())});
        return;
    }
    std::vector<int> out_deg(static_cast<std::size_t>(g.node_count), 0);
    std::vector<int> in_deg(static_cast<std::size_t>(g.node_count), 0);
    std::vector<int> next(static_cast<std::size_t>(g.node_count), -1);
    for (auto [u, v] : succ) {
        ++out_deg[static_cast<std::size_t>(u)];
        ++in_deg[static_cast<std::size_t>(v)];
        next[static_cast<std::size_t>(u)] = v;
    }
    int start = -1;
    for (int v = 0; v < g.node_count; ++v) {
        if (out_deg[static_cast<std::size_t>(v)] > 1 || in_deg[static_cast<std::size_t>(v)] > 1) {
            out.push_back({"succ edges not linear: node " + std::to_string(v) +
                           " has multiple succ neighbors"});
            return;
        }
        if (in_deg[static_cast<std::size_t>(v)] == 0) {
            if (start != -1) {
                out.push_back({"succ edges not linear: multiple chain starts (nodes " +
                               std::to_string(start) + " and " + std::to_string(v) + ")"});
                return;
            }
            start = v;
        }
    }
    int visited = 0;
    for (int v = start; v != -1; v = next[static_cast<std::size_t>(v)]) ++visited;
    if (visited != g.node_count)
        out.push_back({"succ edges not linear: chain covers " + std::to_string(visited) +
                       " of " + std::to_string(g.node_count) + " nodes"});
}

} // namespace

std::vector<Diagnostic> validate(const LabeledGraph& g) {
    std::vector<Diagnostic> out;
    if (g.node_count < 0) out.push_back({"negative node count"});
    if (static_cast<int>(g.labels.size()) != g.node_count)
        out.push_back({"label table has " + std::to_string(g.labels.size()) +
                       " rows for " + std::to_string(g.node_count) + " nodes"});
    for (std::size_t i = 0; i + 1 < g.edges.size(); ++i)
        if (g.edges[i] == g.edges[i + 1])
            out.push_back({"duplicate edge (" + std::to_string(g.edges[i].src) + "," +
                           g.edges[i].symbol + "," + std::to_string(g.edges[i].dst) + ")"});
    for (const auto& e : g.edges) {
        if (e.src < 0 || e.src >= g.node_count || e.dst < 0 || e.dst >= g.node_count)
            out.push_back({"edge (" + std::to_string(e.src) + "," + e.symbol + "," +
                           std::to_string(e.dst) + ") out of node range"});
    }
    if (out.empty()) check_succ_linearity(g, out);
    return out;
}

LabeledGraph project(const LabeledGraph& g, const std::set<std::string>& keep) {
    LabeledGraph out = g;
    for (auto& ls : out.labels) {
        std::vector<std::string> kept;
        for (const auto& p : ls)
            if (keep.count(p)) kept.push_back(p);
        ls = std::move(kept);
    }
    return out;
}

// ---------------------------------------------------------------------------
// WeightedGraph
// ---------------------------------------------------------------------------

void WeightedGraph::normalize() {
    std::sort(order_edges.begin(), order_edges.end());
    order_edges.erase(std::unique(order_edges.begin(), order_edges.end()), order_edges.end());
    std::sort(constraint_edges.begin(), constraint_edges.end());
    constraint_edges.erase(std::unique(constraint_edges.begin(), constraint_edges.end()),
                           constraint_edges.end());
}

bool WeightedGraph::is_linear() const {
    if (static_cast<int>(order_edges.size()) != std::max(node_count - 1, 0)) return false;
    std::vector<OrderEdge> sorted = order_edges;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i + 1 < node_count; ++i) {
        const auto& e = sorted[static_cast<std::size_t>(i)];
        if (e.src != i || e.dst != i + 1) return false;
    }
    return true;
}

bool WeightedGraph::is_closed() const {
    for (const auto& e : constraint_edges)
        if (e.cmp == Cmp::lt) return false;
    return true;
}

std::vector<Diagnostic> validate(const WeightedGraph& g) {
    std::vector<Diagnostic> out;
    if (g.node_count < 0) out.push_back({"negative node count"});
    if (g.max_const < 1) out.push_back({"M must be positive, got " + std::to_string(g.max_const)});
    auto in_range = [&](int v) { return v >= 0 && v < g.node_count; };
    for (const auto& e : g.order_edges) {
        if (!in_range(e.src) || !in_range(e.dst))
            out.push_back({"order edge (" + std::to_string(e.src) + "," +
                           std::to_string(e.dst) + ") out of node range"});
        else if (e.src == e.dst)
            out.push_back({"order edge (" + std::to_string(e.src) + "," +
                           std::to_string(e.dst) + ") is a self-loop"});
    }
    for (const auto& e : g.constraint_edges) {
        std::string id = "(" + std::to_string(e.src) + "," + cmp_str(e.cmp) + "," +
                         std::to_string(e.weight) + "," + std::to_string(e.dst) + ")";
        if (!in_range(e.src) || !in_range(e.dst)) out.push_back({"constraint edge " + id + " out of node range"});
        if (e.weight > g.max_const - 1 || e.weight < -(g.max_const - 1))
            out.push_back({"constraint edge " + id + " weight out of range for M=" +
                           std::to_string(g.max_const)});
    }
    {
        auto sorted = g.order_edges;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
            if (sorted[i] == sorted[i + 1])
                out.push_back({"duplicate order edge (" + std::to_string(sorted[i].src) + "," +
                               std::to_string(sorted[i].dst) + ")"});
    }
    {
        auto sorted = g.constraint_edges;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
            if (sorted[i] == sorted[i + 1])
                out.push_back({"duplicate constraint edge (" + std::to_string(sorted[i].src) +
                               "," + cmp_str(sorted[i].cmp) + "," +
                               std::to_string(sorted[i].weight) + "," +
                               std::to_string(sorted[i].dst) + ")"});
    }
    return out;
}

bool realizes(const WeightedGraph& g, const Realization& ts) {
    if (static_cast<int>(ts.ts.size()) != g.node_count) return false;
    auto at = [&](int v) { return ts.ts[static_cast<std::size_t>(v)]; };
    for (const auto& e : g.order_edges)
        if (!(at(e.src) <= at(e.dst))) return false;
    for (const auto& e : g.constraint_edges) {
        Rat diff = at(e.dst) - at(e.src);
        Rat bound(e.weight);
        if (e.cmp == Cmp::lt ? !(diff < bound) : !(diff <= bound)) return false;
    }
    return true;
}

std::string weight_symbol(Cmp cmp, int w) {
    return std::string(cmp_str(cmp)) + std::to_string(w);
}

std::optional<std::pair<Cmp, int>> parse_weight_symbol(const std::string& sym) {
    Cmp cmp;
    std::size_t off;
    if (sym.rfind("<=", 0) == 0) {
        cmp = Cmp::le;
        off = 2;
    } else if (sym.rfind("<", 0) == 0) {
        cmp = Cmp::lt;
        off = 1;
    } else {
        return std::nullopt;
    }
    if (off >= sym.size()) return std::nullopt;
    try {
        std::size_t used = 0;
        int w = std::stoi(sym.substr(off), &used);
        if (used != sym.size() - off) return std::nullopt;
        return std::make_pair(cmp, w);
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

LabeledGraph to_labeled(const WeightedGraph& g) {
    if (!g.is_linear())
        throw SemanticError("to_labeled requires a linear weighted graph");
    LabeledGraph out;
    out.node_count = g.node_count;
    out.labels.assign(static_cast<std::size_t>(g.node_count), {});
    for (const auto& e : g.order_edges) out.edges.push_back({e.src, kSuccSymbol, e.dst});
    for (const auto& e : g.constraint_edges)
        out.edges.push_back({e.src, weight_symbol(e.cmp, e.weight), e.dst});
    out.normalize();
    return out;
}

WeightedGraph weighted_from_labeled(const LabeledGraph& g, std::optional<int> max_const) {
    WeightedGraph out;
    out.node_count = g.node_count;
    int max_abs = 0;
    for (const auto& e : g.edges) {
        if (e.symbol == kSuccSymbol) {
            out.order_edges.push_back({e.src, e.dst});
            continue;
        }
        auto cw = parse_weight_symbol(e.symbol);
        if (!cw) throw SemanticError("edge symbol '" + e.symbol + "' is not a weight constraint");
        out.constraint_edges.push_back({e.src, cw->first, cw->second, e.dst});
        max_abs = std::max(max_abs, std::abs(cw->second));
    }
    out.max_const = max_const ? *max_const : max_abs + 1;
    out.normalize();
    return out;
}

// ---------------------------------------------------------------------------
// JSON + DOT
// ---------------------------------------------------------------------------

namespace {

json parse_json_or_throw(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) {
        // Re-run with exceptions to extract the position.
        try {
            json::parse(text);
        } catch (const json::parse_error& e) {
            throw ParseError(e.what());
        }
        throw ParseError("malformed JSON");
    }
    return doc;
}

void require_valid(const std::vector<Diagnostic>& ds) {
    if (!ds.empty()) throw SemanticError(join_diagnostics(ds));
}

// External form writes non-succ symbols as "ds:NAME"; internal symbols are bare.
std::string external_edge_symbol(const std::string& sym) {
    return sym == kSuccSymbol ? sym : "ds:" + sym;
}

std::string internal_edge_symbol(const std::string& sym) {
    if (sym == kSuccSymbol) return sym;
    if (sym.rfind("ds:", 0) == 0 && sym.size() > 3) return sym.substr(3);
    throw ParseError("edge symbol '" + sym + "' must be \"succ\" or \"ds:NAME\"");
}

} // namespace

std::string serialize(const LabeledGraph& g) {
    json doc;
    doc["nodes"] = g.node_count;
    json labels = json::array();
    for (const auto& ls : g.labels) labels.push_back(ls);
    doc["labels"] = labels;
    json edges = json::array();
    for (const auto& e : g.edges)
        edges.push_back(json::array({e.src, external_edge_symbol(e.symbol), e.dst}));
    doc["edges"] = edges;
    return doc.dump();
}

LabeledGraph parse_labeled_graph(const std::string& text) {
    json doc = parse_json_or_throw(text);
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_number_integer())
        throw ParseError("labeled graph document needs an integer \"nodes\" field");
    LabeledGraph g;
    g.node_count = doc["nodes"].get<int>();
    if (doc.contains("labels")) {
        if (!doc["labels"].is_array()) throw ParseError("\"labels\" must be an array of arrays");
        for (const auto& row : doc["labels"]) {
            if (!row.is_array()) throw ParseError("\"labels\" must be an array of arrays");
            std::vector<std::string> ls;
            for (const auto& p : row) {
                if (!p.is_string()) throw ParseError("labels must be strings");
                ls.push_back(p.get<std::string>());
            }
            g.labels.push_back(std::move(ls));
        }
    }
    if (static_cast<int>(g.labels.size()) < g.node_count)
        g.labels.resize(static_cast<std::size_t>(std::max(g.node_count, 0)));
    if (doc.contains("edges")) {
        for (const auto& e : doc["edges"]) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
                !e[1].is_string() || !e[2].is_number_integer())
                throw ParseError("edges must be [src, symbol, dst] triples");
            g.edges.push_back(
                {e[0].get<int>(), internal_edge_symbol(e[1].get<std::string>()), e[2].get<int>()});
        }
    }
    g.normalize();
    require_valid(validate(g));
    return g;
}

std::string serialize(const WeightedGraph& g) {
    json doc;
    doc["nodes"] = g.node_count;
    doc["M"] = g.max_const;
    json order = json::array();
    for (const auto& e : g.order_edges) order.push_back(json::array({e.src, e.dst}));
    doc["order"] = order;
    json cons = json::array();
    for (const auto& e : g.constraint_edges)
        cons.push_back(json::array({e.src, cmp_str(e.cmp), e.weight, e.dst}));
    doc["constraints"] = cons;
    return doc.dump();
}

WeightedGraph parse_weighted_graph(const std::string& text) {
    json doc = parse_json_or_throw(text);
    if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_number_integer())
        throw ParseError("weighted graph document needs an integer \"nodes\" field");
    WeightedGraph g;
    g.node_count = doc["nodes"].get<int>();
    int max_abs = 0;
    if (doc.contains("order")) {
        for (const auto& e : doc["order"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
                !e[1].is_number_integer())
                throw ParseError("order edges must be [u, v] pairs");
            g.order_edges.push_back({e[0].get<int>(), e[1].get<int>()});
        }
    }
    if (doc.contains("constraints")) {
        for (const auto& e : doc["constraints"]) {
            if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() ||
                !e[1].is_string() || !e[2].is_number_integer() || !e[3].is_number_integer())
                throw ParseError("constraints must be [u, \"<\"|\"<=\", w, v]");
            std::string c = e[1].get<std::string>();
            Cmp cmp;
            if (c == "<") cmp = Cmp::lt;
            else if (c == "<=") cmp = Cmp::le;
            else throw ParseError("bad comparator token \"" + c + "\"");
            g.constraint_edges.push_back({e[0].get<int>(), cmp, e[2].get<int>(), e[3].get<int>()});
            max_abs = std::max(max_abs, std::abs(e[2].get<int>()));
        }
    }
    g.max_const = doc.contains("M") ? doc["M"].get<int>() : max_abs + 1;
    g.normalize();
    require_valid(validate(g));
    return g;
}

std::string to_dot(const LabeledGraph& g) {
    std::ostringstream os;
    os << "digraph G {\n  rankdir=LR;\n";
    for (int v = 0; v < g.node_count; ++v) {
        os << "  n" << v << " [label=\"" << v;
        const auto& ls = g.labels[static_cast<std::size_t>(v)];
        if (!ls.empty()) {
            os << "\\n{";
            for (std::size_t i = 0; i < ls.size(); ++i) os << (i ? "," : "") << ls[i];
            os << "}";
        }
        os << "\"];\n";
    }
    for (const auto& e : g.edges) {
        os << "  n" << e.src << " -> n" << e.dst;
        if (e.symbol != kSuccSymbol) os << " [label=\"" << e.symbol << "\"]";
        os << ";\n";
    }
    os << "}\n";
    return os.str();
}

std::string to_dot(const WeightedGraph& g) {
    std::ostringstream os;
    os << "digraph G {\n  rankdir=LR;\n";
    for (int v = 0; v < g.node_count; ++v) os << "  n" << v << " [label=\"" << v << "\"];\n";
    for (const auto& e : g.order_edges) os << "  n" << e.src << " -> n" << e.dst << ";\n";
    for (const auto& e : g.constraint_edges)
        os << "  n" << e.src << " -> n" << e.dst << " [label=\"" << cmp_str(e.cmp) << e.weight
           << "\", style=dashed];\n";
    os << "}\n";
    return os.str();
}

} // namespace tcg
