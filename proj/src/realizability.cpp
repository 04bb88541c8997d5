#include "tcg/realizability.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <set>

namespace tcg {

namespace {

void require_valid_graph(const WeightedGraph& g) {
    auto ds = validate(g);
    if (!ds.empty()) throw SemanticError("invalid weighted graph: " + join_diagnostics(ds));
}

void require_linear(const WeightedGraph& g, const char* who) {
    if (!g.is_linear())
        throw SemanticError(std::string(who) + " requires a linear weighted graph");
}

// Lexicographic weights: (integer part, -#strict edges).  A cycle is
// infeasible iff its total is lex-negative.
struct Wt {
    long long a = 0;
    long long s = 0;
    friend Wt operator+(const Wt& x, const Wt& y) { return {x.a + y.a, x.s + y.s}; }
    friend bool operator<(const Wt& x, const Wt& y) {
        return x.a != y.a ? x.a < y.a : x.s < y.s;
    }
};

struct Arc {
    int src;
    int dst;
    Wt w;
    bool strict;
};

std::vector<Arc> difference_arcs(const WeightedGraph& g) {
    std::vector<Arc> arcs;
    for (const auto& e : g.constraint_edges)
        arcs.push_back({e.src, e.dst, {e.weight, e.cmp == Cmp::lt ? -1LL : 0LL},
                        e.cmp == Cmp::lt});
    for (const auto& e : g.order_edges) arcs.push_back({e.dst, e.src, {0, 0}, false});
    return arcs;
}

} // namespace

RealizeResult check_realizable(const WeightedGraph& g) {
    require_valid_graph(g);
    const int n = g.node_count;
    if (n == 0) return Realization{};

    std::vector<Arc> arcs = difference_arcs(g);
    std::vector<Wt> dist(static_cast<std::size_t>(n), Wt{0, 0});
    std::vector<int> pred(static_cast<std::size_t>(n), -1);

    int relaxed_node = -1;
    for (int round = 0; round < n; ++round) {
        bool changed = false;
        for (const auto& arc : arcs) {
            Wt cand = dist[static_cast<std::size_t>(arc.src)] + arc.w;
            if (cand < dist[static_cast<std::size_t>(arc.dst)]) {
                dist[static_cast<std::size_t>(arc.dst)] = cand;
                pred[static_cast<std::size_t>(arc.dst)] = arc.src;
                changed = true;
                if (round == n - 1) relaxed_node = arc.dst;
            }
        }
        if (!changed) break;
    }

    if (relaxed_node >= 0) {
        // Walk predecessors n steps to land inside the cycle, then collect it.
        int v = relaxed_node;
        for (int i = 0; i < n; ++i) v = pred[static_cast<std::size_t>(v)];
        NegCycleWitness w;
        std::vector<int> rev;
        for (int u = v;;) {
            rev.push_back(u);
            u = pred[static_cast<std::size_t>(u)];
            if (u == v) break;
        }
        // pred chains run opposite to arc direction.
        w.nodes.assign(rev.rbegin(), rev.rend());
        // Accumulate the cycle weight from the arcs actually present.
        for (std::size_t i = 0; i < w.nodes.size(); ++i) {
            int a = w.nodes[i];
            int b = w.nodes[(i + 1) % w.nodes.size()];
            // Prefer the tightest arc a -> b.
            const Arc* best = nullptr;
            for (const auto& arc : arcs)
                if (arc.src == a && arc.dst == b && (!best || arc.w < best->w)) best = &arc;
            assert(best != nullptr);
            w.total_weight += best->w.a;
            w.contains_strict = w.contains_strict || best->strict;
        }
        assert(w.total_weight < 0 || (w.total_weight == 0 && w.contains_strict));
        return w;
    }

    // dist is a feasible potential; realize with epsilon = 1/(n+1) and shift
    // so the minimum timestamp is 0.
    Realization out;
    Rat eps(1, n + 1);
    for (int v = 0; v < n; ++v)
        out.ts.push_back(Rat(dist[static_cast<std::size_t>(v)].a) +
                         Rat(dist[static_cast<std::size_t>(v)].s) * eps);
    Rat lo = out.ts[0];
    for (const auto& t : out.ts)
        if (t < lo) lo = t;
    for (auto& t : out.ts) t = t - lo;
    assert(realizes(g, out));
    return out;
}

bool verify_neg_cycle(const WeightedGraph& g, const NegCycleWitness& w) {
    if (w.nodes.empty()) return false;
    long long total = 0;
    bool strict = false;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
        int a = w.nodes[i];
        int b = w.nodes[(i + 1) % w.nodes.size()];
        bool found = false;
        long long best = 0;
        bool best_strict = false;
        for (const auto& e : g.constraint_edges) {
            if (e.src == a && e.dst == b) {
                long long cand = e.weight;
                bool cs = e.cmp == Cmp::lt;
                if (!found || cand < best || (cand == best && cs && !best_strict)) {
                    best = cand;
                    best_strict = cs;
                }
                found = true;
            }
        }
        if (!found) {
            bool order = false;
            for (const auto& e : g.order_edges)
                if (e.src == b && e.dst == a) order = true;
            if (!order) return false;
            best = 0;
            best_strict = false;
        }
        total += best;
        strict = strict || best_strict;
    }
    if (total != w.total_weight || strict != w.contains_strict) return false;
    return total < 0 || (total == 0 && strict);
}

bool is_slowly_monotone(const WeightedGraph& g, const Realization& ts) {
    for (int i = 0; i + 1 < g.node_count; ++i) {
        long long gap = ts.ts[static_cast<std::size_t>(i) + 1].floor() -
                        ts.ts[static_cast<std::size_t>(i)].floor();
        if (gap < 0 || gap > g.max_const - 1) return false;
    }
    return true;
}

Realization slowly_monotone_normalize(const WeightedGraph& g, const Realization& ts_in) {
    require_valid_graph(g);
    require_linear(g, "slowly_monotone_normalize");
    if (!realizes(g, ts_in)) throw SemanticError("input does not realize the graph");

    Realization ts = ts_in;
    const int M = g.max_const;
    for (int i = 0; i + 1 < g.node_count; ++i) {
        Rat cur = ts.ts[static_cast<std::size_t>(i)];
        Rat next = ts.ts[static_cast<std::size_t>(i) + 1];
        if (next.floor() - cur.floor() < M) continue;
        // Contract the gap: pick t with floor(t) = floor(cur) + M-1 and
        // t > cur + M-1, preserving the suffix fractional parts when possible.
        Rat frac = next.frac() > cur.frac() ? next.frac() : (cur.frac() + Rat(1)) / Rat(2);
        Rat t = Rat(cur.floor() + M - 1) + frac;
        Rat shift = next - t;
        for (int j = i + 1; j < g.node_count; ++j)
            ts.ts[static_cast<std::size_t>(j)] = ts.ts[static_cast<std::size_t>(j)] - shift;
    }
    if (!realizes(g, ts) || !is_slowly_monotone(g, ts))
        throw std::logic_error("slowly_monotone_normalize produced an invalid map");
    return ts;
}

// ---------------------------------------------------------------------------
// Modular machinery
// ---------------------------------------------------------------------------

Tsm tsm_from_realization(int M, const Realization& ts) {
    Tsm t;
    t.M = M;
    for (const auto& v : ts.ts)
        t.residues.push_back(static_cast<int>(((v.floor() % M) + M) % M));
    return t;
}

ModularDistances::ModularDistances(const WeightedGraph& g, const Tsm& t)
    : M_(t.M), n_(g.node_count), residues_(t.residues) {
    require_linear(g, "modular distances");
    if (static_cast<int>(t.residues.size()) != g.node_count)
        throw SemanticError("tsm size does not match the graph");
    for (int r : t.residues)
        if (r < 0 || r >= M_) throw SemanticError("tsm residue out of range");
    prefix_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int i = 0; i + 1 < n_; ++i)
        prefix_[static_cast<std::size_t>(i) + 1] =
            prefix_[static_cast<std::size_t>(i)] + d(i, i + 1);
    if (n_ > 0) prefix_[static_cast<std::size_t>(n_)] = prefix_[static_cast<std::size_t>(n_) - 1];
}

int ModularDistances::d(int u, int v) const {
    int diff = (residues_[static_cast<std::size_t>(v)] - residues_[static_cast<std::size_t>(u)]) % M_;
    return diff < 0 ? diff + M_ : diff;
}

int ModularDistances::d_plus(int u, int v) const {
    if (u <= v) {
        long long sum = prefix_[static_cast<std::size_t>(v)] - prefix_[static_cast<std::size_t>(u)];
        return static_cast<int>(std::min<long long>(M_, sum));
    }
    return -d_plus(v, u);
}

bool ModularDistances::is_big(int u, int v) const {
    if (v <= u) return false;
    for (int w1 = u; w1 <= v; ++w1)
        for (int w2 = w1 + 1; w2 <= v; ++w2)
            if (d(u, w1) + d(w1, w2) >= M_) return true;
    return false;
}

bool weakly_satisfies(const WeightedGraph& g, const Tsm& t) {
    require_linear(g, "weakly_satisfies");
    if (t.M != g.max_const)
        throw SemanticError("tsm modulus does not match the graph's M");
    ModularDistances md(g, t);

    bool by_clauses = true;
    for (const auto& e : g.constraint_edges) {
        if (e.src <= e.dst) {
            if (md.is_big(e.src, e.dst) || md.d(e.src, e.dst) > e.weight) by_clauses = false;
        } else {
            if (!md.is_big(e.dst, e.src) && md.d(e.dst, e.src) < -e.weight) by_clauses = false;
        }
        if (!by_clauses) break;
    }

    bool by_dplus = true;
    for (const auto& e : g.constraint_edges)
        if (md.d_plus(e.src, e.dst) > e.weight) {
            by_dplus = false;
            break;
        }

    if (by_clauses != by_dplus)
        throw std::logic_error("weak-satisfaction clauses disagree with the d+ characterization");
    return by_dplus;
}

bool FracRelations::geq_has(int u, int v) const {
    return std::find(geq.begin(), geq.end(), std::make_pair(u, v)) != geq.end();
}

bool FracRelations::gt_has(int u, int v) const {
    return std::find(gt.begin(), gt.end(), std::make_pair(u, v)) != gt.end();
}

FracRelations fractional_relations(const WeightedGraph& g, const Tsm& t) {
    require_linear(g, "fractional_relations");
    ModularDistances md(g, t);
    const int n = g.node_count;

    std::set<std::pair<int, int>> geq, gt;
    // d+ characterization.
    for (const auto& e : g.constraint_edges) {
        if (md.d_plus(e.src, e.dst) == e.weight) {
            geq.insert({e.src, e.dst});
            if (e.cmp == Cmp::lt) gt.insert({e.src, e.dst});
        }
    }
    for (int i = 0; i + 1 < n; ++i)
        if (md.d_plus(i + 1, i) == 0) geq.insert({i + 1, i}); // v covered by u

    // Case-split primary definition, for cross-checking.  Reflexive edges
    // fall under the forward case: d(u,u) = 0 and (u,u) is never big.
    std::set<std::pair<int, int>> geq2, gt2;
    for (const auto& e : g.constraint_edges) {
        if (e.src <= e.dst && !md.is_big(e.src, e.dst) && md.d(e.src, e.dst) == e.weight) {
            geq2.insert({e.src, e.dst});
            if (e.cmp == Cmp::lt) gt2.insert({e.src, e.dst});
        }
        if (e.dst < e.src && !md.is_big(e.dst, e.src) && md.d(e.dst, e.src) == -e.weight) {
            geq2.insert({e.src, e.dst});
            if (e.cmp == Cmp::lt) gt2.insert({e.src, e.dst});
        }
    }
    for (int i = 0; i + 1 < n; ++i)
        if (md.d(i + 1, i) == 0) geq2.insert({i + 1, i});

    if (geq != geq2 || gt != gt2)
        throw std::logic_error("fractional relation definitions disagree");

    FracRelations out;
    out.node_count = n;
    out.geq.assign(geq.begin(), geq.end());
    out.gt.assign(gt.begin(), gt.end());
    return out;
}

namespace {

// Reflexive-transitive closure of the geq relation.
std::vector<std::vector<bool>> geq_closure(const FracRelations& fr) {
    int n = fr.node_count;
    std::vector<std::vector<bool>> r(static_cast<std::size_t>(n),
                                     std::vector<bool>(static_cast<std::size_t>(n), false));
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = true;
    for (auto [u, v] : fr.geq) r[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = true;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            if (r[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)])
                for (int j = 0; j < n; ++j)
                    if (r[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)])
                        r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
    return r;
}

} // namespace

bool check_tsm_certificate(const WeightedGraph& g, const Tsm& t) {
    if (!weakly_satisfies(g, t)) return false;
    FracRelations fr = fractional_relations(g, t);
    auto closure = geq_closure(fr);
    for (auto [u, v] : fr.gt)
        if (closure[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) return false;
    return true;
}

Realization realization_from_certificate(const WeightedGraph& g, const Tsm& t) {
    if (!check_tsm_certificate(g, t)) throw SemanticError("tsm is not a valid certificate");
    const int n = g.node_count;
    ModularDistances md(g, t);

    // ts0: inductive prefix sums of residue distances along the chain.
    std::vector<long long> ts0(static_cast<std::size_t>(n), 0);
    for (int i = 0; i + 1 < n; ++i)
        ts0[static_cast<std::size_t>(i) + 1] = ts0[static_cast<std::size_t>(i)] + md.d(i, i + 1);

    // ts1: longest number of gt edges usable along a geq path from each node.
    FracRelations fr = fractional_relations(g, t);
    auto closure = geq_closure(fr);
    const auto& gt = fr.gt;
    std::vector<int> edge_len(gt.size(), -1);
    std::function<int(std::size_t)> len = [&](std::size_t e) -> int {
        if (edge_len[e] >= 0) return edge_len[e];
        edge_len[e] = 1; // guards self-dependence; certificate forbids gt cycles
        int best = 1;
        for (std::size_t f = 0; f < gt.size(); ++f)
            if (closure[static_cast<std::size_t>(gt[e].second)]
                       [static_cast<std::size_t>(gt[f].first)])
                best = std::max(best, 1 + len(f));
        edge_len[e] = best;
        return best;
    };
    Realization out;
    Rat denom(1, n + 1);
    for (int v = 0; v < n; ++v) {
        int ts1 = 0;
        for (std::size_t e = 0; e < gt.size(); ++e)
            if (closure[static_cast<std::size_t>(v)][static_cast<std::size_t>(gt[e].first)])
                ts1 = std::max(ts1, len(e));
        out.ts.push_back(Rat(ts0[static_cast<std::size_t>(v)]) + Rat(ts1) * denom);
    }
    if (!realizes(g, out))
        throw std::logic_error("certificate produced a non-realizing timestamp map");
    return out;
}

std::optional<Tsm> search_certificate(const WeightedGraph& g,
                                      const CertificateSearchOptions& opts) {
    require_valid_graph(g);
    require_linear(g, "search_certificate");
    const int n = g.node_count;
    const int M = g.max_const;
    if (n == 0) return Tsm{M, {}};

    double space = 1;
    for (int i = 0; i < n; ++i) space *= M;
    if (space > static_cast<double>(opts.max_maps))
        throw ResourceLimitError("residue space " + std::to_string(space) +
                                 " exceeds the cap of " + std::to_string(opts.max_maps));

    Tsm t{M, std::vector<int>(static_cast<std::size_t>(n), 0)};
    while (true) {
        if (check_tsm_certificate(g, t)) return t;
        // lexicographic odometer, rightmost digit fastest
        int i = n - 1;
        while (i >= 0 && t.residues[static_cast<std::size_t>(i)] == M - 1) {
            t.residues[static_cast<std::size_t>(i)] = 0;
            --i;
        }
        if (i < 0) return std::nullopt;
        ++t.residues[static_cast<std::size_t>(i)];
    }
}

} // namespace tcg
