#include "tcg/pdl.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace tcg {

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

namespace {

StatePtr mk_state(StateFormula f) { return std::make_shared<const StateFormula>(std::move(f)); }
PathPtr mk_path(PathExpr p) { return std::make_shared<const PathExpr>(std::move(p)); }
SentencePtr mk_sentence(Sentence s) { return std::make_shared<const Sentence>(std::move(s)); }

} // namespace

StatePtr s_top() {
    static const StatePtr top = mk_state({StateFormula::Kind::top, "", {}, nullptr, nullptr});
    return top;
}

StatePtr s_bot() {
    static const StatePtr bot = s_not(s_top());
    return bot;
}

StatePtr s_prop(const std::string& p) {
    return mk_state({StateFormula::Kind::prop, p, {}, nullptr, nullptr});
}

StatePtr s_not(StatePtr s) {
    return mk_state({StateFormula::Kind::not_, "", {}, std::move(s), nullptr});
}

StatePtr s_or(std::vector<StatePtr> kids) {
    if (kids.empty()) return s_bot();
    if (kids.size() == 1) return kids[0];
    return mk_state({StateFormula::Kind::or_, "", std::move(kids), nullptr, nullptr});
}

StatePtr s_and(std::vector<StatePtr> kids) {
    if (kids.empty()) return s_top();
    if (kids.size() == 1) return kids[0];
    return mk_state({StateFormula::Kind::and_, "", std::move(kids), nullptr, nullptr});
}

StatePtr s_implies(StatePtr a, StatePtr b) { return s_or({s_not(std::move(a)), std::move(b)}); }

StatePtr s_iff(StatePtr a, StatePtr b) {
    return s_and({s_implies(a, b), s_implies(std::move(b), std::move(a))});
}

StatePtr s_exists_path(PathPtr p, StatePtr s) {
    return mk_state({StateFormula::Kind::exists_path, "", {}, std::move(s), std::move(p)});
}

StatePtr s_diamond(PathPtr p) { return s_exists_path(std::move(p), s_top()); }

StatePtr s_loop(PathPtr p) {
    return mk_state({StateFormula::Kind::loop, "", {}, nullptr, std::move(p)});
}

PathPtr p_edge(const std::string& symbol) {
    return mk_path({PathExpr::Kind::edge, symbol, nullptr, {}, "", "", ""});
}

PathPtr p_edge_inv(const std::string& symbol) { return p_inv(p_edge(symbol)); }

PathPtr p_test(StatePtr s) {
    return mk_path({PathExpr::Kind::test, "", std::move(s), {}, "", "", ""});
}

PathPtr p_alt(std::vector<PathPtr> kids) {
    if (kids.size() == 1) return kids[0];
    return mk_path({PathExpr::Kind::alt, "", nullptr, std::move(kids), "", "", ""});
}

PathPtr p_seq(std::vector<PathPtr> kids) {
    if (kids.empty()) throw SemanticError("empty path sequence");
    if (kids.size() == 1) return kids[0];
    return mk_path({PathExpr::Kind::seq, "", nullptr, std::move(kids), "", "", ""});
}

PathPtr p_star(PathPtr p) {
    return mk_path({PathExpr::Kind::star, "", nullptr, {std::move(p)}, "", "", ""});
}

PathPtr p_plus(PathPtr p) { return p_seq({p, p_star(p)}); }

PathPtr p_inv(PathPtr p) {
    return mk_path({PathExpr::Kind::inv, "", nullptr, {std::move(p)}, "", "", ""});
}

PathPtr p_cap(PathPtr a, PathPtr b) {
    return mk_path({PathExpr::Kind::cap, "", nullptr, {std::move(a), std::move(b)}, "", "", ""});
}

PathPtr p_auto(const std::string& name, const std::string& from, const std::string& to) {
    return mk_path({PathExpr::Kind::auto_, "", nullptr, {}, name, from, to});
}

SentencePtr sen_e(StatePtr s) {
    return mk_sentence({Sentence::Kind::exists_state, std::move(s), {}});
}

SentencePtr sen_not(SentencePtr s) {
    return mk_sentence({Sentence::Kind::not_, nullptr, {std::move(s)}});
}

SentencePtr sen_or(std::vector<SentencePtr> kids) {
    if (kids.empty()) return sen_not(sen_e(s_top())); // empty disjunction over sentences
    if (kids.size() == 1) return kids[0];
    return mk_sentence({Sentence::Kind::or_, nullptr, std::move(kids)});
}

SentencePtr sen_and(std::vector<SentencePtr> kids) {
    if (kids.empty()) return sen_not(sen_e(s_bot())); // vacuously true
    if (kids.size() == 1) return kids[0];
    return mk_sentence({Sentence::Kind::and_, nullptr, std::move(kids)});
}

SentencePtr sen_forall(StatePtr s) { return sen_not(sen_e(s_not(std::move(s)))); }

// ---------------------------------------------------------------------------
// Size and intersection width
// ---------------------------------------------------------------------------

namespace {

struct SizeWalker {
    std::unordered_map<const void*, bool> seen;
    std::size_t count = 0;

    void walk(const StatePtr& s) {
        if (!s || seen.count(s.get())) return;
        seen[s.get()] = true;
        ++count;
        for (const auto& k : s->kids) walk(k);
        walk(s->sub);
        walk(s->path);
    }
    void walk(const PathPtr& p) {
        if (!p || seen.count(p.get())) return;
        seen[p.get()] = true;
        ++count;
        walk(p->test);
        for (const auto& k : p->kids) walk(k);
    }
    void walk(const SentencePtr& s) {
        if (!s || seen.count(s.get())) return;
        seen[s.get()] = true;
        ++count;
        walk(s->state);
        for (const auto& k : s->kids) walk(k);
    }
};

} // namespace

std::size_t formula_size(const SentencePtr& s, const AutoRegistry& autos) {
    SizeWalker w;
    w.walk(s);
    for (const auto& [name, a] : autos) {
        (void)name;
        for (const auto& t : a.transitions) w.walk(t.label);
    }
    return w.count;
}

std::size_t formula_size(const EQSentence& f) { return formula_size(f.body, f.autos); }

namespace {

int iw_path(const PathPtr& p, const AutoRegistry& autos,
            std::unordered_map<const void*, int>& memo);

int iw_state(const StatePtr& s, const AutoRegistry& autos,
             std::unordered_map<const void*, int>& memo) {
    if (!s) return 1;
    auto it = memo.find(s.get());
    if (it != memo.end()) return it->second;
    int w = 1;
    switch (s->kind) {
        case StateFormula::Kind::top:
        case StateFormula::Kind::prop: break;
        case StateFormula::Kind::or_:
        case StateFormula::Kind::and_:
            for (const auto& k : s->kids) w = std::max(w, iw_state(k, autos, memo));
            break;
        case StateFormula::Kind::not_: w = iw_state(s->sub, autos, memo); break;
        case StateFormula::Kind::exists_path:
            w = std::max(iw_path(s->path, autos, memo), iw_state(s->sub, autos, memo));
            break;
        case StateFormula::Kind::loop: w = iw_path(s->path, autos, memo); break;
    }
    memo[s.get()] = w;
    return w;
}

int iw_path(const PathPtr& p, const AutoRegistry& autos,
            std::unordered_map<const void*, int>& memo) {
    if (!p) return 1;
    auto it = memo.find(p.get());
    if (it != memo.end()) return it->second;
    int w = 1;
    switch (p->kind) {
        case PathExpr::Kind::edge: break;
        case PathExpr::Kind::test: w = iw_state(p->test, autos, memo); break;
        case PathExpr::Kind::alt:
        case PathExpr::Kind::seq:
            for (const auto& k : p->kids) w = std::max(w, iw_path(k, autos, memo));
            break;
        case PathExpr::Kind::star:
        case PathExpr::Kind::inv: w = iw_path(p->kids[0], autos, memo); break;
        case PathExpr::Kind::cap:
            w = iw_path(p->kids[0], autos, memo) + iw_path(p->kids[1], autos, memo);
            break;
        case PathExpr::Kind::auto_: {
            auto a = autos.find(p->auto_name);
            if (a != autos.end())
                for (const auto& t : a->second.transitions)
                    w = std::max(w, iw_path(t.label, autos, memo));
            break;
        }
    }
    memo[p.get()] = w;
    return w;
}

int iw_sentence(const SentencePtr& s, const AutoRegistry& autos,
                std::unordered_map<const void*, int>& memo) {
    if (!s) return 1;
    int w = 1;
    if (s->state) w = std::max(w, iw_state(s->state, autos, memo));
    for (const auto& k : s->kids) w = std::max(w, iw_sentence(k, autos, memo));
    return w;
}

} // namespace

int intersection_width(const PathPtr& p, const AutoRegistry& autos) {
    std::unordered_map<const void*, int> memo;
    return iw_path(p, autos, memo);
}

int intersection_width(const EQSentence& f) {
    std::unordered_map<const void*, int> memo;
    return iw_sentence(f.body, f.autos, memo);
}

// ---------------------------------------------------------------------------
// Bit-level node sets and relations.  Graphs are capped at 64 nodes so a
// node set is one machine word; relations hold one word per row and reuse
// their storage across evaluations.
// ---------------------------------------------------------------------------

namespace {

constexpr int kMaxNodes = 64;

inline std::uint64_t full_mask(int n) {
    return n >= 64 ? ~0ULL : (n == 0 ? 0ULL : ((1ULL << n) - 1));
}

struct Rel {
    int n = 0;
    std::vector<std::uint64_t> rows;

    explicit Rel(int n_ = 0) : n(n_), rows(static_cast<std::size_t>(n_), 0) {}
    bool get(int i, int j) const { return rows[static_cast<std::size_t>(i)] >> j & 1; }
    void set(int i, int j) { rows[static_cast<std::size_t>(i)] |= 1ULL << j; }
    void clear() { std::fill(rows.begin(), rows.end(), 0); }
    friend bool operator==(const Rel& a, const Rel& b) { return a.n == b.n && a.rows == b.rows; }
};

inline void rel_or_into(Rel& dst, const Rel& src) {
    for (int i = 0; i < dst.n; ++i) dst.rows[static_cast<std::size_t>(i)] |= src.rows[static_cast<std::size_t>(i)];
}

inline void rel_and_into(Rel& dst, const Rel& src) {
    for (int i = 0; i < dst.n; ++i) dst.rows[static_cast<std::size_t>(i)] &= src.rows[static_cast<std::size_t>(i)];
}

// dst must not alias a or b
inline void rel_compose(Rel& dst, const Rel& a, const Rel& b) {
    for (int i = 0; i < dst.n; ++i) {
        std::uint64_t bits = a.rows[static_cast<std::size_t>(i)];
        std::uint64_t out = 0;
        while (bits) {
            int j = __builtin_ctzll(bits);
            bits &= bits - 1;
            out |= b.rows[static_cast<std::size_t>(j)];
        }
        dst.rows[static_cast<std::size_t>(i)] = out;
    }
}

inline void rel_transpose(Rel& dst, const Rel& src) {
    dst.clear();
    for (int i = 0; i < src.n; ++i) {
        std::uint64_t bits = src.rows[static_cast<std::size_t>(i)];
        while (bits) {
            int j = __builtin_ctzll(bits);
            bits &= bits - 1;
            dst.set(j, i);
        }
    }
}

// reflexive-transitive closure by iterated squaring; scratch must not alias
inline void rel_star(Rel& dst, const Rel& src, Rel& scratch) {
    dst = src;
    for (int i = 0; i < dst.n; ++i) dst.rows[static_cast<std::size_t>(i)] |= 1ULL << i;
    while (true) {
        rel_compose(scratch, dst, dst);
        bool changed = false;
        for (int i = 0; i < dst.n; ++i) {
            std::uint64_t next =
                dst.rows[static_cast<std::size_t>(i)] | scratch.rows[static_cast<std::size_t>(i)];
            if (next != dst.rows[static_cast<std::size_t>(i)]) {
                dst.rows[static_cast<std::size_t>(i)] = next;
                changed = true;
            }
        }
        if (!changed) return;
    }
}

inline std::uint64_t rel_diag(const Rel& r) {
    std::uint64_t out = 0;
    for (int i = 0; i < r.n; ++i)
        if (r.get(i, i)) out |= 1ULL << i;
    return out;
}

inline void rel_from_diag(Rel& dst, std::uint64_t bits, int n) {
    dst.clear();
    for (int i = 0; i < n; ++i)
        if (bits >> i & 1) dst.set(i, i);
}

inline bool rel_empty(const Rel& r) {
    for (auto row : r.rows)
        if (row) return false;
    return true;
}

// Kleene 3-valued bounds: `must` under-approximates every completion of a
// partial labeling, `may` over-approximates.  Exact values have must == may.
struct Set3 {
    std::uint64_t must = 0, may = 0;
};
struct Rel3 {
    Rel must, may;
    explicit Rel3(int n = 0) : must(n), may(n) {}
};

// Wide bitsets for automaton product closures (state_count * n may exceed 64).
struct WideRel {
    int n = 0, words = 0;
    std::vector<std::uint64_t> bits;

    explicit WideRel(int n_ = 0)
        : n(n_), words((n_ + 63) / 64), bits(static_cast<std::size_t>(n_) * words, 0) {}
    std::uint64_t* row(int i) { return bits.data() + static_cast<std::size_t>(i) * words; }
    const std::uint64_t* row(int i) const {
        return bits.data() + static_cast<std::size_t>(i) * words;
    }
    bool get(int i, int j) const { return row(i)[j / 64] >> (j % 64) & 1; }
    void set(int i, int j) { row(i)[j / 64] |= 1ULL << (j % 64); }

    void star_in_place() {
        for (int i = 0; i < n; ++i) set(i, i);
        // warshall over words
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                if (get(i, k)) {
                    std::uint64_t* ri = row(i);
                    const std::uint64_t* rk = row(k);
                    for (int w = 0; w < words; ++w) ri[w] |= rk[w];
                }
    }
};

enum class Tri { f, u, t };

Tri tri_not(Tri t) { return t == Tri::t ? Tri::f : t == Tri::f ? Tri::t : Tri::u; }

// ---------------------------------------------------------------------------
// Compiled evaluator.  The AST is flattened once into index-based arrays
// (children resolved to dense indices, shared subterms deduplicated), so the
// per-labeling evaluation does no hashing; evaluation stays lazy so sentence
// connectives can short-circuit.  Subterms that do not mention quantified
// props are constant across labelings and evaluated once; constantly empty
// path branches short out entire alternation arms.
// ---------------------------------------------------------------------------

struct Compiled {
    struct SNode {
        StateFormula::Kind kind;
        int prop_id = -1;              // quantified prop index, or
        std::uint64_t graph_set = 0;   // exact denotation of a graph label
        std::vector<int> kids;         // state indices
        int sub = -1;                  // state index
        int path = -1;                 // path index
        bool is_const = false;
    };
    struct PNode {
        PathExpr::Kind kind;
        Rel edge_rel{0};               // exact denotation of an edge symbol
        int test = -1;                 // state index
        std::vector<int> kids;         // path indices
        int auto_id = -1, auto_from = -1, auto_to = -1;
        bool is_const = false;
        bool const_empty = false;      // empty for every labeling
    };
    struct AutoDef {
        int state_count = 0;
        std::vector<std::tuple<int, int, int>> transitions; // (from, path idx, to)
        bool is_const = false;
    };
    struct Sen {
        Sentence::Kind kind;
        int state = -1;
        std::vector<int> kids;
    };

    int n = 0;
    std::vector<SNode> snodes;
    std::vector<PNode> pnodes;
    std::vector<AutoDef> autos;
    std::vector<Sen> sens;
    int root = -1;

    // Constness and constant emptiness, bottom-up (children precede parents).
    void fold_constants() {
        for (auto& s : snodes) {
            switch (s.kind) {
                case StateFormula::Kind::top: s.is_const = true; break;
                case StateFormula::Kind::prop: s.is_const = s.prop_id < 0; break;
                case StateFormula::Kind::or_:
                case StateFormula::Kind::and_: {
                    s.is_const = true;
                    for (int k : s.kids)
                        s.is_const = s.is_const && snodes[static_cast<std::size_t>(k)].is_const;
                    break;
                }
                case StateFormula::Kind::not_:
                    s.is_const = snodes[static_cast<std::size_t>(s.sub)].is_const;
                    break;
                case StateFormula::Kind::exists_path:
                    s.is_const = snodes[static_cast<std::size_t>(s.sub)].is_const &&
                                 pnodes[static_cast<std::size_t>(s.path)].is_const;
                    break;
                case StateFormula::Kind::loop:
                    s.is_const = pnodes[static_cast<std::size_t>(s.path)].is_const;
                    break;
            }
        }
        for (auto& p : pnodes) {
            switch (p.kind) {
                case PathExpr::Kind::edge:
                    p.is_const = true;
                    p.const_empty = rel_empty(p.edge_rel);
                    break;
                case PathExpr::Kind::test:
                    p.is_const = snodes[static_cast<std::size_t>(p.test)].is_const;
                    p.const_empty = false;
                    break;
                case PathExpr::Kind::alt: {
                    p.is_const = true;
                    p.const_empty = true;
                    for (int k : p.kids) {
                        p.is_const = p.is_const && pnodes[static_cast<std::size_t>(k)].is_const;
                        p.const_empty =
                            p.const_empty && pnodes[static_cast<std::size_t>(k)].const_empty;
                    }
                    break;
                }
                case PathExpr::Kind::seq: {
                    p.is_const = true;
                    p.const_empty = false;
                    for (int k : p.kids) {
                        p.is_const = p.is_const && pnodes[static_cast<std::size_t>(k)].is_const;
                        p.const_empty =
                            p.const_empty || pnodes[static_cast<std::size_t>(k)].const_empty;
                    }
                    break;
                }
                case PathExpr::Kind::star:
                    p.is_const = pnodes[static_cast<std::size_t>(p.kids[0])].is_const;
                    p.const_empty = false; // contains the identity
                    break;
                case PathExpr::Kind::inv:
                    p.is_const = pnodes[static_cast<std::size_t>(p.kids[0])].is_const;
                    p.const_empty = pnodes[static_cast<std::size_t>(p.kids[0])].const_empty;
                    break;
                case PathExpr::Kind::cap:
                    p.is_const = pnodes[static_cast<std::size_t>(p.kids[0])].is_const &&
                                 pnodes[static_cast<std::size_t>(p.kids[1])].is_const;
                    p.const_empty = pnodes[static_cast<std::size_t>(p.kids[0])].const_empty ||
                                    pnodes[static_cast<std::size_t>(p.kids[1])].const_empty;
                    break;
                case PathExpr::Kind::auto_: {
                    bool all_const = true;
                    for (const auto& [qs, pi, qt] : autos[static_cast<std::size_t>(p.auto_id)].transitions) {
                        (void)qs;
                        (void)qt;
                        all_const = all_const && pnodes[static_cast<std::size_t>(pi)].is_const;
                    }
                    autos[static_cast<std::size_t>(p.auto_id)].is_const = all_const;
                    p.is_const = all_const;
                    p.const_empty = false; // zero-step runs give the identity
                    break;
                }
            }
            if (p.const_empty) p.is_const = true;
        }
    }
};

struct Compiler {
    const LabeledGraph& g;
    const EvalOptions& opts;
    const std::vector<std::string>* qprops;
    Compiled out;
    std::unordered_map<const void*, int> sidx, pidx;
    std::unordered_map<std::string, int> auto_ids;
    std::set<std::string> graph_sigma, graph_gamma;

    Compiler(const LabeledGraph& g_, const EvalOptions& o, const std::vector<std::string>* qp)
        : g(g_), opts(o), qprops(qp), graph_sigma(g_.label_alphabet()),
          graph_gamma(g_.edge_alphabet()) {
        if (g.node_count > kMaxNodes)
            throw ResourceLimitError("evaluation supports at most 64 nodes");
        out.n = g.node_count;
    }

    int prop_index(const std::string& p) const {
        if (!qprops) return -1;
        for (std::size_t i = 0; i < qprops->size(); ++i)
            if ((*qprops)[i] == p) return static_cast<int>(i);
        return -1;
    }

    int compile(const StatePtr& s) {
        auto it = sidx.find(s.get());
        if (it != sidx.end()) return it->second;
        Compiled::SNode node;
        node.kind = s->kind;
        switch (s->kind) {
            case StateFormula::Kind::top: break;
            case StateFormula::Kind::prop: {
                node.prop_id = prop_index(s->prop);
                if (node.prop_id < 0) {
                    if (!graph_sigma.count(s->prop) && !(opts.sigma && opts.sigma->count(s->prop)))
                        throw EvalError("undeclared node symbol '" + s->prop + "'");
                    for (int v = 0; v < out.n; ++v)
                        if (g.has_label(v, s->prop)) node.graph_set |= 1ULL << v;
                }
                break;
            }
            case StateFormula::Kind::or_:
            case StateFormula::Kind::and_:
                for (const auto& k : s->kids) node.kids.push_back(compile(k));
                break;
            case StateFormula::Kind::not_: node.sub = compile(s->sub); break;
            case StateFormula::Kind::exists_path:
                node.path = compile(s->path);
                node.sub = compile(s->sub);
                break;
            case StateFormula::Kind::loop: node.path = compile(s->path); break;
        }
        out.snodes.push_back(std::move(node));
        int id = static_cast<int>(out.snodes.size()) - 1;
        sidx.emplace(s.get(), id);
        return id;
    }

    int compile(const PathPtr& p) {
        auto it = pidx.find(p.get());
        if (it != pidx.end()) return it->second;
        Compiled::PNode node;
        node.kind = p->kind;
        switch (p->kind) {
            case PathExpr::Kind::edge: {
                if (!graph_gamma.count(p->symbol) && !(opts.gamma && opts.gamma->count(p->symbol)))
                    throw EvalError("undeclared edge symbol '" + p->symbol + "'");
                node.edge_rel = Rel(out.n);
                for (const auto& e : g.edges)
                    if (e.symbol == p->symbol) node.edge_rel.set(e.src, e.dst);
                break;
            }
            case PathExpr::Kind::test: node.test = compile(p->test); break;
            case PathExpr::Kind::alt:
            case PathExpr::Kind::seq:
                for (const auto& k : p->kids) node.kids.push_back(compile(k));
                break;
            case PathExpr::Kind::star:
            case PathExpr::Kind::inv: node.kids.push_back(compile(p->kids[0])); break;
            case PathExpr::Kind::cap:
                node.kids.push_back(compile(p->kids[0]));
                node.kids.push_back(compile(p->kids[1]));
                break;
            case PathExpr::Kind::auto_: {
                auto found = auto_ids.find(p->auto_name);
                if (found == auto_ids.end()) {
                    if (!opts.autos || !opts.autos->count(p->auto_name))
                        throw EvalError("dangling automaton reference '" + p->auto_name + "'");
                    const TrackingAutomaton& A = opts.autos->at(p->auto_name);
                    Compiled::AutoDef def;
                    def.state_count = static_cast<int>(A.states.size());
                    auto state_index = [&](const std::string& q) {
                        for (std::size_t i = 0; i < A.states.size(); ++i)
                            if (A.states[i] == q) return static_cast<int>(i);
                        throw EvalError("automaton '" + p->auto_name + "' has no state '" + q +
                                        "'");
                    };
                    for (const auto& t : A.transitions)
                        def.transitions.emplace_back(state_index(t.from), compile(t.label),
                                                     state_index(t.to));
                    out.autos.push_back(std::move(def));
                    found = auto_ids.emplace(p->auto_name,
                                             static_cast<int>(out.autos.size()) - 1).first;
                }
                node.auto_id = found->second;
                const TrackingAutomaton& A = opts.autos->at(p->auto_name);
                auto state_index = [&](const std::string& q) {
                    for (std::size_t i = 0; i < A.states.size(); ++i)
                        if (A.states[i] == q) return static_cast<int>(i);
                    throw EvalError("automaton '" + p->auto_name + "' has no state '" + q + "'");
                };
                node.auto_from = state_index(p->auto_from);
                node.auto_to = state_index(p->auto_to);
                break;
            }
        }
        out.pnodes.push_back(std::move(node));
        int id = static_cast<int>(out.pnodes.size()) - 1;
        pidx.emplace(p.get(), id);
        return id;
    }

    int compile(const SentencePtr& s) {
        Compiled::Sen node;
        node.kind = s->kind;
        if (s->state) node.state = compile(s->state);
        for (const auto& k : s->kids) node.kids.push_back(compile(k));
        out.sens.push_back(std::move(node));
        return static_cast<int>(out.sens.size()) - 1;
    }
};

Compiled compile_sentence(const LabeledGraph& g, const SentencePtr& s, const EvalOptions& opts,
                          const std::vector<std::string>* qprops) {
    Compiler c(g, opts, qprops);
    c.out.root = c.compile(s);
    c.out.fold_constants();
    return std::move(c.out);
}

// Per-labeling evaluation state; storage is reused across search steps, and
// constant subterms keep their first value.
struct Evaluator {
    static constexpr std::uint32_t kConstEpoch = 0xffffffffu;

    const Compiled& c;
    const std::vector<std::uint32_t>* masks = nullptr; // quantified labeling
    int assigned_upto = 0;
    std::uint64_t full;

    std::vector<Set3> svals;
    std::vector<Rel3> pvals;
    std::vector<std::pair<WideRel, WideRel>> auto_closures;
    std::vector<std::uint32_t> sepoch, pepoch, aepoch;
    std::uint32_t epoch = 0;
    Rel scratch_a, scratch_b;

    explicit Evaluator(const Compiled& c_)
        : c(c_), full(full_mask(c_.n)), svals(c_.snodes.size()),
          pvals(c_.pnodes.size(), Rel3(c_.n)),
          auto_closures(c_.autos.size()),
          sepoch(c_.snodes.size(), 0), pepoch(c_.pnodes.size(), 0), aepoch(c_.autos.size(), 0),
          scratch_a(c_.n), scratch_b(c_.n) {}

    void begin(const std::vector<std::uint32_t>* m, int upto) {
        masks = m;
        assigned_upto = upto;
        ++epoch;
        if (epoch == kConstEpoch) { // wrapped; reset everything
            std::fill(sepoch.begin(), sepoch.end(), 0);
            std::fill(pepoch.begin(), pepoch.end(), 0);
            std::fill(aepoch.begin(), aepoch.end(), 0);
            epoch = 1;
        }
    }

    bool fresh(std::uint32_t tag) const { return tag == epoch || tag == kConstEpoch; }

    const Set3& state(int i) {
        auto& tag = sepoch[static_cast<std::size_t>(i)];
        Set3& out = svals[static_cast<std::size_t>(i)];
        if (fresh(tag)) return out;
        const auto& node = c.snodes[static_cast<std::size_t>(i)];
        switch (node.kind) {
            case StateFormula::Kind::top:
                out.must = full;
                out.may = full;
                break;
            case StateFormula::Kind::prop:
                if (node.prop_id >= 0) {
                    std::uint64_t must = 0, may = 0;
                    for (int v = 0; v < c.n; ++v) {
                        if (v < assigned_upto) {
                            if ((*masks)[static_cast<std::size_t>(v)] >> node.prop_id & 1) {
                                must |= 1ULL << v;
                                may |= 1ULL << v;
                            }
                        } else {
                            may |= 1ULL << v;
                        }
                    }
                    out.must = must;
                    out.may = may;
                } else {
                    out.must = node.graph_set;
                    out.may = node.graph_set;
                }
                break;
            case StateFormula::Kind::or_: {
                out.must = 0;
                out.may = 0;
                for (int k : node.kids) {
                    const Set3& kv = state(k);
                    out.must |= kv.must;
                    out.may |= kv.may;
                }
                break;
            }
            case StateFormula::Kind::and_: {
                out.must = full;
                out.may = full;
                for (int k : node.kids) {
                    const Set3& kv = state(k);
                    out.must &= kv.must;
                    out.may &= kv.may;
                }
                break;
            }
            case StateFormula::Kind::not_: {
                const Set3& kv = state(node.sub);
                out.must = ~kv.may & full;
                out.may = ~kv.must & full;
                break;
            }
            case StateFormula::Kind::exists_path: {
                const Rel3& pr = path(node.path);
                const Set3& tv = state(node.sub);
                out.must = 0;
                out.may = 0;
                for (int u = 0; u < c.n; ++u) {
                    if (pr.must.rows[static_cast<std::size_t>(u)] & tv.must) out.must |= 1ULL << u;
                    if (pr.may.rows[static_cast<std::size_t>(u)] & tv.may) out.may |= 1ULL << u;
                }
                break;
            }
            case StateFormula::Kind::loop: {
                const Rel3& pr = path(node.path);
                out.must = rel_diag(pr.must);
                out.may = rel_diag(pr.may);
                break;
            }
        }
        tag = node.is_const ? kConstEpoch : epoch;
        return out;
    }

    const Rel3& path(int i) {
        auto& tag = pepoch[static_cast<std::size_t>(i)];
        Rel3& out = pvals[static_cast<std::size_t>(i)];
        if (fresh(tag)) return out;
        const auto& node = c.pnodes[static_cast<std::size_t>(i)];
        if (node.const_empty) {
            out.must.clear();
            out.may.clear();
            tag = kConstEpoch;
            return out;
        }
        switch (node.kind) {
            case PathExpr::Kind::edge:
                out.must = node.edge_rel;
                out.may = node.edge_rel;
                break;
            case PathExpr::Kind::test: {
                const Set3& tv = state(node.test);
                rel_from_diag(out.must, tv.must, c.n);
                rel_from_diag(out.may, tv.may, c.n);
                break;
            }
            case PathExpr::Kind::alt: {
                out.must.clear();
                out.may.clear();
                for (int k : node.kids) {
                    if (c.pnodes[static_cast<std::size_t>(k)].const_empty) continue;
                    const Rel3& kv = path(k);
                    rel_or_into(out.must, kv.must);
                    rel_or_into(out.may, kv.may);
                }
                break;
            }
            case PathExpr::Kind::seq: {
                const Rel3& first = path(node.kids[0]);
                out.must = first.must;
                out.may = first.may;
                for (std::size_t k = 1; k < node.kids.size(); ++k) {
                    const Rel3& kv = path(node.kids[k]);
                    rel_compose(scratch_a, out.must, kv.must);
                    std::swap(out.must.rows, scratch_a.rows);
                    rel_compose(scratch_a, out.may, kv.may);
                    std::swap(out.may.rows, scratch_a.rows);
                }
                break;
            }
            case PathExpr::Kind::star: {
                const Rel3& kv = path(node.kids[0]);
                rel_star(scratch_b, kv.must, scratch_a);
                std::swap(out.must.rows, scratch_b.rows);
                rel_star(scratch_b, kv.may, scratch_a);
                std::swap(out.may.rows, scratch_b.rows);
                break;
            }
            case PathExpr::Kind::inv: {
                const Rel3& kv = path(node.kids[0]);
                rel_transpose(out.must, kv.must);
                rel_transpose(out.may, kv.may);
                break;
            }
            case PathExpr::Kind::cap: {
                const Rel3& a = path(node.kids[0]);
                const Rel3& b = path(node.kids[1]);
                out.must = a.must;
                out.may = a.may;
                rel_and_into(out.must, b.must);
                rel_and_into(out.may, b.may);
                break;
            }
            case PathExpr::Kind::auto_: {
                const auto& closure = auto_closure(node.auto_id);
                out.must.clear();
                out.may.clear();
                for (int u = 0; u < c.n; ++u)
                    for (int v = 0; v < c.n; ++v) {
                        if (closure.first.get(node.auto_from * c.n + u, node.auto_to * c.n + v))
                            out.must.set(u, v);
                        if (closure.second.get(node.auto_from * c.n + u, node.auto_to * c.n + v))
                            out.may.set(u, v);
                    }
                break;
            }
        }
        tag = node.is_const ? kConstEpoch : epoch;
        return out;
    }

    const std::pair<WideRel, WideRel>& auto_closure(int id) {
        auto& tag = aepoch[static_cast<std::size_t>(id)];
        auto& out = auto_closures[static_cast<std::size_t>(id)];
        if (fresh(tag)) return out;
        const auto& def = c.autos[static_cast<std::size_t>(id)];
        int N = def.state_count * c.n;
        out.first = WideRel(N);
        out.second = WideRel(N);
        for (const auto& [qs, pi, qt] : def.transitions) {
            const Rel3& lab = path(pi);
            for (int u = 0; u < c.n; ++u) {
                std::uint64_t bits = lab.must.rows[static_cast<std::size_t>(u)];
                while (bits) {
                    int v = __builtin_ctzll(bits);
                    bits &= bits - 1;
                    out.first.set(qs * c.n + u, qt * c.n + v);
                }
                bits = lab.may.rows[static_cast<std::size_t>(u)];
                while (bits) {
                    int v = __builtin_ctzll(bits);
                    bits &= bits - 1;
                    out.second.set(qs * c.n + u, qt * c.n + v);
                }
            }
        }
        out.first.star_in_place();
        out.second.star_in_place();
        tag = def.is_const ? kConstEpoch : epoch;
        return out;
    }

    Tri sentence(int i) {
        const auto& node = c.sens[static_cast<std::size_t>(i)];
        switch (node.kind) {
            case Sentence::Kind::exists_state: {
                const Set3& v = state(node.state);
                if (v.must) return Tri::t;
                if (!v.may) return Tri::f;
                return Tri::u;
            }
            case Sentence::Kind::not_: return tri_not(sentence(node.kids[0]));
            case Sentence::Kind::or_: {
                bool unknown = false;
                for (int k : node.kids) {
                    Tri kv = sentence(k);
                    if (kv == Tri::t) return Tri::t;
                    if (kv == Tri::u) unknown = true;
                }
                return unknown ? Tri::u : Tri::f;
            }
            case Sentence::Kind::and_: {
                bool unknown = false;
                for (int k : node.kids) {
                    Tri kv = sentence(k);
                    if (kv == Tri::f) return Tri::f;
                    if (kv == Tri::u) unknown = true;
                }
                return unknown ? Tri::u : Tri::t;
            }
        }
        return Tri::u; // unreachable
    }
};

} // namespace

// ---------------------------------------------------------------------------
// Public evaluation entry points
// ---------------------------------------------------------------------------

std::set<int> eval_state(const LabeledGraph& g, const StatePtr& s, const EvalOptions& opts) {
    Compiler c(g, opts, nullptr);
    int root = c.compile(s);
    Compiled compiled = std::move(c.out);
    compiled.fold_constants();
    Evaluator ev(compiled);
    ev.begin(nullptr, 0);
    const Set3& v = ev.state(root);
    assert(v.must == v.may);
    std::set<int> out;
    for (int i = 0; i < g.node_count; ++i)
        if (v.must >> i & 1) out.insert(i);
    return out;
}

std::set<std::pair<int, int>> eval_path(const LabeledGraph& g, const PathPtr& p,
                                        const EvalOptions& opts) {
    Compiler c(g, opts, nullptr);
    int root = c.compile(p);
    Compiled compiled = std::move(c.out);
    compiled.fold_constants();
    Evaluator ev(compiled);
    ev.begin(nullptr, 0);
    const Rel3& v = ev.path(root);
    assert(v.must == v.may);
    std::set<std::pair<int, int>> out;
    for (int i = 0; i < g.node_count; ++i)
        for (int j = 0; j < g.node_count; ++j)
            if (v.must.get(i, j)) out.insert({i, j});
    return out;
}

bool eval_sentence(const LabeledGraph& g, const SentencePtr& s, const EvalOptions& opts) {
    Compiled compiled = compile_sentence(g, s, opts, nullptr);
    Evaluator ev(compiled);
    ev.begin(nullptr, 0);
    Tri v = ev.sentence(compiled.root);
    assert(v != Tri::u);
    return v == Tri::t;
}

// ---------------------------------------------------------------------------
// eval_eq: DFS over labelings with 3-valued pruning
// ---------------------------------------------------------------------------

std::vector<std::string> Labeling::labels_of(int node) const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < props.size(); ++k)
        if (masks[static_cast<std::size_t>(node)] >> k & 1) out.push_back(props[k]);
    return out;
}

EvalEqResult eval_eq(const LabeledGraph& g, const EQSentence& f, const EvalEqOptions& opts) {
    int n = g.node_count;
    int k = static_cast<int>(f.props.size());
    if (k > opts.max_props)
        throw ResourceLimitError("eval_eq: " + std::to_string(k) +
                                 " quantified props exceed the cap of " +
                                 std::to_string(opts.max_props));
    for (const auto& p : f.props)
        if (g.label_alphabet().count(p))
            throw SemanticError("quantified prop '" + p + "' collides with a graph label");

    std::vector<std::vector<std::uint32_t>> domains;
    if (opts.domains) {
        if (static_cast<int>(opts.domains->size()) != n)
            throw SemanticError("eval_eq: domain table size mismatch");
        domains = *opts.domains;
    } else {
        if (k >= 31) throw ResourceLimitError("eval_eq: full domain too large");
        std::vector<std::uint32_t> all;
        for (std::uint32_t m = 0; m < (1u << k); ++m) all.push_back(m);
        domains.assign(static_cast<std::size_t>(n), all);
    }

    EvalOptions base = opts.base;
    if (!base.autos) base.autos = &f.autos;

    std::vector<std::uint32_t> masks(static_cast<std::size_t>(n), 0);
    std::uint64_t steps = 0;

    Compiled compiled = compile_sentence(g, f.body, base, &f.props);
    Evaluator ev(compiled);

    // DFS in lexicographic order (node-major, masks in domain order); a
    // must-true partial verdict completes with the lex-least suffix.
    auto make_result = [&](bool holds) {
        EvalEqResult r;
        r.holds = holds;
        if (holds) r.witness = Labeling{f.props, masks};
        return r;
    };

    std::function<bool(int)> go = [&](int depth) -> bool {
        if (++steps > opts.max_steps)
            throw ResourceLimitError("eval_eq: step budget exceeded");
        ev.begin(&masks, depth);
        Tri v = ev.sentence(compiled.root);
        if (v == Tri::f) return false;
        if (v == Tri::t) {
            for (int i = depth; i < n; ++i)
                masks[static_cast<std::size_t>(i)] =
                    domains[static_cast<std::size_t>(i)].empty()
                        ? 0
                        : domains[static_cast<std::size_t>(i)][0];
            return true;
        }
        assert(depth < n);
        for (std::uint32_t m : domains[static_cast<std::size_t>(depth)]) {
            masks[static_cast<std::size_t>(depth)] = m;
            if (go(depth + 1)) return true;
        }
        masks[static_cast<std::size_t>(depth)] = 0;
        return false;
    };

    return make_result(go(0));
}

// ---------------------------------------------------------------------------
// Interpretations
// ---------------------------------------------------------------------------

LabeledGraph apply_interpretation(const LabeledGraph& g, const Interpretation& I,
                                  const EvalOptions& opts) {
    EvalOptions o = opts;
    if (!o.autos) o.autos = &I.autos;
    LabeledGraph out;
    out.node_count = g.node_count;
    out.labels.assign(static_cast<std::size_t>(g.node_count), {});
    for (const auto& [sym, sf] : I.state_defs) {
        for (int v : eval_state(g, sf, o)) out.labels[static_cast<std::size_t>(v)].push_back(sym);
    }
    for (const auto& [sym, pf] : I.path_defs) {
        for (auto [u, v] : eval_path(g, pf, o)) out.edges.push_back({u, sym, v});
    }
    out.normalize();
    return out;
}

namespace {

struct Substituter {
    const Interpretation& I;
    const std::set<std::string> bound; // quantified props stay untouched
    std::unordered_map<const void*, StatePtr> state_memo;
    std::unordered_map<const void*, PathPtr> path_memo;

    StatePtr walk(const StatePtr& s) {
        if (!s) return nullptr;
        auto it = state_memo.find(s.get());
        if (it != state_memo.end()) return it->second;
        StatePtr out;
        switch (s->kind) {
            case StateFormula::Kind::top: out = s; break;
            case StateFormula::Kind::prop: {
                if (bound.count(s->prop)) {
                    out = s;
                } else {
                    auto def = I.state_defs.find(s->prop);
                    if (def == I.state_defs.end())
                        throw SemanticError("interpretation lacks node symbol '" + s->prop + "'");
                    out = def->second;
                }
                break;
            }
            case StateFormula::Kind::or_:
            case StateFormula::Kind::and_: {
                std::vector<StatePtr> kids;
                for (const auto& kid : s->kids) kids.push_back(walk(kid));
                out = s->kind == StateFormula::Kind::or_ ? s_or(std::move(kids))
                                                         : s_and(std::move(kids));
                break;
            }
            case StateFormula::Kind::not_: out = s_not(walk(s->sub)); break;
            case StateFormula::Kind::exists_path:
                out = s_exists_path(walk(s->path), walk(s->sub));
                break;
            case StateFormula::Kind::loop: out = s_loop(walk(s->path)); break;
        }
        state_memo.emplace(s.get(), out);
        return out;
    }

    PathPtr walk(const PathPtr& p) {
        if (!p) return nullptr;
        auto it = path_memo.find(p.get());
        if (it != path_memo.end()) return it->second;
        PathPtr out;
        switch (p->kind) {
            case PathExpr::Kind::edge: {
                auto def = I.path_defs.find(p->symbol);
                if (def == I.path_defs.end())
                    throw SemanticError("interpretation lacks edge symbol '" + p->symbol + "'");
                out = def->second;
                break;
            }
            case PathExpr::Kind::test: out = p_test(walk(p->test)); break;
            case PathExpr::Kind::alt:
            case PathExpr::Kind::seq: {
                std::vector<PathPtr> kids;
                for (const auto& kid : p->kids) kids.push_back(walk(kid));
                out = p->kind == PathExpr::Kind::alt ? p_alt(std::move(kids))
                                                     : p_seq(std::move(kids));
                break;
            }
            case PathExpr::Kind::star: out = p_star(walk(p->kids[0])); break;
            case PathExpr::Kind::inv: out = p_inv(walk(p->kids[0])); break;
            case PathExpr::Kind::cap: out = p_cap(walk(p->kids[0]), walk(p->kids[1])); break;
            case PathExpr::Kind::auto_: out = p; break; // registry handled by caller
        }
        path_memo.emplace(p.get(), out);
        return out;
    }

    SentencePtr walk(const SentencePtr& s) {
        if (!s) return nullptr;
        switch (s->kind) {
            case Sentence::Kind::exists_state: return sen_e(walk(s->state));
            case Sentence::Kind::not_: return sen_not(walk(s->kids[0]));
            case Sentence::Kind::or_:
            case Sentence::Kind::and_: {
                std::vector<SentencePtr> kids;
                for (const auto& kid : s->kids) kids.push_back(walk(kid));
                return s->kind == Sentence::Kind::or_ ? sen_or(std::move(kids))
                                                      : sen_and(std::move(kids));
            }
        }
        return nullptr;
    }
};

} // namespace

EQSentence backward_translate(const EQSentence& f, const Interpretation& I) {
    Substituter sub{I, {f.props.begin(), f.props.end()}, {}, {}};
    EQSentence out;
    out.props = f.props;
    out.body = sub.walk(f.body);
    out.autos = I.autos;
    for (const auto& [name, a] : f.autos) {
        TrackingAutomaton translated = a;
        for (auto& t : translated.transitions) t.label = sub.walk(t.label);
        if (out.autos.count(name))
            throw SemanticError("automaton name '" + name + "' used by both formula and interpretation");
        out.autos.emplace(name, std::move(translated));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural equality
// ---------------------------------------------------------------------------

bool equal(const StatePtr& a, const StatePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b || a->kind != b->kind) return false;
    if (a->prop != b->prop || a->kids.size() != b->kids.size()) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!equal(a->kids[i], b->kids[i])) return false;
    return equal(a->sub, b->sub) && equal(a->path, b->path);
}

bool equal(const PathPtr& a, const PathPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b || a->kind != b->kind) return false;
    if (a->symbol != b->symbol || a->auto_name != b->auto_name ||
        a->auto_from != b->auto_from || a->auto_to != b->auto_to ||
        a->kids.size() != b->kids.size())
        return false;
    if (!equal(a->test, b->test)) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!equal(a->kids[i], b->kids[i])) return false;
    return true;
}

bool equal(const SentencePtr& a, const SentencePtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b || a->kind != b->kind || a->kids.size() != b->kids.size()) return false;
    if (!equal(a->state, b->state)) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!equal(a->kids[i], b->kids[i])) return false;
    return true;
}

bool equal(const EQSentence& a, const EQSentence& b) {
    if (a.props != b.props) return false;
    if (!equal(a.body, b.body)) return false;
    if (a.autos.size() != b.autos.size()) return false;
    for (const auto& [name, aa] : a.autos) {
        auto it = b.autos.find(name);
        if (it == b.autos.end()) return false;
        if (aa.states != it->second.states) return false;
        if (aa.transitions.size() != it->second.transitions.size()) return false;
        for (std::size_t i = 0; i < aa.transitions.size(); ++i) {
            const auto& x = aa.transitions[i];
            const auto& y = it->second.transitions[i];
            if (x.from != y.from || x.to != y.to || !equal(x.label, y.label)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Symbol collection
// ---------------------------------------------------------------------------

namespace {

struct SymbolWalker {
    FormulaSymbols out;
    std::set<const void*> seen;

    void walk(const StatePtr& s) {
        if (!s || !seen.insert(s.get()).second) return;
        if (s->kind == StateFormula::Kind::prop) out.props.insert(s->prop);
        for (const auto& k : s->kids) walk(k);
        walk(s->sub);
        walk(s->path);
    }
    void walk(const PathPtr& p) {
        if (!p || !seen.insert(p.get()).second) return;
        if (p->kind == PathExpr::Kind::edge) out.edges.insert(p->symbol);
        walk(p->test);
        for (const auto& k : p->kids) walk(k);
    }
    void walk(const SentencePtr& s) {
        if (!s || !seen.insert(s.get()).second) return;
        walk(s->state);
        for (const auto& k : s->kids) walk(k);
    }
};

} // namespace

FormulaSymbols collect_symbols(const EQSentence& f) {
    SymbolWalker w;
    w.walk(f.body);
    for (const auto& [name, a] : f.autos) {
        (void)name;
        for (const auto& t : a.transitions) w.walk(t.label);
    }
    return std::move(w.out);
}

// ---------------------------------------------------------------------------
// S-expressions
// ---------------------------------------------------------------------------

namespace {

struct Printer {
    std::ostringstream os;

    void atom(const std::string& a) { os << a; }

    void print(const StatePtr& s) {
        switch (s->kind) {
            case StateFormula::Kind::top: os << "(top)"; break;
            case StateFormula::Kind::prop: os << "(prop " << s->prop << ")"; break;
            case StateFormula::Kind::or_:
            case StateFormula::Kind::and_:
                os << (s->kind == StateFormula::Kind::or_ ? "(or" : "(and");
                for (const auto& k : s->kids) {
                    os << ' ';
                    print(k);
                }
                os << ')';
                break;
            case StateFormula::Kind::not_:
                os << "(not ";
                print(s->sub);
                os << ')';
                break;
            case StateFormula::Kind::exists_path:
                os << "(ex-path ";
                print(s->path);
                os << ' ';
                print(s->sub);
                os << ')';
                break;
            case StateFormula::Kind::loop:
                os << "(loop ";
                print(s->path);
                os << ')';
                break;
        }
    }

    void print(const PathPtr& p) {
        switch (p->kind) {
            case PathExpr::Kind::edge: os << "(edge " << p->symbol << ")"; break;
            case PathExpr::Kind::test:
                os << "(test ";
                print(p->test);
                os << ')';
                break;
            case PathExpr::Kind::alt:
            case PathExpr::Kind::seq:
                os << (p->kind == PathExpr::Kind::alt ? "(alt" : "(seq");
                for (const auto& k : p->kids) {
                    os << ' ';
                    print(k);
                }
                os << ')';
                break;
            case PathExpr::Kind::star:
                os << "(star ";
                print(p->kids[0]);
                os << ')';
                break;
            case PathExpr::Kind::inv:
                os << "(inv ";
                print(p->kids[0]);
                os << ')';
                break;
            case PathExpr::Kind::cap:
                os << "(cap ";
                print(p->kids[0]);
                os << ' ';
                print(p->kids[1]);
                os << ')';
                break;
            case PathExpr::Kind::auto_:
                os << "(auto " << p->auto_name << ' ' << p->auto_from << ' ' << p->auto_to << ')';
                break;
        }
    }

    void print(const SentencePtr& s) {
        switch (s->kind) {
            case Sentence::Kind::exists_state:
                os << "(E ";
                print(s->state);
                os << ')';
                break;
            case Sentence::Kind::not_:
                os << "(not ";
                print(s->kids[0]);
                os << ')';
                break;
            case Sentence::Kind::or_:
            case Sentence::Kind::and_:
                os << (s->kind == Sentence::Kind::or_ ? "(or" : "(and");
                for (const auto& k : s->kids) {
                    os << ' ';
                    print(k);
                }
                os << ')';
                break;
        }
    }
};

} // namespace

std::string print_sexpr(const StatePtr& s) {
    Printer p;
    p.print(s);
    return p.os.str();
}

std::string print_sexpr(const PathPtr& path) {
    Printer p;
    p.print(path);
    return p.os.str();
}

std::string print_sexpr(const SentencePtr& s) {
    Printer p;
    p.print(s);
    return p.os.str();
}

std::string print_sexpr(const EQSentence& f) {
    Printer p;
    bool exists = !f.props.empty();
    if (!f.autos.empty()) {
        p.os << "(with-autos (";
        bool first_auto = true;
        for (const auto& [name, a] : f.autos) {
            if (!first_auto) p.os << ' ';
            first_auto = false;
            p.os << '(' << name << " (";
            for (std::size_t i = 0; i < a.transitions.size(); ++i) {
                if (i) p.os << ' ';
                p.os << '(' << a.transitions[i].from << ' ';
                p.print(a.transitions[i].label);
                p.os << ' ' << a.transitions[i].to << ')';
            }
            p.os << "))";
        }
        p.os << ") ";
    }
    if (exists) {
        p.os << "(exists (";
        for (std::size_t i = 0; i < f.props.size(); ++i) p.os << (i ? " " : "") << f.props[i];
        p.os << ") ";
    }
    p.print(f.body);
    if (exists) p.os << ')';
    if (!f.autos.empty()) p.os << ')';
    return p.os.str();
}

// --- parser ------------------------------------------------------------------

namespace {

struct SNode {
    // atom when kids empty and !is_list
    bool is_list = false;
    std::string atom;
    std::vector<SNode> kids;
    int line = 1, col = 1;
};

struct Lexer {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    explicit Lexer(const std::string& t) : text(t) {}

    void advance() {
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }

    void skip_ws() {
        while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) != 0))
            advance();
    }

    bool done() {
        skip_ws();
        return pos >= text.size();
    }

    SNode next() {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unexpected end of input", line, col);
        SNode node;
        node.line = line;
        node.col = col;
        if (text[pos] == '(') {
            node.is_list = true;
            advance();
            while (true) {
                skip_ws();
                if (pos >= text.size()) throw ParseError("unbalanced '('", node.line, node.col);
                if (text[pos] == ')') {
                    advance();
                    return node;
                }
                node.kids.push_back(next());
            }
        }
        if (text[pos] == ')') throw ParseError("unexpected ')'", line, col);
        std::string a;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')') {
            a += text[pos];
            advance();
        }
        node.atom = a;
        return node;
    }
};

struct SParser {
    const SNode& head_check(const SNode& n, const char* what) {
        if (!n.is_list || n.kids.empty() || n.kids[0].is_list)
            throw ParseError(std::string("expected ") + what, n.line, n.col);
        return n.kids[0];
    }

    [[noreturn]] void fail(const SNode& n, const std::string& msg) {
        throw ParseError(msg, n.line, n.col);
    }

    void arity(const SNode& n, std::size_t lo, std::size_t hi) {
        std::size_t args = n.kids.size() - 1;
        if (args < lo || args > hi)
            fail(n, "form '" + n.kids[0].atom + "' has wrong arity");
    }

    std::string atom(const SNode& n) {
        if (n.is_list) fail(n, "expected an atom");
        return n.atom;
    }

    StatePtr state(const SNode& n) {
        const std::string op = head_check(n, "a state formula").atom;
        if (op == "top") {
            arity(n, 0, 0);
            return s_top();
        }
        if (op == "prop") {
            arity(n, 1, 1);
            return s_prop(atom(n.kids[1]));
        }
        if (op == "or" || op == "and") {
            arity(n, 2, SIZE_MAX);
            std::vector<StatePtr> kids;
            for (std::size_t i = 1; i < n.kids.size(); ++i) kids.push_back(state(n.kids[i]));
            return op == "or" ? s_or(std::move(kids)) : s_and(std::move(kids));
        }
        if (op == "not") {
            arity(n, 1, 1);
            return s_not(state(n.kids[1]));
        }
        if (op == "ex-path") {
            arity(n, 2, 2);
            return s_exists_path(path(n.kids[1]), state(n.kids[2]));
        }
        if (op == "loop") {
            arity(n, 1, 1);
            return s_loop(path(n.kids[1]));
        }
        fail(n, "unknown state form '" + op + "'");
    }

    PathPtr path(const SNode& n) {
        const std::string op = head_check(n, "a path formula").atom;
        if (op == "edge") {
            arity(n, 1, 1);
            return p_edge(atom(n.kids[1]));
        }
        if (op == "inv") {
            arity(n, 1, 1);
            return p_inv(path(n.kids[1]));
        }
        if (op == "test") {
            arity(n, 1, 1);
            return p_test(state(n.kids[1]));
        }
        if (op == "alt" || op == "seq") {
            std::vector<PathPtr> kids;
            for (std::size_t i = 1; i < n.kids.size(); ++i) kids.push_back(path(n.kids[i]));
            if (op == "seq" && kids.empty()) fail(n, "empty (seq)");
            return op == "alt" ? p_alt(std::move(kids)) : p_seq(std::move(kids));
        }
        if (op == "star") {
            arity(n, 1, 1);
            return p_star(path(n.kids[1]));
        }
        if (op == "cap") {
            arity(n, 2, 2);
            return p_cap(path(n.kids[1]), path(n.kids[2]));
        }
        if (op == "auto") {
            arity(n, 3, 3);
            return p_auto(atom(n.kids[1]), atom(n.kids[2]), atom(n.kids[3]));
        }
        fail(n, "unknown path form '" + op + "'");
    }

    SentencePtr sentence(const SNode& n) {
        const std::string op = head_check(n, "a sentence").atom;
        if (op == "E") {
            arity(n, 1, 1);
            return sen_e(state(n.kids[1]));
        }
        if (op == "not") {
            arity(n, 1, 1);
            return sen_not(sentence(n.kids[1]));
        }
        if (op == "or" || op == "and") {
            arity(n, 2, SIZE_MAX);
            std::vector<SentencePtr> kids;
            for (std::size_t i = 1; i < n.kids.size(); ++i) kids.push_back(sentence(n.kids[i]));
            return op == "or" ? sen_or(std::move(kids)) : sen_and(std::move(kids));
        }
        fail(n, "unknown sentence form '" + op + "'");
    }

    EQSentence eq(const SNode& n) {
        EQSentence out;
        const SNode* cur = &n;
        if (cur->is_list && !cur->kids.empty() && !cur->kids[0].is_list &&
            cur->kids[0].atom == "with-autos") {
            arity(*cur, 2, 2);
            const SNode& defs = cur->kids[1];
            if (!defs.is_list) fail(defs, "with-autos expects a definition list");
            for (const SNode& def : defs.kids) {
                if (!def.is_list || def.kids.size() != 2 || def.kids[0].is_list ||
                    !def.kids[1].is_list)
                    fail(def, "automaton definition must be (NAME ((q path q') ...))");
                TrackingAutomaton a;
                std::set<std::string> states;
                for (const SNode& t : def.kids[1].kids) {
                    if (!t.is_list || t.kids.size() != 3)
                        fail(t, "automaton transition must be (q path q')");
                    TrackingAutomaton::Transition tr;
                    tr.from = atom(t.kids[0]);
                    tr.label = path(t.kids[1]);
                    tr.to = atom(t.kids[2]);
                    states.insert(tr.from);
                    states.insert(tr.to);
                    a.transitions.push_back(std::move(tr));
                }
                a.states.assign(states.begin(), states.end());
                out.autos.emplace(def.kids[0].atom, std::move(a));
            }
            cur = &cur->kids[2];
        }
        if (cur->is_list && !cur->kids.empty() && !cur->kids[0].is_list &&
            cur->kids[0].atom == "exists") {
            arity(*cur, 2, 2);
            const SNode& props = cur->kids[1];
            if (!props.is_list) fail(props, "exists expects a prop list");
            for (const SNode& p : props.kids) out.props.push_back(atom(p));
            out.body = sentence(cur->kids[2]);
        } else {
            out.body = sentence(*cur);
        }
        return out;
    }
};

} // namespace

EQSentence parse_eq_sentence(const std::string& text) {
    Lexer lex(text);
    SNode root = lex.next();
    if (!lex.done()) throw ParseError("trailing input after formula", lex.line, lex.col);
    SParser p;
    return p.eq(root);
}

} // namespace tcg
