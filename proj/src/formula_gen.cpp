#include "tcg/formula_gen.hpp"

#include <algorithm>
#include <cassert>

namespace tcg {

namespace {

int delta(int M, int i, int j) {
    int d = (j - i) % M;
    return d < 0 ? d + M : d;
}

std::string tsm_prop(int i) { return "tsm" + std::to_string(i); }

// Shared builder for the closed and mixed constructions.  Edge symbols list
// the Gamma_M half in use: closed graphs carry only "<=" edges.
struct RealizabilityBuilder {
    int M;
    bool mixed;
    std::vector<std::pair<Cmp, int>> edge_syms; // (cmp, weight)
    std::map<std::pair<int, int>, PathPtr> small;
    PathPtr succ = p_edge(kSuccSymbol);

    explicit RealizabilityBuilder(int M_, bool mixed_) : M(M_), mixed(mixed_) {
        for (int w = -(M - 1); w <= M - 1; ++w) {
            edge_syms.emplace_back(Cmp::le, w);
            if (mixed) edge_syms.emplace_back(Cmp::lt, w);
        }
    }

    StatePtr prop(int i) { return s_prop(tsm_prop(i)); }
    PathPtr edge(Cmp c, int w) { return p_edge(weight_symbol(c, w)); }

    SentencePtr partition() {
        std::vector<StatePtr> alts;
        for (int i = 0; i < M; ++i) {
            std::vector<StatePtr> conj{prop(i)};
            for (int j = 0; j < M; ++j)
                if (j != i) conj.push_back(s_not(prop(j)));
            alts.push_back(s_and(std::move(conj)));
        }
        return sen_forall(s_or(std::move(alts)));
    }

    PathPtr big_path() {
        std::vector<PathPtr> alts;
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int k = 0; k < M; ++k)
                    if (delta(M, i, j) + delta(M, j, k) >= M)
                        alts.push_back(p_seq({p_test(prop(i)), p_plus(succ), p_test(prop(j)),
                                              p_plus(succ), p_test(prop(k)), p_star(succ)}));
        return p_alt(std::move(alts));
    }

    // SmallPath(i,j) relates u to v iff u <= v, residues are i at u and j at
    // v, and the pair is not tsm-big.
    PathPtr small_path(int i, int j) {
        auto found = small.find({i, j});
        if (found != small.end()) return found->second;
        PathPtr out;
        if (i <= j) {
            std::vector<PathPtr> steps;
            for (int k = i; k <= j; ++k)
                for (int l = k; l <= j; ++l)
                    steps.push_back(p_seq({p_test(prop(k)), succ, p_test(prop(l))}));
            out = p_seq({p_test(prop(i)), p_star(p_alt(std::move(steps))), p_test(prop(j))});
        } else {
            std::vector<PathPtr> alts;
            for (int k = i; k <= M - 1; ++k)
                for (int l = 0; l <= j; ++l)
                    alts.push_back(p_seq({small_path(i, k), succ, small_path(l, j)}));
            out = p_alt(std::move(alts));
        }
        small.emplace(std::make_pair(i, j), out);
        return out;
    }

    SentencePtr forward(const PathPtr& big) {
        std::vector<StatePtr> not_big_violations;
        for (auto [c, w] : edge_syms)
            not_big_violations.push_back(s_loop(p_seq({big, p_inv(edge(c, w))})));
        std::vector<StatePtr> residue_violations;
        for (auto [c, w] : edge_syms)
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    if (delta(M, i, j) > w)
                        residue_violations.push_back(
                            s_loop(p_seq({p_test(prop(i)), edge(c, w), p_test(prop(j)),
                                          p_plus(p_inv(succ))})));
        return sen_and({sen_not(sen_e(s_or(std::move(not_big_violations)))),
                        sen_not(sen_e(s_or(std::move(residue_violations))))});
    }

    SentencePtr backward() {
        std::vector<StatePtr> violations;
        for (auto [c, w] : edge_syms)
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    if (delta(M, i, j) < -w)
                        violations.push_back(s_loop(p_seq({small_path(i, j), edge(c, w)})));
        return sen_not(sen_e(s_or(std::move(violations))));
    }

    // Fractional order relations (mixed graphs only); intersection width 2.
    PathPtr frac_path(bool strict) {
        std::vector<PathPtr> alts;
        for (int w = -(M - 1); w <= M - 1; ++w) {
            std::vector<PathPtr> edges;
            edges.push_back(edge(Cmp::lt, w));
            if (!strict) edges.push_back(edge(Cmp::le, w));
            std::vector<PathPtr> tight;
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j) {
                    if (delta(M, i, j) == w) tight.push_back(small_path(i, j));
                    if (delta(M, j, i) == -w) tight.push_back(p_inv(small_path(j, i)));
                }
            alts.push_back(p_cap(p_alt(std::move(edges)), p_alt(std::move(tight))));
        }
        if (!strict)
            for (int i = 0; i < M; ++i)
                alts.push_back(p_seq({p_test(prop(i)), p_inv(succ), p_test(prop(i))}));
        return p_alt(std::move(alts));
    }
};

RealizabilityFormula gen_realizability(int M, bool mixed) {
    if (M < 1) throw SemanticError("M must be >= 1");
    RealizabilityBuilder b(M, mixed);

    RealizabilityFormula out;
    out.M = M;
    out.partition = b.partition();
    out.big_path = b.big_path();
    out.forward = b.forward(out.big_path);
    out.backward = b.backward();

    std::vector<SentencePtr> conj{out.partition, out.forward, out.backward};
    if (mixed) {
        out.gt_fr = b.frac_path(true);
        out.geq_fr = b.frac_path(false);
        conj.push_back(sen_not(sen_e(s_loop(p_seq({out.gt_fr, p_star(out.geq_fr)})))));
    }
    out.small_path = b.small;
    out.sentence.body = sen_and(std::move(conj));
    for (int i = 0; i < M; ++i) out.sentence.props.push_back(tsm_prop(i));
    return out;
}

} // namespace

RealizabilityFormula gen_closed_realizability(int M) { return gen_realizability(M, false); }
RealizabilityFormula gen_mixed_realizability(int M) { return gen_realizability(M, true); }

EvalOptions realizability_eval_options(int M) {
    EvalOptions opts;
    std::set<std::string> gamma{kSuccSymbol};
    for (int w = -(M - 1); w <= M - 1; ++w) {
        gamma.insert(weight_symbol(Cmp::le, w));
        gamma.insert(weight_symbol(Cmp::lt, w));
    }
    opts.gamma = gamma;
    opts.sigma = std::set<std::string>{};
    return opts;
}

std::vector<std::vector<std::uint32_t>> tsm_domains(int node_count, int M) {
    std::vector<std::uint32_t> masks;
    for (int i = 0; i < M; ++i) masks.push_back(1u << i);
    return std::vector<std::vector<std::uint32_t>>(static_cast<std::size_t>(node_count), masks);
}

// ---------------------------------------------------------------------------
// Timing interpretation
// ---------------------------------------------------------------------------

TimingFeatures TimingFeatures::of(const SystemAutomaton& a) {
    TimingFeatures f;
    f.cc_diagonals = a.uses_cc_diagonals();
    f.dc_diagonals = a.uses_dc_diagonals();
    f.age = a.uses_age();
    f.event_clocks = a.uses_event_clocks();
    f.renamings = a.uses_renamings();
    return f;
}

TimingAlphabet TimingAlphabet::of(const SystemAutomaton& a) {
    TimingAlphabet out;
    out.clocks = a.clocks;
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        out.ds.push_back(d);
    }
    out.props = a.props;
    return out;
}

namespace {

struct InterpBuilder {
    const TimingAlphabet& ab;
    const TimingFeatures& feats;
    PathPtr succ = p_edge(kSuccSymbol);
    std::map<std::string, PathPtr> reset_paths;
    AutoRegistry autos;

    std::string auto_state(const std::string& x) const { return "q_" + x; }

    PathPtr reset_path(const std::string& x) {
        auto it = reset_paths.find(x);
        if (it != reset_paths.end()) return it->second;
        StatePtr reset = s_prop(ins_reset(x).atom());
        PathPtr p = p_seq({p_inv(succ), p_star(p_seq({p_test(s_not(reset)), p_inv(succ)})),
                           p_test(reset)});
        reset_paths.emplace(x, p);
        return p;
    }

    // Relates the reset of x to any node whose pre-state value of x2 was born
    // there: follow the tracking automaton, then step off the carrying node.
    PathPtr origin_path(const std::string& x, const std::string& x2) {
        return p_seq({p_test(s_prop(ins_reset(x).atom())),
                      p_auto("track", auto_state(x), auto_state(x2)), succ});
    }

    // Upper-bound terms: pairs (u, v) that must carry an edge (u, cmp, c, v).
    std::vector<PathPtr> upper_terms(Cmp cmp, int c) {
        std::vector<PathPtr> terms;
        auto guard = [&](const std::string& x) { return s_prop(ins_guard_upper(x, cmp, c).atom()); };
        if (!feats.renamings) {
            for (const auto& x : ab.clocks)
                terms.push_back(p_seq({p_inv(reset_path(x)), p_test(guard(x))}));
            if (feats.age)
                for (const auto& d : ab.ds)
                    terms.push_back(
                        p_seq({p_edge(d), p_test(s_prop(ins_age_upper(d, cmp, c).atom()))}));
            if (feats.cc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& y : ab.clocks)
                        terms.push_back(p_seq({p_inv(reset_path(x)),
                                               p_test(s_prop(ins_diag_cc(x, y, cmp, c).atom())),
                                               reset_path(y)}));
            if (feats.dc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& d : ab.ds) {
                        terms.push_back(p_seq({p_inv(reset_path(x)),
                                               p_test(s_prop(ins_diag_xd(x, d, cmp, c).atom())),
                                               p_inv(p_edge(d))}));
                        terms.push_back(p_seq({p_edge(d),
                                               p_test(s_prop(ins_diag_dx(d, x, cmp, c).atom())),
                                               reset_path(x)}));
                    }
        } else {
            for (const auto& x : ab.clocks)
                for (const auto& x2 : ab.clocks)
                    terms.push_back(p_seq({origin_path(x, x2), p_test(guard(x2))}));
            if (feats.age)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& d : ab.ds)
                            terms.push_back(p_seq(
                                {origin_path(x, x2), p_test(s_prop(ins_rename_dc(d, x2).atom())),
                                 p_edge(d), p_test(s_prop(ins_age_upper(d, cmp, c).atom()))}));
            if (feats.cc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& y : ab.clocks)
                            for (const auto& y2 : ab.clocks)
                                terms.push_back(p_seq(
                                    {origin_path(x, x2),
                                     p_test(s_prop(ins_diag_cc(x2, y2, cmp, c).atom())),
                                     p_inv(origin_path(y, y2))}));
            if (feats.dc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& y : ab.clocks)
                            for (const auto& y2 : ab.clocks)
                                for (const auto& d : ab.ds) {
                                    terms.push_back(p_seq(
                                        {origin_path(x, x2),
                                         p_test(s_prop(ins_diag_xd(x2, d, cmp, c).atom())),
                                         p_inv(p_edge(d)),
                                         p_test(s_prop(ins_rename_dc(d, y2).atom())),
                                         p_inv(origin_path(y, y2))}));
                                    terms.push_back(p_seq(
                                        {origin_path(y, y2),
                                         p_test(s_prop(ins_rename_dc(d, y2).atom())), p_edge(d),
                                         p_test(s_prop(ins_diag_dx(d, x2, cmp, c).atom())),
                                         p_inv(origin_path(x, x2))}));
                                }
        }
        if (feats.event_clocks)
            for (const auto& a : ab.props)
                terms.push_back(p_seq({p_test(s_prop(ins_event_upper(a, cmp, c).atom())), succ,
                                       p_star(p_seq({p_test(s_not(s_prop(a))), succ})),
                                       p_test(s_prop(a))}));
        return terms;
    }

    // Lower-bound terms for edges (u, cmp, -c, v).
    std::vector<PathPtr> lower_terms(Cmp cmp, int c) {
        std::vector<PathPtr> terms;
        auto guard = [&](const std::string& x) { return s_prop(ins_guard_lower(x, cmp, c).atom()); };
        if (!feats.renamings) {
            for (const auto& x : ab.clocks)
                terms.push_back(p_seq({p_test(guard(x)), reset_path(x)}));
            if (feats.age)
                for (const auto& d : ab.ds)
                    terms.push_back(
                        p_seq({p_test(s_prop(ins_age_lower(d, cmp, c).atom())), p_inv(p_edge(d))}));
            if (feats.cc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& y : ab.clocks)
                        terms.push_back(p_seq({p_inv(reset_path(y)),
                                               p_test(s_prop(ins_diag_cc_low(x, y, cmp, c).atom())),
                                               reset_path(x)}));
            if (feats.dc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& d : ab.ds) {
                        terms.push_back(p_seq({p_inv(reset_path(x)),
                                               p_test(s_prop(ins_diag_dx_low(d, x, cmp, c).atom())),
                                               p_inv(p_edge(d))}));
                        terms.push_back(p_seq({p_edge(d),
                                               p_test(s_prop(ins_diag_xd_low(x, d, cmp, c).atom())),
                                               reset_path(x)}));
                    }
        } else {
            for (const auto& x : ab.clocks)
                for (const auto& x2 : ab.clocks)
                    terms.push_back(p_seq({p_test(guard(x2)), p_inv(origin_path(x, x2))}));
            if (feats.age)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& d : ab.ds)
                            terms.push_back(p_seq(
                                {p_test(s_prop(ins_age_lower(d, cmp, c).atom())), p_inv(p_edge(d)),
                                 p_test(s_prop(ins_rename_dc(d, x2).atom())),
                                 p_inv(origin_path(x, x2))}));
            if (feats.cc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& y : ab.clocks)
                            for (const auto& y2 : ab.clocks)
                                terms.push_back(p_seq(
                                    {origin_path(y, y2),
                                     p_test(s_prop(ins_diag_cc_low(x2, y2, cmp, c).atom())),
                                     p_inv(origin_path(x, x2))}));
            if (feats.dc_diagonals)
                for (const auto& x : ab.clocks)
                    for (const auto& x2 : ab.clocks)
                        for (const auto& y : ab.clocks)
                            for (const auto& y2 : ab.clocks)
                                for (const auto& d : ab.ds) {
                                    terms.push_back(p_seq(
                                        {origin_path(x, x2),
                                         p_test(s_prop(ins_diag_dx_low(d, x2, cmp, c).atom())),
                                         p_inv(p_edge(d)),
                                         p_test(s_prop(ins_rename_dc(d, y2).atom())),
                                         p_inv(origin_path(y, y2))}));
                                    terms.push_back(p_seq(
                                        {origin_path(y, y2),
                                         p_test(s_prop(ins_rename_dc(d, y2).atom())), p_edge(d),
                                         p_test(s_prop(ins_diag_xd_low(x2, d, cmp, c).atom())),
                                         p_inv(origin_path(x, x2))}));
                                }
        }
        if (feats.event_clocks)
            for (const auto& a : ab.props)
                terms.push_back(p_inv(
                    p_seq({p_test(s_prop(ins_event_lower(a, cmp, c).atom())), succ,
                           p_star(p_seq({p_test(s_not(s_prop(a))), succ})), p_test(s_prop(a))})));
        return terms;
    }
};

} // namespace

TimingInterpretation gen_timing_interpretation(const TimingAlphabet& alphabet, int M,
                                               const TimingFeatures& features) {
    if (alphabet.clocks.empty() && alphabet.ds.empty() && alphabet.props.empty())
        throw SemanticError("timing interpretation needs a nonempty alphabet");
    TimingInterpretation out;
    out.M = M;
    out.features = features;

    InterpBuilder b{alphabet, features, p_edge(kSuccSymbol), {}, {}};
    if (features.renamings) {
        SystemAutomaton shell;
        shell.clocks = alphabet.clocks;
        for (const auto& d : alphabet.ds) shell.ds[d] = DsKind::stack;
        b.autos.emplace("track", build_tracking_automaton(shell));
    }

    out.interp.path_defs[kSuccSymbol] = p_edge(kSuccSymbol);
    for (Cmp cmp : {Cmp::le, Cmp::lt}) {
        for (int w = -(M - 1); w <= M - 1; ++w) {
            std::vector<PathPtr> terms;
            if (w >= 0) {
                auto up = b.upper_terms(cmp, w);
                terms.insert(terms.end(), up.begin(), up.end());
            }
            if (w <= 0) {
                auto low = b.lower_terms(cmp, -w);
                terms.insert(terms.end(), low.begin(), low.end());
            }
            out.interp.path_defs[weight_symbol(cmp, w)] = p_alt(std::move(terms));
        }
    }
    out.interp.autos = b.autos;
    out.reset_paths = b.reset_paths;
    return out;
}

std::set<std::string> timing_atom_space(const TimingAlphabet& ab, int M) {
    std::set<std::string> atoms;
    atoms.insert("nop");
    for (const auto& d : ab.ds) {
        atoms.insert(ins_write(d).atom());
        atoms.insert(ins_read(d).atom());
    }
    for (const auto& p : ab.props) atoms.insert(p);
    for (const auto& x : ab.clocks) atoms.insert(ins_reset(x).atom());
    for (Cmp cmp : {Cmp::le, Cmp::lt}) {
        for (int c = 0; c <= M - 1; ++c) {
            for (const auto& x : ab.clocks) {
                atoms.insert(ins_guard_upper(x, cmp, c).atom());
                atoms.insert(ins_guard_lower(x, cmp, c).atom());
            }
            for (const auto& d : ab.ds) {
                atoms.insert(ins_age_upper(d, cmp, c).atom());
                atoms.insert(ins_age_lower(d, cmp, c).atom());
            }
            for (const auto& x : ab.clocks)
                for (const auto& y : ab.clocks) {
                    atoms.insert(ins_diag_cc(x, y, cmp, c).atom());
                    atoms.insert(ins_diag_cc_low(x, y, cmp, c).atom());
                }
            for (const auto& x : ab.clocks)
                for (const auto& d : ab.ds) {
                    atoms.insert(ins_diag_dx(d, x, cmp, c).atom());
                    atoms.insert(ins_diag_dx_low(d, x, cmp, c).atom());
                    atoms.insert(ins_diag_xd(x, d, cmp, c).atom());
                    atoms.insert(ins_diag_xd_low(x, d, cmp, c).atom());
                }
            for (const auto& a : ab.props) {
                atoms.insert(ins_event_upper(a, cmp, c).atom());
                atoms.insert(ins_event_lower(a, cmp, c).atom());
            }
        }
    }
    for (const auto& x : ab.clocks)
        for (const auto& y : ab.clocks) atoms.insert(ins_rename_cc(x, y).atom());
    for (const auto& x : ab.clocks)
        for (const auto& d : ab.ds) {
            atoms.insert(ins_rename_cd(x, d).atom());
            atoms.insert(ins_rename_dc(d, x).atom());
        }
    return atoms;
}

EvalOptions interpretation_eval_options(const SystemAutomaton& a) {
    EvalOptions opts;
    std::set<std::string> sigma = a.atom_universe();
    auto space = timing_atom_space(TimingAlphabet::of(a), a.max_const);
    sigma.insert(space.begin(), space.end());
    opts.sigma = sigma;
    std::set<std::string> gamma{kSuccSymbol};
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        gamma.insert(d);
    }
    opts.gamma = gamma;
    return opts;
}

// ---------------------------------------------------------------------------
// System encoding
// ---------------------------------------------------------------------------

std::string state_prop(const std::string& q) { return "q:" + q; }

namespace {

std::vector<std::string> sorted_atoms(const SystemAutomaton& a) {
    auto u = a.atom_universe();
    return {u.begin(), u.end()};
}

StatePtr exact_label(const SystemAutomaton::Transition& t,
                     const std::vector<std::string>& universe) {
    std::set<std::string> present;
    for (const auto& i : t.label) present.insert(i.atom());
    std::vector<StatePtr> conj;
    for (const auto& atom : universe)
        conj.push_back(present.count(atom) ? s_prop(atom) : s_not(s_prop(atom)));
    return s_and(std::move(conj));
}

} // namespace

EQSentence gen_system_formula(const SystemAutomaton& a) {
    auto diags = validate(a);
    if (!diags.empty()) throw SemanticError("invalid system: " + join_diagnostics(diags));

    const auto universe = sorted_atoms(a);
    PathPtr succ = p_edge(kSuccSymbol);
    PathPtr pred = p_inv(succ);

    // state uniqueness
    std::vector<StatePtr> unique_alts;
    for (const auto& q : a.states) {
        std::vector<StatePtr> conj{s_prop(state_prop(q))};
        for (const auto& q2 : a.states)
            if (q2 != q) conj.push_back(s_not(s_prop(state_prop(q2))));
        unique_alts.push_back(s_and(std::move(conj)));
    }
    SentencePtr psi_state = sen_forall(s_or(std::move(unique_alts)));

    // transition consistency
    std::vector<StatePtr> inner_alts;
    for (const auto& t : a.transitions)
        inner_alts.push_back(s_and({s_prop(state_prop(t.to)),
                                    s_exists_path(pred, s_prop(state_prop(t.from))),
                                    exact_label(t, universe)}));
    SentencePtr trans_inner =
        sen_forall(s_implies(s_diamond(pred), s_or(std::move(inner_alts))));

    std::vector<StatePtr> init_alts;
    for (const auto& t : a.transitions)
        if (t.from == a.initial)
            init_alts.push_back(s_and({s_prop(state_prop(t.to)), exact_label(t, universe)}));
    SentencePtr trans_init =
        sen_forall(s_implies(s_not(s_diamond(pred)), s_or(std::move(init_alts))));

    std::vector<StatePtr> final_alts;
    for (const auto& q : a.finals) final_alts.push_back(s_prop(state_prop(q)));
    SentencePtr trans_final =
        sen_forall(s_implies(s_not(s_diamond(succ)), s_or(std::move(final_alts))));

    SentencePtr psi_trans = sen_and({trans_inner, trans_init, trans_final});

    // data structure policies
    std::vector<SentencePtr> ds_conj;
    for (const auto& [d, kind] : a.ds) {
        StatePtr w = s_prop(ins_write(d).atom());
        StatePtr r = s_prop(ins_read(d).atom());
        PathPtr dedge = p_edge(d);
        if (kind == DsKind::stack) {
            // well-nesting: from each write, skip balanced blocks and non-d
            // nodes, then close the loop over the matching read
            PathPtr walk = p_star(p_alt({p_seq({dedge, succ}),
                                         p_seq({p_test(s_not(s_or({w, r}))), succ})}));
            ds_conj.push_back(sen_forall(
                s_implies(w, s_loop(p_seq({succ, walk, p_inv(dedge)})))));
        } else {
            ds_conj.push_back(sen_not(sen_e(
                s_loop(p_seq({p_plus(succ), dedge, p_plus(succ), p_inv(dedge)})))));
        }
        ds_conj.push_back(sen_not(sen_e(s_loop(p_alt(
            {p_seq({p_plus(succ), dedge}), p_seq({p_plus(succ), p_inv(dedge), dedge}),
             p_seq({p_plus(succ), dedge, p_inv(dedge)})})))));
        ds_conj.push_back(sen_forall(s_iff(w, s_diamond(dedge))));
        ds_conj.push_back(sen_forall(s_iff(r, s_diamond(p_inv(dedge)))));
        // single-operation nodes
        ds_conj.push_back(sen_not(sen_e(s_and({w, r}))));
        for (const auto& [d2, kind2] : a.ds) {
            (void)kind2;
            if (d2 <= d) continue;
            ds_conj.push_back(sen_not(sen_e(
                s_and({s_or({w, r}), s_or({s_prop(ins_write(d2).atom()),
                                           s_prop(ins_read(d2).atom())})}))));
        }
    }
    SentencePtr psi_ds = sen_and(std::move(ds_conj));

    std::vector<SentencePtr> all{psi_state, psi_trans, psi_ds};

    if (a.msgs.size() > 1) {
        std::vector<SentencePtr> msg_conj;
        for (const auto& [d, kind] : a.ds) {
            (void)kind;
            std::vector<StatePtr> carried;
            for (const auto& m : a.msgs)
                carried.push_back(s_and({s_prop(m), s_exists_path(p_edge(d), s_prop(m))}));
            msg_conj.push_back(
                sen_forall(s_implies(s_prop(ins_write(d).atom()), s_or(std::move(carried)))));
        }
        for (const auto& m : a.msgs) {
            std::vector<StatePtr> conj;
            for (const auto& m2 : a.msgs)
                if (m2 != m) conj.push_back(s_not(s_prop(m2)));
            std::vector<StatePtr> some_op;
            for (const auto& [d, kind] : a.ds) {
                (void)kind;
                some_op.push_back(
                    s_or({s_prop(ins_write(d).atom()), s_prop(ins_read(d).atom())}));
            }
            conj.push_back(s_or(std::move(some_op)));
            msg_conj.push_back(sen_forall(s_implies(s_prop(m), s_and(std::move(conj)))));
        }
        all.push_back(sen_and(std::move(msg_conj)));
    }

    EQSentence out;
    out.props = universe;
    for (const auto& q : a.states) out.props.push_back(state_prop(q));
    out.body = sen_and(std::move(all));
    return out;
}

namespace {

// Every event-clock constraint needs a future occurrence of its prop; an
// unmatched prediction makes the run infeasible, so the encoding must refute
// those graphs too.
SentencePtr event_matching_conjunct(const SystemAutomaton& a) {
    PathPtr succ = p_edge(kSuccSymbol);
    std::vector<SentencePtr> conj;
    std::set<std::string> seen;
    for (const auto& t : a.transitions)
        for (const auto& i : t.label) {
            if (i.kind != Instruction::Kind::event_upper &&
                i.kind != Instruction::Kind::event_lower)
                continue;
            if (!seen.insert(i.atom()).second) continue;
            PathPtr to_next = p_seq({succ, p_star(p_seq({p_test(s_not(s_prop(i.name))), succ})),
                                     p_test(s_prop(i.name))});
            conj.push_back(sen_forall(s_implies(s_prop(i.atom()), s_diamond(to_next))));
        }
    return sen_and(std::move(conj));
}

} // namespace

EQSentence gen_emptiness_formula(const SystemAutomaton& a) {
    EQSentence sys = gen_system_formula(a);
    TimingFeatures feats = TimingFeatures::of(a);
    TimingInterpretation interp =
        gen_timing_interpretation(TimingAlphabet::of(a), a.max_const, feats);
    RealizabilityFormula mixed = gen_mixed_realizability(a.max_const);
    EQSentence realizable = backward_translate(mixed.sentence, interp.interp);

    EQSentence out;
    out.props = sys.props;
    for (const auto& p : realizable.props) {
        if (std::find(out.props.begin(), out.props.end(), p) != out.props.end())
            throw SemanticError("tsm prop '" + p + "' collides with a system atom");
        out.props.push_back(p);
    }
    std::vector<SentencePtr> conj{sys.body, realizable.body};
    if (feats.event_clocks) conj.push_back(event_matching_conjunct(a));
    out.body = sen_and(std::move(conj));
    out.autos = realizable.autos;
    return out;
}

namespace {

void collect_spec_symbols(const StatePtr& s, std::set<std::string>& props,
                          std::set<std::string>& edges, bool& has_cap);
void collect_spec_symbols(const PathPtr& p, std::set<std::string>& props,
                          std::set<std::string>& edges, bool& has_cap) {
    if (!p) return;
    if (p->kind == PathExpr::Kind::edge) edges.insert(p->symbol);
    if (p->kind == PathExpr::Kind::cap) has_cap = true;
    if (p->kind == PathExpr::Kind::auto_)
        throw SemanticError("specification may not use automaton atoms");
    collect_spec_symbols(p->test, props, edges, has_cap);
    for (const auto& k : p->kids) collect_spec_symbols(k, props, edges, has_cap);
}
void collect_spec_symbols(const StatePtr& s, std::set<std::string>& props,
                          std::set<std::string>& edges, bool& has_cap) {
    if (!s) return;
    if (s->kind == StateFormula::Kind::prop) props.insert(s->prop);
    collect_spec_symbols(s->path, props, edges, has_cap);
    collect_spec_symbols(s->sub, props, edges, has_cap);
    for (const auto& k : s->kids) collect_spec_symbols(k, props, edges, has_cap);
}
void collect_spec_symbols(const SentencePtr& s, std::set<std::string>& props,
                          std::set<std::string>& edges, bool& has_cap) {
    if (!s) return;
    collect_spec_symbols(s->state, props, edges, has_cap);
    for (const auto& k : s->kids) collect_spec_symbols(k, props, edges, has_cap);
}

} // namespace

EQSentence gen_modelcheck_formula(const SystemAutomaton& a, const SentencePtr& spec) {
    std::set<std::string> props, edges;
    bool has_cap = false;
    collect_spec_symbols(spec, props, edges, has_cap);
    if (has_cap) throw SemanticError("specification must be LCPDL (no path intersection)");
    for (const auto& p : props)
        if (std::find(a.props.begin(), a.props.end(), p) == a.props.end())
            throw SemanticError("specification symbol '" + p +
                                "' is not a declared atomic proposition");
    for (const auto& e : edges)
        if (e != kSuccSymbol && !a.ds.count(e))
            throw SemanticError("specification edge '" + e + "' is not succ or a data structure");

    EQSentence out = gen_emptiness_formula(a);
    out.body = sen_and({out.body, sen_not(spec)});
    return out;
}

EvalOptions system_eval_options(const SystemAutomaton& a) {
    // Atoms outside the quantifier prefix (the system never emits them)
    // denote the empty set on projected T-graphs; declaring the whole
    // instruction space keeps them legal in tests of the interpretation.
    EvalOptions opts = interpretation_eval_options(a);
    return opts;
}

std::vector<std::uint32_t> system_domain_masks(const SystemAutomaton& a, const EQSentence& f,
                                               bool with_tsm) {
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < f.props.size(); ++i) index[f.props[i]] = static_cast<int>(i);
    auto bit = [&](const std::string& p) {
        auto it = index.find(p);
        if (it == index.end()) throw SemanticError("prop '" + p + "' missing from formula");
        return 1u << it->second;
    };
    std::vector<std::uint32_t> masks;
    for (const auto& t : a.transitions) {
        std::uint32_t base = bit(state_prop(t.to));
        for (const auto& i : t.label) base |= bit(i.atom());
        if (with_tsm) {
            for (int r = 0; r < a.max_const; ++r)
                masks.push_back(base | bit("tsm" + std::to_string(r)));
        } else {
            masks.push_back(base);
        }
    }
    std::sort(masks.begin(), masks.end());
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    return masks;
}

} // namespace tcg
