#include "tcg/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Independent checkers
// ---------------------------------------------------------------------------

bool recheck_realization(const WeightedGraph& g, const Realization& ts) {
    if (static_cast<int>(ts.ts.size()) != g.node_count) return false;
    for (const auto& e : g.order_edges) {
        if (ts.ts[static_cast<std::size_t>(e.dst)] < ts.ts[static_cast<std::size_t>(e.src)])
            return false;
    }
    for (const auto& e : g.constraint_edges) {
        Rat diff = ts.ts[static_cast<std::size_t>(e.dst)] - ts.ts[static_cast<std::size_t>(e.src)];
        if (e.cmp == Cmp::lt) {
            if (!(diff < Rat(e.weight))) return false;
        } else {
            if (!(diff <= Rat(e.weight))) return false;
        }
    }
    return true;
}

namespace {

struct RunView {
    const SystemAutomaton& a;
    const Run& run;
    int n;
    // own DS matching (stack/queue simulation, independent of build_T_graph)
    std::map<int, int> read_to_write;
    // own origin scan: value held by clock x at the end of node i
    std::map<std::string, std::vector<int>> origin;
    std::map<std::string, std::vector<int>> ds_written_origin;

    RunView(const SystemAutomaton& a_, const Run& run_) : a(a_), run(run_) {
        n = static_cast<int>(run.instructions.size());
        std::map<std::string, std::vector<int>> open;
        for (int i = 0; i < n; ++i)
            for (const auto& ins : run.instructions[static_cast<std::size_t>(i)]) {
                if (ins.kind == Instruction::Kind::write) open[ins.ds].push_back(i);
                if (ins.kind == Instruction::Kind::read) {
                    auto& stack = open[ins.ds];
                    if (stack.empty()) continue;
                    if (a.ds.at(ins.ds) == DsKind::stack) {
                        read_to_write[i] = stack.back();
                        stack.pop_back();
                    } else {
                        read_to_write[i] = stack.front();
                        stack.erase(stack.begin());
                    }
                }
            }

        bool renamings = a.uses_renamings();
        for (const auto& x : a.clocks) origin[x].assign(static_cast<std::size_t>(n), -1);
        for (const auto& [d, kind] : a.ds) {
            (void)kind;
            ds_written_origin[d].assign(static_cast<std::size_t>(n), -1);
        }
        for (int i = 0; i < n; ++i) {
            for (const auto& ins : run.instructions[static_cast<std::size_t>(i)])
                if (ins.kind == Instruction::Kind::rename_dc && i > 0)
                    ds_written_origin[ins.ds][static_cast<std::size_t>(i)] =
                        origin[ins.clock][static_cast<std::size_t>(i) - 1];
            for (const auto& x : a.clocks) {
                int v = i == 0 ? -1 : origin[x][static_cast<std::size_t>(i) - 1];
                for (const auto& ins : run.instructions[static_cast<std::size_t>(i)]) {
                    if (ins.kind == Instruction::Kind::reset && ins.clock == x) v = i;
                    if (!renamings) continue;
                    if (ins.kind == Instruction::Kind::rename_cc && ins.clock == x && i > 0)
                        v = origin[ins.clock2][static_cast<std::size_t>(i) - 1];
                    if (ins.kind == Instruction::Kind::rename_cd && ins.clock == x) {
                        auto w = read_to_write.find(i);
                        if (w != read_to_write.end())
                            v = ds_written_origin[ins.ds][static_cast<std::size_t>(w->second)];
                    }
                }
                origin[x][static_cast<std::size_t>(i)] = v;
            }
        }
    }

    int clock_origin(const std::string& x, int i) const {
        return i > 0 ? origin.at(x)[static_cast<std::size_t>(i) - 1] : -1;
    }

    int ds_value_origin(const std::string& d, int i) const {
        auto w = read_to_write.find(i);
        if (w == read_to_write.end()) return -1;
        if (!a.uses_renamings()) return w->second;
        int o = ds_written_origin.at(d)[static_cast<std::size_t>(w->second)];
        return o >= 0 ? o : w->second;
    }

    int next_prop(int i, const std::string& p) const {
        for (int v = i + 1; v < n; ++v)
            for (const auto& ins : run.instructions[static_cast<std::size_t>(v)])
                if (ins.kind == Instruction::Kind::prop && ins.name == p) return v;
        return -1;
    }
};

bool holds(Cmp c, const Rat& lhs, int bound) {
    return c == Cmp::lt ? lhs < Rat(bound) : lhs <= Rat(bound);
}

} // namespace

std::vector<std::string> recheck_run_constraints(const SystemAutomaton& a, const Run& run_in,
                                                 const Realization& ts) {
    Run run = a.uses_renamings() ? autocomplete_renamings(a, run_in) : run_in;
    RunView view(a, run);
    std::vector<std::string> violations;
    if (static_cast<int>(ts.ts.size()) != view.n) {
        violations.push_back("timestamp vector has the wrong length");
        return violations;
    }
    auto at = [&](int i) { return ts.ts[static_cast<std::size_t>(i)]; };
    for (int i = 0; i + 1 < view.n; ++i)
        if (at(i + 1) < at(i)) violations.push_back("timestamps not monotone at " + std::to_string(i));

    for (int i = 0; i < view.n; ++i) {
        for (const auto& ins : run.instructions[static_cast<std::size_t>(i)]) {
            using K = Instruction::Kind;
            auto fail = [&](const std::string& what) {
                violations.push_back("position " + std::to_string(i) + ": " + what + " (" +
                                     ins.atom() + ")");
            };
            switch (ins.kind) {
                case K::guard_upper: {
                    int j = view.clock_origin(ins.clock, i);
                    if (j < 0) fail("guard before any reset");
                    else if (!holds(ins.cmp, at(i) - at(j), ins.constant)) fail("upper guard violated");
                    break;
                }
                case K::guard_lower: {
                    int j = view.clock_origin(ins.clock, i);
                    if (j < 0) fail("guard before any reset");
                    else if (!holds(ins.cmp, Rat(ins.constant) - (at(i) - at(j)), 0))
                        fail("lower guard violated");
                    break;
                }
                case K::age_upper: {
                    int b = view.ds_value_origin(ins.ds, i);
                    if (b < 0) fail("age constraint without a read");
                    else if (!holds(ins.cmp, at(i) - at(b), ins.constant)) fail("upper age violated");
                    break;
                }
                case K::age_lower: {
                    int b = view.ds_value_origin(ins.ds, i);
                    if (b < 0) fail("age constraint without a read");
                    else if (!holds(ins.cmp, Rat(ins.constant) - (at(i) - at(b)), 0))
                        fail("lower age violated");
                    break;
                }
                case K::diag_cc:
                case K::diag_cc_low: {
                    int j = view.clock_origin(ins.clock, i);
                    int k = view.clock_origin(ins.clock2, i);
                    if (j < 0 || k < 0) fail("diagonal before any reset");
                    else {
                        Rat value = (at(i) - at(j)) - (at(i) - at(k)); // x - y
                        bool ok = ins.kind == K::diag_cc
                                      ? holds(ins.cmp, value, ins.constant)
                                      : holds(ins.cmp, Rat(ins.constant) - value, 0);
                        if (!ok) fail("clock diagonal violated");
                    }
                    break;
                }
                case K::diag_dx:
                case K::diag_dx_low:
                case K::diag_xd:
                case K::diag_xd_low: {
                    int b = view.ds_value_origin(ins.ds, i);
                    int j = view.clock_origin(ins.clock, i);
                    if (b < 0 || j < 0) fail("clock-ds diagonal unmatched");
                    else {
                        Rat dval = at(i) - at(b);
                        Rat xval = at(i) - at(j);
                        Rat value = (ins.kind == K::diag_dx || ins.kind == K::diag_dx_low)
                                        ? dval - xval
                                        : xval - dval;
                        bool upper = ins.kind == K::diag_dx || ins.kind == K::diag_xd;
                        bool ok = upper ? holds(ins.cmp, value, ins.constant)
                                        : holds(ins.cmp, Rat(ins.constant) - value, 0);
                        if (!ok) fail("clock-ds diagonal violated");
                    }
                    break;
                }
                case K::event_upper: {
                    int v = view.next_prop(i, ins.name);
                    if (v < 0) fail("event prediction unmatched");
                    else if (!holds(ins.cmp, at(v) - at(i), ins.constant))
                        fail("upper event constraint violated");
                    break;
                }
                case K::event_lower: {
                    int v = view.next_prop(i, ins.name);
                    if (v < 0) fail("event prediction unmatched");
                    else if (!holds(ins.cmp, Rat(ins.constant) - (at(v) - at(i)), 0))
                        fail("lower event constraint violated");
                    break;
                }
                default: break;
            }
        }
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Bounded procedures
// ---------------------------------------------------------------------------

EmptinessResult check_emptiness_bounded(const SystemAutomaton& a, int bound) {
    EmptinessResult out;
    out.bound = bound;
    enumerate_runs(a, bound, [&](const Run& run) {
        FeasibilityResult f = feasible(a, run);
        if (!f.feasible) return true;
        auto violations = recheck_run_constraints(a, run, *f.ts);
        if (!violations.empty())
            throw std::logic_error("feasibility witness failed re-verification: " + violations[0]);
        out.found = true;
        out.run = run;
        out.ts = f.ts;
        return false;
    });
    return out;
}

ModelCheckResult model_check_bounded(const SystemAutomaton& a, const SentencePtr& spec,
                                     int bound) {
    // surface malformed specs before enumerating
    (void)gen_modelcheck_formula(a, spec);

    EvalOptions spec_opts;
    spec_opts.sigma = std::set<std::string>(a.props.begin(), a.props.end());
    std::set<std::string> gamma{kSuccSymbol};
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        gamma.insert(d);
    }
    spec_opts.gamma = gamma;

    ModelCheckResult out;
    out.bound = bound;
    enumerate_runs(a, bound, [&](const Run& run) {
        FeasibilityResult f = feasible(a, run);
        if (!f.feasible) return true;
        LabeledGraph g = build_T_graph(a, a.uses_renamings() ? autocomplete_renamings(a, run) : run);
        LabeledGraph ap = project(g, std::set<std::string>(a.props.begin(), a.props.end()));
        if (eval_sentence(ap, spec, spec_opts)) return true;
        // counterexample: re-verify feasibility and the violation independently
        auto violations = recheck_run_constraints(a, run, *f.ts);
        if (!violations.empty())
            throw std::logic_error("counterexample timestamps failed re-verification");
        if (eval_sentence(ap, spec, spec_opts))
            throw std::logic_error("counterexample does satisfy the specification");
        out.violated = true;
        out.run = run;
        out.ts = f.ts;
        out.counterexample = ap;
        return false;
    });
    return out;
}

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

namespace {

std::string run_id(const Run& run) {
    std::string id;
    for (std::size_t i = 0; i < run.instructions.size(); ++i) {
        if (i) id += ";";
        for (std::size_t j = 0; j < run.instructions[i].size(); ++j) {
            if (j) id += ",";
            id += run.instructions[i][j].atom();
        }
    }
    return id;
}

bool models_encoding(const SystemAutomaton& a, const EQSentence& psi,
                     const std::vector<std::uint32_t>& node_masks, const LabeledGraph& g) {
    EvalEqOptions opts;
    opts.base = system_eval_options(a);
    opts.domains = std::vector<std::vector<std::uint32_t>>(
        static_cast<std::size_t>(g.node_count), node_masks);
    return eval_eq(g, psi, opts).holds;
}

} // namespace

CrossValReport cross_validate(const SystemAutomaton& a, int bound, const CrossValOptions& opts) {
    CrossValReport report;
    report.bound = bound;

    EQSentence psi = gen_emptiness_formula(a);
    std::vector<std::uint32_t> masks = system_domain_masks(a, psi, true);

    struct Item {
        std::string id;
        LabeledGraph graph;
        bool feasible = false;
        bool mutant = false;
        std::vector<std::string> witness;
    };
    std::vector<Item> items;

    // The encoding characterizes projected graphs, not runs: a graph
    // satisfies it iff SOME feasible run projects onto it.  Distinct runs may
    // share a projection, so group them before comparing verdicts.
    std::vector<Run> runs = collect_runs(a, bound);
    std::vector<LabeledGraph> all_graphs;
    std::map<std::string, std::size_t> by_projection;
    for (const auto& run : runs) {
        Run completed = a.uses_renamings() ? autocomplete_renamings(a, run) : run;
        LabeledGraph t_graph = build_T_graph(a, completed);
        FeasibilityResult f = feasible(a, run);
        if (f.feasible) {
            auto violations = recheck_run_constraints(a, run, *f.ts);
            if (!violations.empty())
                throw std::logic_error("witness failed independent re-check: " + violations[0]);
        }
        std::vector<std::string> witness;
        if (f.feasible)
            for (const auto& t : f.ts->ts) witness.push_back(t.str());
        LabeledGraph projected = project(t_graph, {});
        std::string key = serialize(projected);
        auto found = by_projection.find(key);
        if (found == by_projection.end()) {
            by_projection.emplace(key, items.size());
            all_graphs.push_back(projected);
            items.push_back({run_id(run), std::move(projected), f.feasible, false, std::move(witness)});
        } else if (f.feasible && !items[found->second].feasible) {
            items[found->second].feasible = true;
            items[found->second].witness = std::move(witness);
        }
    }

    // Structural mutants break a data structure conjunct of the encoding, so
    // they must be rejected no matter which run shaped the base graph.
    if (opts.with_mutants) {
        int made = 0;
        for (const auto& g : all_graphs) {
            if (made >= opts.max_mutants) break;
            std::vector<LabeledEdge> ds_edges;
            for (const auto& e : g.edges)
                if (e.symbol != kSuccSymbol) ds_edges.push_back(e);
            // (a) swap the targets of two same-structure edges: stacks get a
            // crossing, queues a nesting, and either way one edge may flip
            // backward; every case violates a data structure conjunct
            for (std::size_t i = 0; i < ds_edges.size() && made < opts.max_mutants; ++i)
                for (std::size_t j = i + 1; j < ds_edges.size() && made < opts.max_mutants; ++j) {
                    if (ds_edges[i].symbol != ds_edges[j].symbol) continue;
                    LabeledGraph m = g;
                    for (auto& e : m.edges) {
                        if (e == ds_edges[i]) e.dst = ds_edges[j].dst;
                        else if (e == ds_edges[j]) e.dst = ds_edges[i].dst;
                    }
                    m.normalize();
                    items.push_back({"mutant:swap:" + std::to_string(made), m, false, true, {}});
                    ++made;
                }
            // (b) reverse one DS edge
            for (const auto& victim : ds_edges) {
                if (made >= opts.max_mutants) break;
                LabeledGraph m = g;
                for (auto& e : m.edges)
                    if (e == victim) std::swap(e.src, e.dst);
                m.normalize();
                items.push_back({"mutant:reverse:" + std::to_string(made), m, false, true, {}});
                ++made;
            }
            // (c) delete one DS edge
            for (const auto& victim : ds_edges) {
                if (made >= opts.max_mutants) break;
                LabeledGraph m = g;
                m.edges.erase(std::remove(m.edges.begin(), m.edges.end(), victim), m.edges.end());
                items.push_back({"mutant:delete:" + std::to_string(made), m, false, true, {}});
                ++made;
            }
            // (d) duplicate one DS edge onto a shifted target
            for (const auto& victim : ds_edges) {
                if (made >= opts.max_mutants) break;
                int alt = victim.dst + 1 < g.node_count ? victim.dst + 1 : victim.dst - 1;
                if (alt == victim.src || alt < 0) continue;
                LabeledGraph m = g;
                m.edges.push_back({victim.src, victim.symbol, alt});
                m.normalize();
                items.push_back({"mutant:duplicate:" + std::to_string(made), m, false, true, {}});
                ++made;
            }
            // (e) retarget one DS edge onto the first node (always backward)
            for (const auto& victim : ds_edges) {
                if (made >= opts.max_mutants) break;
                if (victim.src == 0) continue;
                LabeledGraph m = g;
                for (auto& e : m.edges)
                    if (e == victim) e.dst = 0;
                m.normalize();
                items.push_back({"mutant:retarget:" + std::to_string(made), m, false, true, {}});
                ++made;
            }
        }
    }

    report.records.resize(items.size());
    parallel_for(items.size(), opts.jobs, [&](std::size_t i) {
        const Item& it = items[i];
        CrossValRecord rec;
        rec.id = it.id;
        rec.feasible = it.feasible;
        rec.mutant = it.mutant;
        rec.witness = it.witness;
        rec.models = models_encoding(a, psi, masks, it.graph);
        report.records[i] = rec;
    });
    for (const auto& rec : report.records)
        if (!rec.agrees()) ++report.discrepancies;
    return report;
}

std::string CrossValReport::to_jsonl() const {
    std::ostringstream os;
    for (const auto& rec : records) {
        nlohmann::json line;
        line["id"] = rec.id;
        line["mutant"] = rec.mutant;
        line["feasible"] = rec.feasible;
        line["models"] = rec.models;
        line["agreement"] = rec.agrees();
        if (!rec.witness.empty()) line["witness"] = rec.witness;
        os << line.dump() << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// a^n b^m family
// ---------------------------------------------------------------------------

WeightedGraph gen_anbm(int n, int m) {
    if (n < 1 || m < 1) throw SemanticError("gen_anbm needs n, m >= 1");
    WeightedGraph g;
    g.node_count = n + m;
    g.max_const = 2;
    auto a_node = [&](int i) { return i; };         // a_1..a_n -> 0..n-1
    auto b_node = [&](int j) { return n + j; };     // b_1..b_m -> n..n+m-1
    for (int i = 0; i + 1 < n; ++i) {
        g.constraint_edges.push_back({a_node(i), Cmp::le, 1, a_node(i + 1)});
        g.order_edges.push_back({a_node(i), a_node(i + 1)});
    }
    for (int j = 0; j + 1 < m; ++j) {
        g.constraint_edges.push_back({b_node(j), Cmp::le, -1, b_node(j + 1)});
        g.order_edges.push_back({b_node(j + 1), b_node(j)}); // reversed chain
    }
    g.constraint_edges.push_back({a_node(n - 1), Cmp::le, 0, b_node(0)});
    g.constraint_edges.push_back({b_node(m - 1), Cmp::le, 0, a_node(0)});
    g.normalize();
    return g;
}

// ---------------------------------------------------------------------------
// Worker pool
// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex error_mu;
    int spawn = std::min<int>(jobs, static_cast<int>(count));
    for (int t = 0; t < spawn; ++t)
        workers.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) return;
                try {
                    body(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    failed.store(true);
                    if (error.empty()) error = e.what();
                }
            }
        });
    for (auto& w : workers) w.join();
    if (failed.load()) throw std::runtime_error("parallel task failed: " + error);
}

} // namespace tcg
