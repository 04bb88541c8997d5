// tcg — timing-constraint graph toolbox: realizability, EQ-ICPDL evaluation,
// formula generation, bounded emptiness / model checking, cross-validation.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tcg/analysis.hpp"
#include "tcg/formula_gen.hpp"
#include "tcg/pdl.hpp"
#include "tcg/realizability.hpp"
#include "tcg/timed_system.hpp"

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;
constexpr int kExitInternal = 2;

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
    out << content;
}

nlohmann::json realization_json(const tcg::Realization& ts) {
    nlohmann::json j;
    nlohmann::json exact = nlohmann::json::array();
    nlohmann::json approx = nlohmann::json::array();
    for (const auto& t : ts.ts) {
        exact.push_back(nlohmann::json::array({t.num(), t.den()}));
        approx.push_back(t.to_double());
    }
    j["ts"] = exact;
    j["approx"] = approx;
    return j;
}

nlohmann::json cycle_json(const tcg::NegCycleWitness& w) {
    nlohmann::json j;
    j["cycle"] = w.nodes;
    j["weight"] = w.total_weight;
    j["strict"] = w.contains_strict;
    return j;
}

nlohmann::json run_json(const tcg::Run& run) {
    nlohmann::json j;
    nlohmann::json instr = nlohmann::json::array();
    for (const auto& set : run.instructions) {
        nlohmann::json atoms = nlohmann::json::array();
        for (const auto& i : set) atoms.push_back(i.atom());
        instr.push_back(atoms);
    }
    j["instructions"] = instr;
    j["states"] = run.states;
    return j;
}

std::uint64_t env_cap(const char* name, std::uint64_t fallback) {
    const char* v = std::getenv(name);
    if (!v) return fallback;
    return std::strtoull(v, nullptr, 10);
}

struct CommonOpts {
    bool json = false;
    std::string dot_path;
};

void maybe_dot(const CommonOpts& c, const tcg::WeightedGraph& g) {
    if (!c.dot_path.empty()) spit(c.dot_path, tcg::to_dot(g));
}

int cmd_realizable(const std::string& path, std::optional<int> M, const std::string& method,
                   bool witness, const CommonOpts& common) {
    tcg::WeightedGraph g = tcg::parse_weighted_graph(slurp(path));
    if (M) {
        g.max_const = *M;
        auto ds = tcg::validate(g);
        if (!ds.empty()) throw tcg::SemanticError("with --M: " + tcg::join_diagnostics(ds));
    }
    maybe_dot(common, g);

    tcg::RealizeResult direct = tcg::check_realizable(g);
    bool direct_ok = tcg::is_realizable(direct);

    std::optional<bool> tsm_verdict;
    std::optional<bool> formula_verdict;
    if (method == "tsm" || method == "all") {
        tcg::CertificateSearchOptions copts;
        copts.max_maps = env_cap("TCG_RESIDUE_CAP", copts.max_maps);
        tsm_verdict = tcg::search_certificate(g, copts).has_value();
    }
    if (method == "formula" || method == "all") {
        tcg::RealizabilityFormula f = tcg::gen_mixed_realizability(g.max_const);
        tcg::EvalEqOptions eopts;
        eopts.base = tcg::realizability_eval_options(g.max_const);
        eopts.domains = tcg::tsm_domains(g.node_count, g.max_const);
        eopts.max_steps = env_cap("TCG_EVAL_STEP_CAP", eopts.max_steps);
        formula_verdict = tcg::eval_eq(tcg::to_labeled(g), f.sentence, eopts).holds;
    }
    if ((tsm_verdict && *tsm_verdict != direct_ok) ||
        (formula_verdict && *formula_verdict != direct_ok)) {
        std::cerr << "internal error: decision methods disagree on '" << path << "'\n";
        return kExitInternal;
    }

    nlohmann::json out;
    out["realizable"] = direct_ok;
    out["M"] = g.max_const;
    out["method"] = method;
    if (direct_ok && (witness || common.json))
        out["witness"] = realization_json(std::get<tcg::Realization>(direct));
    if (!direct_ok) out["cycle"] = cycle_json(std::get<tcg::NegCycleWitness>(direct));
    if (common.json) {
        std::cout << out.dump() << "\n";
    } else {
        std::cout << (direct_ok ? "realizable" : "not realizable") << " (M=" << g.max_const
                  << ")\n";
        if (direct_ok && witness) {
            std::cout << "ts =";
            for (const auto& t : std::get<tcg::Realization>(direct).ts)
                std::cout << " " << t.str();
            std::cout << "\n";
        }
        if (!direct_ok) {
            const auto& w = std::get<tcg::NegCycleWitness>(direct);
            std::cout << "negative cycle:";
            for (int v : w.nodes) std::cout << " " << v;
            std::cout << " (weight " << w.total_weight << (w.contains_strict ? ", strict" : "")
                      << ")\n";
        }
    }
    return direct_ok ? 0 : 1;
}

int cmd_eval(const std::string& graph_path, const std::string& formula_path,
             const CommonOpts& common) {
    std::string text = slurp(graph_path);
    tcg::EQSentence f = tcg::parse_eq_sentence(slurp(formula_path));
    tcg::LabeledGraph g;
    bool weighted = false;
    try {
        tcg::WeightedGraph wg = tcg::parse_weighted_graph(text);
        g = tcg::to_labeled(wg);
        weighted = true;
    } catch (const std::exception&) {
        g = tcg::parse_labeled_graph(text);
    }
    (void)weighted;
    // the formula's own symbols are its declared signature: symbols the
    // graph does not carry denote the empty set
    tcg::FormulaSymbols symbols = tcg::collect_symbols(f);
    tcg::EvalEqOptions opts;
    opts.base.sigma = symbols.props;
    opts.base.gamma = symbols.edges;
    opts.max_steps = env_cap("TCG_EVAL_STEP_CAP", opts.max_steps);
    tcg::EvalEqResult r = tcg::eval_eq(g, f, opts);
    if (common.json) {
        nlohmann::json out;
        out["holds"] = r.holds;
        if (r.witness) {
            nlohmann::json w = nlohmann::json::array();
            for (int v = 0; v < g.node_count; ++v) w.push_back(r.witness->labels_of(v));
            out["witness"] = w;
        }
        std::cout << out.dump() << "\n";
    } else {
        std::cout << (r.holds ? "true" : "false") << "\n";
        if (r.witness && !r.witness->props.empty()) {
            for (int v = 0; v < g.node_count; ++v) {
                std::cout << "node " << v << ":";
                for (const auto& p : r.witness->labels_of(v)) std::cout << " " << p;
                std::cout << "\n";
            }
        }
    }
    return r.holds ? 0 : 1;
}

int cmd_gen_formula(const std::string& kind, int M, const std::string& system_path,
                    const std::string& spec_path) {
    if (kind == "closed-realizability") {
        std::cout << tcg::print_sexpr(tcg::gen_closed_realizability(M).sentence) << "\n";
        return 0;
    }
    if (kind == "mixed-realizability") {
        std::cout << tcg::print_sexpr(tcg::gen_mixed_realizability(M).sentence) << "\n";
        return 0;
    }
    tcg::SystemAutomaton a = tcg::parse_system(slurp(system_path));
    if (kind == "system") {
        std::cout << tcg::print_sexpr(tcg::gen_system_formula(a)) << "\n";
    } else if (kind == "emptiness") {
        std::cout << tcg::print_sexpr(tcg::gen_emptiness_formula(a)) << "\n";
    } else if (kind == "modelcheck") {
        tcg::EQSentence spec = tcg::parse_eq_sentence(slurp(spec_path));
        if (!spec.props.empty() || !spec.autos.empty())
            throw tcg::SemanticError("specification must be a plain sentence");
        std::cout << tcg::print_sexpr(tcg::gen_modelcheck_formula(a, spec.body)) << "\n";
    } else {
        throw CLI::ValidationError("unknown formula kind '" + kind + "'");
    }
    return 0;
}

int cmd_empty(const std::string& system_path, int bound, const std::string& witness_path,
              const CommonOpts& common) {
    tcg::SystemAutomaton a = tcg::parse_system(slurp(system_path));
    tcg::EmptinessResult r = tcg::check_emptiness_bounded(a, bound);
    nlohmann::json out;
    out["bound"] = r.bound;
    out["feasible_run_found"] = r.found;
    if (r.found) {
        out["run"] = run_json(r.run);
        out["witness"] = realization_json(*r.ts);
        if (!witness_path.empty()) spit(witness_path, out.dump(2) + "\n");
    }
    if (common.json) std::cout << out.dump() << "\n";
    else if (r.found)
        std::cout << "feasible run of length " << r.run.instructions.size() << " found (bound "
                  << bound << ")\n";
    else
        std::cout << "no feasible run up to length " << bound << " (bounded verdict)\n";
    return r.found ? 0 : 1;
}

int cmd_modelcheck(const std::string& system_path, const std::string& spec_path, int bound,
                   const std::string& witness_path, const CommonOpts& common) {
    tcg::SystemAutomaton a = tcg::parse_system(slurp(system_path));
    tcg::EQSentence spec = tcg::parse_eq_sentence(slurp(spec_path));
    if (!spec.props.empty() || !spec.autos.empty())
        throw tcg::SemanticError("specification must be a plain sentence");
    tcg::ModelCheckResult r = tcg::model_check_bounded(a, spec.body, bound);
    if (!common.dot_path.empty() && r.counterexample)
        spit(common.dot_path, tcg::to_dot(*r.counterexample));
    nlohmann::json out;
    out["bound"] = r.bound;
    out["violated"] = r.violated;
    if (r.violated) {
        out["run"] = run_json(r.run);
        out["witness"] = realization_json(*r.ts);
        out["counterexample"] = nlohmann::json::parse(tcg::serialize(*r.counterexample));
        if (!witness_path.empty()) spit(witness_path, out.dump(2) + "\n");
    }
    if (common.json) std::cout << out.dump() << "\n";
    else if (r.violated)
        std::cout << "violation found at length " << r.run.instructions.size() << " (bound "
                  << bound << ")\n";
    else
        std::cout << "no violation up to length " << bound << " (bounded verdict)\n";
    return r.violated ? 0 : 1;
}

int cmd_crossval(const std::string& system_path, int bound, int jobs, const CommonOpts&) {
    tcg::SystemAutomaton a = tcg::parse_system(slurp(system_path));
    tcg::CrossValOptions opts;
    opts.jobs = jobs;
    tcg::CrossValReport report = tcg::cross_validate(a, bound, opts);
    std::cout << report.to_jsonl();
    if (report.discrepancies > 0) {
        std::cerr << report.discrepancies << " discrepancy(ies) found\n";
        return 1;
    }
    return 0;
}

int cmd_demo_anbm(int max_n, const CommonOpts& common) {
    nlohmann::json rows = nlohmann::json::array();
    bool all_match = true;
    for (int n = 1; n <= max_n; ++n) {
        for (int m = 1; m <= max_n; ++m) {
            tcg::WeightedGraph g = tcg::gen_anbm(n, m);
            bool realizable = tcg::is_realizable(tcg::check_realizable(g));
            bool expected = n >= m;
            all_match = all_match && realizable == expected;
            if (common.json) {
                rows.push_back({{"n", n},
                                {"m", m},
                                {"realizable", realizable},
                                {"expected", expected},
                                {"match", realizable == expected}});
            } else {
                std::cout << "a^" << n << " b^" << m << ": "
                          << (realizable ? "realizable    " : "not realizable")
                          << "  expected(n>=m): " << (expected ? "yes" : "no")
                          << (realizable == expected ? "" : "  MISMATCH") << "\n";
            }
        }
    }
    if (common.json) std::cout << rows.dump() << "\n";
    return all_match ? 0 : kExitInternal;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"timing-constraint graph analysis"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand
    CommonOpts common;
    app.add_flag("--json", common.json, "machine-readable JSON on stdout");

    auto* sc_real = app.add_subcommand("realizable", "decide realizability of a weighted graph");
    std::string graph_path;
    std::optional<int> M_override;
    std::string method = "direct";
    bool witness = false;
    sc_real->add_option("graph", graph_path, "weighted graph JSON")->required();
    sc_real->add_option("--M", M_override, "override the maximal constant");
    sc_real->add_option("--method", method, "direct|tsm|formula|all")
        ->check(CLI::IsMember({"direct", "tsm", "formula", "all"}));
    sc_real->add_flag("--witness", witness, "print timestamps when realizable");
    sc_real->add_option("--dot", common.dot_path, "write the graph in DOT format");

    auto* sc_eval = app.add_subcommand("eval", "evaluate a formula on a graph");
    std::string eval_graph, eval_formula;
    sc_eval->add_option("--graph", eval_graph, "graph JSON (labeled or weighted)")->required();
    sc_eval->add_option("--formula", eval_formula, "formula in s-expression syntax")->required();

    auto* sc_gen = app.add_subcommand("gen-formula", "emit a formula as an s-expression");
    std::string gen_kind, gen_system, gen_spec;
    int gen_M = 1;
    sc_gen->add_option("kind", gen_kind,
                       "closed-realizability|mixed-realizability|system|emptiness|modelcheck")
        ->required();
    sc_gen->add_option("--M", gen_M, "maximal constant for realizability formulas");
    sc_gen->add_option("--system", gen_system, "system JSON");
    sc_gen->add_option("--spec", gen_spec, "specification s-expression file");

    auto* sc_empty = app.add_subcommand("empty", "bounded emptiness check");
    std::string empty_system, empty_witness;
    int empty_bound = 6;
    sc_empty->add_option("--system", empty_system, "system JSON")->required();
    sc_empty->add_option("--bound", empty_bound, "maximal run length")->required();
    sc_empty->add_option("--witness-out", empty_witness, "write the witness JSON here");

    auto* sc_mc = app.add_subcommand("modelcheck", "bounded model checking");
    std::string mc_system, mc_spec, mc_witness;
    int mc_bound = 6;
    sc_mc->add_option("--system", mc_system, "system JSON")->required();
    sc_mc->add_option("--spec", mc_spec, "specification s-expression file")->required();
    sc_mc->add_option("--bound", mc_bound, "maximal run length")->required();
    sc_mc->add_option("--witness-out", mc_witness, "write the counterexample JSON here");
    sc_mc->add_option("--dot", common.dot_path, "write the counterexample graph in DOT format");

    auto* sc_cv = app.add_subcommand("crossval", "formula/oracle cross-validation");
    std::string cv_system;
    int cv_bound = 6;
    int cv_jobs = 1;
    sc_cv->add_option("--system", cv_system, "system JSON")->required();
    sc_cv->add_option("--bound", cv_bound, "maximal run length")->required();
    sc_cv->add_option("--jobs", cv_jobs, "worker threads");

    auto* sc_demo = app.add_subcommand("demo", "built-in demonstrations");
    auto* sc_anbm = sc_demo->add_subcommand("anbm", "the a^n b^m separating family");
    int anbm_max = 6;
    sc_anbm->add_option("--max", anbm_max, "maximal n and m");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sc_real) return cmd_realizable(graph_path, M_override, method, witness, common);
        if (*sc_eval) return cmd_eval(eval_graph, eval_formula, common);
        if (*sc_gen) return cmd_gen_formula(gen_kind, gen_M, gen_system, gen_spec);
        if (*sc_empty) return cmd_empty(empty_system, empty_bound, empty_witness, common);
        if (*sc_mc) return cmd_modelcheck(mc_system, mc_spec, mc_bound, mc_witness, common);
        if (*sc_cv) return cmd_crossval(cv_system, cv_bound, cv_jobs, common);
        if (*sc_demo && *sc_anbm) return cmd_demo_anbm(anbm_max, common);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const tcg::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const tcg::SemanticError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
