#ifndef TCG_FORMULA_GEN_HPP
#define TCG_FORMULA_GEN_HPP

#include <map>
#include <string>
#include <vector>

#include "tcg/pdl.hpp"
#include "tcg/timed_system.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Realizability formulas over weighted graphs (viewed as labeled graphs with
// edge symbols "<=w" / "<w" and "succ").  Quantified props tsm0..tsm(M-1)
// guess the time-stamping modulo M.
// ---------------------------------------------------------------------------

struct RealizabilityFormula {
    int M = 1;
    EQSentence sentence;

    // named subformulas, addressable for unit tests
    SentencePtr partition;
    PathPtr big_path;
    std::map<std::pair<int, int>, PathPtr> small_path; // (i, j) -> path
    SentencePtr forward;
    SentencePtr backward;
    PathPtr geq_fr; // mixed only
    PathPtr gt_fr;  // mixed only
};

RealizabilityFormula gen_closed_realizability(int M);
RealizabilityFormula gen_mixed_realizability(int M);

// Evaluation alphabet for realizability formulas: succ plus every weight
// symbol of Gamma_M (closed graphs use only the "<=" half).
EvalOptions realizability_eval_options(int M);

// Exactly-one-residue candidate masks for eval_eq; sound because the bodies
// conjoin the partition formula.
std::vector<std::vector<std::uint32_t>> tsm_domains(int node_count, int M);

// ---------------------------------------------------------------------------
// Timing interpretation: weighted-graph edge symbols as path formulas over
// T-graphs.
// ---------------------------------------------------------------------------

struct TimingFeatures {
    bool cc_diagonals = false;
    bool dc_diagonals = false;
    bool age = false;
    bool event_clocks = false;
    bool renamings = false;

    static TimingFeatures of(const SystemAutomaton& a);
};

struct TimingInterpretation {
    int M = 1;
    TimingFeatures features;
    Interpretation interp;                      // "succ" + one entry per (cmp, w)
    std::map<std::string, PathPtr> reset_paths; // Reset_x, only without renamings
};

struct TimingAlphabet {
    std::vector<std::string> clocks;
    std::vector<std::string> ds;
    std::vector<std::string> props; // event-clock targets

    static TimingAlphabet of(const SystemAutomaton& a);
};

TimingInterpretation gen_timing_interpretation(const TimingAlphabet& alphabet, int M,
                                               const TimingFeatures& features);

// Every instruction atom the interpretation's tests may mention: the node
// alphabet of T-graphs for this clock/DS/prop signature and constant bound.
std::set<std::string> timing_atom_space(const TimingAlphabet& alphabet, int M);

// Evaluation alphabet for interpretation formulas over labeled T-graphs.
EvalOptions interpretation_eval_options(const SystemAutomaton& a);

// ---------------------------------------------------------------------------
// System encodings
// ---------------------------------------------------------------------------

// State prop used for automaton state q in system formulas.
std::string state_prop(const std::string& q);

// Accepting-run encoding: quantifies instruction atoms and state props and
// conjoins state uniqueness, transition consistency, data structure policies
// and (with a non-singleton message alphabet) message consistency.  LCPDL.
EQSentence gen_system_formula(const SystemAutomaton& a);

// Emptiness: system encoding + backward-translated mixed realizability under
// one quantifier prefix.  Intersection width 2.
EQSentence gen_emptiness_formula(const SystemAutomaton& a);

// Model checking: emptiness matrix + negated specification.  The spec is an
// LCPDL sentence over declared props and DS/succ edges only.
EQSentence gen_modelcheck_formula(const SystemAutomaton& a, const SentencePtr& spec);

// Evaluation alphabet for system/emptiness formulas over projected T-graphs.
EvalOptions system_eval_options(const SystemAutomaton& a);

// Per-node candidate masks for eval_eq on a system or emptiness formula:
// one entry per (transition, residue) pair.  Sound because the body forces
// exact transition labels, unique states and a residue partition.
std::vector<std::uint32_t> system_domain_masks(const SystemAutomaton& a, const EQSentence& f,
                                               bool with_tsm);

} // namespace tcg

#endif
