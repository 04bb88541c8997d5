#ifndef TCG_PDL_HPP
#define TCG_PDL_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tcg/graph.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// EQ-ICPDL abstract syntax.  Trees are immutable and shared; construction
// helpers fold n-ary connectives and resolve the usual sugar.
// ---------------------------------------------------------------------------

struct StateFormula;
struct PathExpr;
struct Sentence;
using StatePtr = std::shared_ptr<const StateFormula>;
using PathPtr = std::shared_ptr<const PathExpr>;
using SentencePtr = std::shared_ptr<const Sentence>;

struct StateFormula {
    enum class Kind { top, prop, or_, and_, not_, exists_path, loop };
    Kind kind;
    std::string prop;            // prop
    std::vector<StatePtr> kids;  // or_/and_ (n-ary, >= 2)
    StatePtr sub;                // not_, exists_path target
    PathPtr path;                // exists_path, loop
};

struct PathExpr {
    enum class Kind { edge, test, alt, seq, star, inv, cap, auto_ };
    Kind kind;
    std::string symbol;         // edge
    StatePtr test;              // test
    std::vector<PathPtr> kids;  // alt/seq (n-ary; alt may be empty = bottom), star/inv: 1, cap: 2
    std::string auto_name, auto_from, auto_to; // auto_
};

struct Sentence {
    enum class Kind { exists_state, or_, and_, not_ };
    Kind kind;
    StatePtr state;                // exists_state (E sigma)
    std::vector<SentencePtr> kids; // or_/and_, not_: 1
};

// A path-labeled finite automaton; Auto path atoms denote "there is a run
// from q_from to q_to whose transition labels concatenate to a path from u
// to v" (zero-step runs give the identity relation).
struct TrackingAutomaton {
    struct Transition {
        std::string from;
        PathPtr label;
        std::string to;
    };
    std::vector<std::string> states;
    std::vector<Transition> transitions;
};

using AutoRegistry = std::map<std::string, TrackingAutomaton>;

struct EQSentence {
    std::vector<std::string> props; // quantified, in declared order
    SentencePtr body;
    AutoRegistry autos;             // automata referenced by auto_ atoms
};

// An interpretation I of signature (Sigma', Gamma') in (Sigma, Gamma):
// node symbols become state formulas, edge symbols become path formulas.
struct Interpretation {
    std::map<std::string, StatePtr> state_defs;
    std::map<std::string, PathPtr> path_defs;
    AutoRegistry autos;
};

// --- constructors ----------------------------------------------------------

StatePtr s_top();
StatePtr s_bot();
StatePtr s_prop(const std::string& p);
StatePtr s_not(StatePtr s);
StatePtr s_or(std::vector<StatePtr> kids);  // folds: empty -> bot, single -> kid
StatePtr s_and(std::vector<StatePtr> kids); // folds: empty -> top, single -> kid
StatePtr s_implies(StatePtr a, StatePtr b);
StatePtr s_iff(StatePtr a, StatePtr b);
StatePtr s_exists_path(PathPtr p, StatePtr s); // <p> s
StatePtr s_diamond(PathPtr p);                 // <p> top
StatePtr s_loop(PathPtr p);

PathPtr p_edge(const std::string& symbol);
PathPtr p_edge_inv(const std::string& symbol); // sugar for inv(edge)
PathPtr p_test(StatePtr s);
PathPtr p_alt(std::vector<PathPtr> kids);      // empty allowed: denotes the empty relation
PathPtr p_seq(std::vector<PathPtr> kids);      // folds singles; empty not allowed
PathPtr p_star(PathPtr p);
PathPtr p_plus(PathPtr p); // sugar: p . p*
PathPtr p_inv(PathPtr p);
PathPtr p_cap(PathPtr a, PathPtr b);
PathPtr p_auto(const std::string& name, const std::string& from, const std::string& to);

SentencePtr sen_e(StatePtr s);
SentencePtr sen_not(SentencePtr s);
SentencePtr sen_or(std::vector<SentencePtr> kids);
SentencePtr sen_and(std::vector<SentencePtr> kids);
SentencePtr sen_forall(StatePtr s); // A s = not E not s

// --- structural size and intersection width --------------------------------

// Size counts each distinct shared subterm once; automaton transition labels
// of referenced automata are counted once per automaton.
std::size_t formula_size(const EQSentence& f);
std::size_t formula_size(const SentencePtr& s, const AutoRegistry& autos = {});

int intersection_width(const PathPtr& p, const AutoRegistry& autos = {});
int intersection_width(const EQSentence& f);

// --- evaluation -------------------------------------------------------------

struct EvalOptions {
    // Declared alphabets.  A symbol is legal if it is declared here, appears
    // in the graph, or is a quantified proposition; anything else raises
    // EvalError.  Empty optionals mean "exactly what the graph carries".
    std::optional<std::set<std::string>> sigma;
    std::optional<std::set<std::string>> gamma;
    const AutoRegistry* autos = nullptr;
};

std::set<int> eval_state(const LabeledGraph& g, const StatePtr& s, const EvalOptions& opts = {});
std::set<std::pair<int, int>> eval_path(const LabeledGraph& g, const PathPtr& p,
                                        const EvalOptions& opts = {});
bool eval_sentence(const LabeledGraph& g, const SentencePtr& s, const EvalOptions& opts = {});

// --- existential prop quantification ----------------------------------------

struct Labeling {
    std::vector<std::string> props;
    std::vector<std::uint32_t> masks; // per node, bit k = props[k]
    std::vector<std::string> labels_of(int node) const;
};

struct EvalEqOptions {
    EvalOptions base;
    // Optional per-node candidate masks.  Sound whenever the body forces
    // every witness labeling into the given sets (e.g. exactly-one-of
    // partitions); the default enumerates all subsets.
    std::optional<std::vector<std::vector<std::uint32_t>>> domains;
    std::uint64_t max_steps = 50'000'000; // DFS step budget
    int max_props = 24;
};

struct EvalEqResult {
    bool holds;
    std::optional<Labeling> witness; // present iff holds
};

// Exhaustive search over labelings in lexicographic order (node-major,
// mask ascending) with 3-valued pruning of partial assignments; returns the
// first witness.  Exponential; desk-scale only.
EvalEqResult eval_eq(const LabeledGraph& g, const EQSentence& f, const EvalEqOptions& opts = {});

// --- interpretations ---------------------------------------------------------

// Materializes I(G): same nodes, labels/edges as denoted by I's formulas.
LabeledGraph apply_interpretation(const LabeledGraph& g, const Interpretation& I,
                                  const EvalOptions& opts = {});

// Syntactic substitution of props and edge atoms by their I-images; the
// quantified props of f are untouched.  Preserves intersection width.
EQSentence backward_translate(const EQSentence& f, const Interpretation& I);

// --- s-expression syntax ------------------------------------------------------

std::string print_sexpr(const EQSentence& f);
std::string print_sexpr(const SentencePtr& s);
std::string print_sexpr(const StatePtr& s);
std::string print_sexpr(const PathPtr& p);
EQSentence parse_eq_sentence(const std::string& text);

bool equal(const StatePtr& a, const StatePtr& b);
bool equal(const PathPtr& a, const PathPtr& b);
bool equal(const SentencePtr& a, const SentencePtr& b);
bool equal(const EQSentence& a, const EQSentence& b);

// Node and edge symbols mentioned by a formula (including automaton labels).
struct FormulaSymbols {
    std::set<std::string> props;
    std::set<std::string> edges;
};
FormulaSymbols collect_symbols(const EQSentence& f);

} // namespace tcg

#endif
