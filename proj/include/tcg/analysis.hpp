#ifndef TCG_ANALYSIS_HPP
#define TCG_ANALYSIS_HPP

#include <optional>
#include <string>
#include <vector>

#include "tcg/formula_gen.hpp"
#include "tcg/timed_system.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Independent re-checkers.  These re-derive the constraint semantics directly
// from the inputs and never look at the weighted graph or the solver, so a
// witness accepted here really satisfies the definitions.
// ---------------------------------------------------------------------------

// Definition of realizability by direct substitution.
bool recheck_realization(const WeightedGraph& g, const Realization& ts);

// Re-derives every timing constraint of the run (guards, ages, diagonals,
// event clocks, renamed values) with its own matching and origin scans and
// checks the timestamps against them.  Returns a list of violations.
std::vector<std::string> recheck_run_constraints(const SystemAutomaton& a, const Run& run,
                                                 const Realization& ts);

// ---------------------------------------------------------------------------
// Bounded end-to-end procedures.  Verdicts are always labeled with their
// bound; nothing here claims unbounded emptiness.
// ---------------------------------------------------------------------------

struct EmptinessResult {
    int bound = 0;
    bool found = false;
    Run run;                       // first feasible run in enumeration order
    std::optional<Realization> ts; // verified timestamps
};

EmptinessResult check_emptiness_bounded(const SystemAutomaton& a, int bound);

struct ModelCheckResult {
    int bound = 0;
    bool violated = false;
    Run run;
    std::optional<Realization> ts;
    std::optional<LabeledGraph> counterexample; // AP projection of the T-graph
};

ModelCheckResult model_check_bounded(const SystemAutomaton& a, const SentencePtr& spec, int bound);

// ---------------------------------------------------------------------------
// Formula/oracle cross-validation
// ---------------------------------------------------------------------------

struct CrossValRecord {
    std::string id;
    bool feasible = false;
    bool models = false;
    bool mutant = false;         // mutants must not satisfy the encoding
    std::vector<std::string> witness; // timestamps when a feasible run was found
    bool agrees() const { return mutant ? !models : feasible == models; }
};

struct CrossValReport {
    int bound = 0;
    std::vector<CrossValRecord> records;
    int discrepancies = 0;
    std::string to_jsonl() const;
};

struct CrossValOptions {
    bool with_mutants = true;
    int max_mutants = 64;
    int jobs = 1;
};

// For every accepted run up to the bound: the projected T-graph satisfies
// the emptiness encoding iff the run is feasible.  Structural graph mutants
// (crossed stack edges, reversed and deleted DS edges) must be rejected.
CrossValReport cross_validate(const SystemAutomaton& a, int bound,
                              const CrossValOptions& opts = {});

// ---------------------------------------------------------------------------
// The a^n b^m family: realizable iff n >= m.  Non-linear order (two chains).
// ---------------------------------------------------------------------------

WeightedGraph gen_anbm(int n, int m);

// ---------------------------------------------------------------------------
// Deterministic worker pool for campaign loops; results land by index.
// ---------------------------------------------------------------------------

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

} // namespace tcg

#endif
