#ifndef TCG_TIMED_SYSTEM_HPP
#define TCG_TIMED_SYSTEM_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tcg/graph.hpp"
#include "tcg/pdl.hpp"
#include "tcg/realizability.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Instructions.  Comparators are normalized at parse time: every guard-like
// input over {<, <=, =, >, >=} becomes one or two upper/lower instructions
// over {<, <=}.
// ---------------------------------------------------------------------------

struct Instruction {
    enum class Kind {
        nop,
        write,        // w(d)              : ds
        read,         // r(d)              : ds
        reset,        // x := 0            : clock
        guard_upper,  // x cmp c           : clock
        guard_lower,  // c cmp x           : clock
        age_upper,    // d cmp c           : ds
        age_lower,    // c cmp d           : ds
        diag_cc,      // x - y cmp c       : clock, clock2
        diag_cc_low,  // c cmp x - y
        diag_dx,      // d - x cmp c       : ds, clock
        diag_dx_low,  // c cmp d - x
        diag_xd,      // x - d cmp c       : clock, ds
        diag_xd_low,  // c cmp x - d
        event_upper,  // next_a cmp c      : prop
        event_lower,  // c cmp next_a
        rename_cc,    // x := y            : clock (target), clock2 (source)
        rename_cd,    // x := d            : clock, ds
        rename_dc,    // d := x            : ds, clock
        prop,         // atomic proposition
        msg,          // message symbol
    };

    Kind kind = Kind::nop;
    std::string clock, clock2, ds, name;
    Cmp cmp = Cmp::le;
    int constant = 0;

    // Canonical atom string; this is the node-label symbol used in T-graphs
    // and in formula tests.
    std::string atom() const;

    friend bool operator==(const Instruction& a, const Instruction& b) {
        return a.atom() == b.atom();
    }
    friend bool operator<(const Instruction& a, const Instruction& b) {
        return a.atom() < b.atom();
    }
};

Instruction ins_nop();
Instruction ins_write(const std::string& d);
Instruction ins_read(const std::string& d);
Instruction ins_reset(const std::string& x);
Instruction ins_guard_upper(const std::string& x, Cmp c, int k);
Instruction ins_guard_lower(const std::string& x, Cmp c, int k);
Instruction ins_age_upper(const std::string& d, Cmp c, int k);
Instruction ins_age_lower(const std::string& d, Cmp c, int k);
Instruction ins_diag_cc(const std::string& x, const std::string& y, Cmp c, int k);
Instruction ins_diag_cc_low(const std::string& x, const std::string& y, Cmp c, int k);
Instruction ins_diag_dx(const std::string& d, const std::string& x, Cmp c, int k);
Instruction ins_diag_dx_low(const std::string& d, const std::string& x, Cmp c, int k);
Instruction ins_diag_xd(const std::string& x, const std::string& d, Cmp c, int k);
Instruction ins_diag_xd_low(const std::string& x, const std::string& d, Cmp c, int k);
Instruction ins_event_upper(const std::string& a, Cmp c, int k);
Instruction ins_event_lower(const std::string& a, Cmp c, int k);
Instruction ins_rename_cc(const std::string& x, const std::string& y);
Instruction ins_rename_cd(const std::string& x, const std::string& d);
Instruction ins_rename_dc(const std::string& d, const std::string& x);
Instruction ins_prop(const std::string& a);
Instruction ins_msg(const std::string& m);

using InstructionSet = std::vector<Instruction>; // kept sorted+unique

// ---------------------------------------------------------------------------
// System automata
// ---------------------------------------------------------------------------

enum class DsKind { stack, queue };

struct SystemAutomaton {
    std::vector<std::string> clocks;
    std::map<std::string, DsKind> ds;
    std::vector<std::string> props;
    std::vector<std::string> msgs;
    int max_const = 1; // M

    std::vector<std::string> states;
    std::string initial;
    std::vector<std::string> finals;

    struct Transition {
        std::string from;
        InstructionSet label;
        std::string to;
    };
    std::vector<Transition> transitions;

    bool uses_renamings() const;
    bool uses_event_clocks() const;
    bool uses_age() const;
    bool uses_cc_diagonals() const;
    bool uses_dc_diagonals() const;

    // All atoms a run may carry: transition labels, declared props and msgs,
    // and nop.
    std::set<std::string> atom_universe() const;
};

std::vector<Diagnostic> validate(const SystemAutomaton& a);
SystemAutomaton parse_system(const std::string& json_text);
std::string serialize(const SystemAutomaton& a);

// ---------------------------------------------------------------------------
// Runs and T-graphs
// ---------------------------------------------------------------------------

struct Run {
    std::vector<InstructionSet> instructions;
    std::vector<std::string> states; // state sequence that produced it (may be empty)
};

// Prefix read/write balance per DS, equal totals, start-up reset convention.
std::vector<Diagnostic> validate_run(const SystemAutomaton& a, const Run& run);

// Inserts x := x for every clock without a renaming on a node (start-up
// resets count as renamings).  Needed before building with renamings on.
Run autocomplete_renamings(const SystemAutomaton& a, Run run);

// Linear succ chain + per-DS matching edges (stack: LIFO, queue: FIFO);
// node labels are the instruction atoms.
LabeledGraph build_T_graph(const SystemAutomaton& a, const Run& run);

// Weighted graph of a T-graph, built semantically (no PDL involved).
// Unmatched event-clock constraints cannot be satisfied; they are reported
// separately so the graph stays comparable with the interpretation route.
struct TimingConstraintGraph {
    WeightedGraph graph;
    std::vector<std::pair<int, std::string>> unmatched_events; // node, atom
};

TimingConstraintGraph build_weighted_graph(const SystemAutomaton& a, const LabeledGraph& t_graph);

// Clock-renaming tracking automaton over T-graph paths; state q_x at node u
// says the tracked value sits in clock x at the end of node u.
TrackingAutomaton build_tracking_automaton(const SystemAutomaton& a);

// True iff a run of the tracking automaton relates (u, q_x) to (v, q_x2).
bool track_origin(const SystemAutomaton& a, const LabeledGraph& t_graph, int u,
                  const std::string& x, int v, const std::string& x2);

struct FeasibilityResult {
    bool feasible = false;
    std::optional<Realization> ts;
    std::optional<NegCycleWitness> cycle;
    std::vector<std::pair<int, std::string>> unmatched_events;
};

// A valid run is feasible iff its weighted graph is realizable.
FeasibilityResult feasible(const SystemAutomaton& a, const Run& run);

// ---------------------------------------------------------------------------
// Bounded run enumeration
// ---------------------------------------------------------------------------

struct EnumerationOptions {
    std::uint64_t max_runs = 1'000'000;
    std::uint64_t max_steps = 50'000'000;
};

// Calls `visit` for every valid accepted run of length <= bound, in
// length-lexicographic order (transition list order breaks ties); stops when
// visit returns false.
void enumerate_runs(const SystemAutomaton& a, int bound,
                    const std::function<bool(const Run&)>& visit,
                    const EnumerationOptions& opts = {});

std::vector<Run> collect_runs(const SystemAutomaton& a, int bound,
                              const EnumerationOptions& opts = {});

} // namespace tcg

#endif
