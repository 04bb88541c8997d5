#include "tcg/timed_system.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <deque>

#include "json.hpp"
#include "tcg/pdl.hpp"

namespace tcg {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Instruction atoms
// ---------------------------------------------------------------------------

std::string Instruction::atom() const {
    auto k = std::to_string(constant);
    switch (kind) {
        case Kind::nop: return "nop";
        case Kind::write: return "w:" + ds;
        case Kind::read: return "r:" + ds;
        case Kind::reset: return clock + ":=0";
        case Kind::guard_upper: return clock + cmp_str(cmp) + k;
        case Kind::guard_lower: return k + cmp_str(cmp) + clock;
        case Kind::age_upper: return ds + cmp_str(cmp) + k;
        case Kind::age_lower: return k + cmp_str(cmp) + ds;
        case Kind::diag_cc: return clock + "-" + clock2 + cmp_str(cmp) + k;
        case Kind::diag_cc_low: return k + cmp_str(cmp) + clock + "-" + clock2;
        case Kind::diag_dx: return ds + "-" + clock + cmp_str(cmp) + k;
        case Kind::diag_dx_low: return k + cmp_str(cmp) + ds + "-" + clock;
        case Kind::diag_xd: return clock + "-" + ds + cmp_str(cmp) + k;
        case Kind::diag_xd_low: return k + cmp_str(cmp) + clock + "-" + ds;
        case Kind::event_upper: return "next_" + name + cmp_str(cmp) + k;
        case Kind::event_lower: return k + cmp_str(cmp) + "next_" + name;
        case Kind::rename_cc: return clock + ":=" + clock2;
        case Kind::rename_cd: return clock + ":=" + ds;
        case Kind::rename_dc: return ds + ":=" + clock;
        case Kind::prop:
        case Kind::msg: return name;
    }
    return "?";
}

namespace {
Instruction mk(Instruction::Kind kind) {
    Instruction i;
    i.kind = kind;
    return i;
}
} // namespace

Instruction ins_nop() { return mk(Instruction::Kind::nop); }
Instruction ins_write(const std::string& d) {
    auto i = mk(Instruction::Kind::write);
    i.ds = d;
    return i;
}
Instruction ins_read(const std::string& d) {
    auto i = mk(Instruction::Kind::read);
    i.ds = d;
    return i;
}
Instruction ins_reset(const std::string& x) {
    auto i = mk(Instruction::Kind::reset);
    i.clock = x;
    return i;
}
namespace {
Instruction cmp_ins(Instruction::Kind kind, Cmp c, int k) {
    auto i = mk(kind);
    i.cmp = c;
    i.constant = k;
    return i;
}
} // namespace
Instruction ins_guard_upper(const std::string& x, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::guard_upper, c, k);
    i.clock = x;
    return i;
}
Instruction ins_guard_lower(const std::string& x, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::guard_lower, c, k);
    i.clock = x;
    return i;
}
Instruction ins_age_upper(const std::string& d, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::age_upper, c, k);
    i.ds = d;
    return i;
}
Instruction ins_age_lower(const std::string& d, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::age_lower, c, k);
    i.ds = d;
    return i;
}
Instruction ins_diag_cc(const std::string& x, const std::string& y, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_cc, c, k);
    i.clock = x;
    i.clock2 = y;
    return i;
}
Instruction ins_diag_cc_low(const std::string& x, const std::string& y, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_cc_low, c, k);
    i.clock = x;
    i.clock2 = y;
    return i;
}
Instruction ins_diag_dx(const std::string& d, const std::string& x, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_dx, c, k);
    i.ds = d;
    i.clock = x;
    return i;
}
Instruction ins_diag_dx_low(const std::string& d, const std::string& x, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_dx_low, c, k);
    i.ds = d;
    i.clock = x;
    return i;
}
Instruction ins_diag_xd(const std::string& x, const std::string& d, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_xd, c, k);
    i.clock = x;
    i.ds = d;
    return i;
}
Instruction ins_diag_xd_low(const std::string& x, const std::string& d, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::diag_xd_low, c, k);
    i.clock = x;
    i.ds = d;
    return i;
}
Instruction ins_event_upper(const std::string& a, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::event_upper, c, k);
    i.name = a;
    return i;
}
Instruction ins_event_lower(const std::string& a, Cmp c, int k) {
    auto i = cmp_ins(Instruction::Kind::event_lower, c, k);
    i.name = a;
    return i;
}
Instruction ins_rename_cc(const std::string& x, const std::string& y) {
    auto i = mk(Instruction::Kind::rename_cc);
    i.clock = x;
    i.clock2 = y;
    return i;
}
Instruction ins_rename_cd(const std::string& x, const std::string& d) {
    auto i = mk(Instruction::Kind::rename_cd);
    i.clock = x;
    i.ds = d;
    return i;
}
Instruction ins_rename_dc(const std::string& d, const std::string& x) {
    auto i = mk(Instruction::Kind::rename_dc);
    i.ds = d;
    i.clock = x;
    return i;
}
Instruction ins_prop(const std::string& a) {
    auto i = mk(Instruction::Kind::prop);
    i.name = a;
    return i;
}
Instruction ins_msg(const std::string& m) {
    auto i = mk(Instruction::Kind::msg);
    i.name = m;
    return i;
}

// ---------------------------------------------------------------------------
// SystemAutomaton
// ---------------------------------------------------------------------------

bool SystemAutomaton::uses_renamings() const {
    for (const auto& t : transitions)
        for (const auto& i : t.label)
            if (i.kind == Instruction::Kind::rename_cc || i.kind == Instruction::Kind::rename_cd ||
                i.kind == Instruction::Kind::rename_dc)
                return true;
    return false;
}

bool SystemAutomaton::uses_event_clocks() const {
    for (const auto& t : transitions)
        for (const auto& i : t.label)
            if (i.kind == Instruction::Kind::event_upper || i.kind == Instruction::Kind::event_lower)
                return true;
    return false;
}

bool SystemAutomaton::uses_age() const {
    for (const auto& t : transitions)
        for (const auto& i : t.label)
            if (i.kind == Instruction::Kind::age_upper || i.kind == Instruction::Kind::age_lower)
                return true;
    return false;
}

bool SystemAutomaton::uses_cc_diagonals() const {
    for (const auto& t : transitions)
        for (const auto& i : t.label)
            if (i.kind == Instruction::Kind::diag_cc || i.kind == Instruction::Kind::diag_cc_low)
                return true;
    return false;
}

bool SystemAutomaton::uses_dc_diagonals() const {
    for (const auto& t : transitions)
        for (const auto& i : t.label)
            if (i.kind == Instruction::Kind::diag_dx || i.kind == Instruction::Kind::diag_dx_low ||
                i.kind == Instruction::Kind::diag_xd || i.kind == Instruction::Kind::diag_xd_low)
                return true;
    return false;
}

std::set<std::string> SystemAutomaton::atom_universe() const {
    std::set<std::string> atoms;
    atoms.insert("nop");
    for (const auto& t : transitions)
        for (const auto& i : t.label) atoms.insert(i.atom());
    for (const auto& p : props) atoms.insert(p);
    for (const auto& m : msgs) atoms.insert(m);
    return atoms;
}

namespace {

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    if (s.rfind("next_", 0) == 0) return false; // reserved for event-clock atoms
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

template <typename Seq>
bool contains(const Seq& seq, const std::string& s) {
    return std::find(seq.begin(), seq.end(), s) != seq.end();
}

} // namespace

std::vector<Diagnostic> validate(const SystemAutomaton& a) {
    std::vector<Diagnostic> out;
    if (a.max_const < 1) out.push_back({"M must be positive"});

    std::set<std::string> names;
    auto check_name = [&](const std::string& s, const char* what) {
        if (!valid_name(s))
            out.push_back({std::string(what) + " name '" + s + "' is not a valid identifier"});
        else if (s == "nop" || s == "succ")
            out.push_back({std::string(what) + " name '" + s + "' is reserved"});
        else if (!names.insert(s).second)
            out.push_back({"name '" + s + "' declared twice"});
    };
    for (const auto& x : a.clocks) check_name(x, "clock");
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        check_name(d, "data structure");
    }
    for (const auto& p : a.props) check_name(p, "prop");
    for (const auto& m : a.msgs) check_name(m, "message");

    if (!contains(a.states, a.initial)) out.push_back({"initial state not declared"});
    for (const auto& f : a.finals)
        if (!contains(a.states, f)) out.push_back({"final state '" + f + "' not declared"});

    auto known_clock = [&](const std::string& x) { return contains(a.clocks, x); };
    auto known_ds = [&](const std::string& d) { return a.ds.count(d) > 0; };

    for (std::size_t ti = 0; ti < a.transitions.size(); ++ti) {
        const auto& t = a.transitions[ti];
        std::string where = "transition " + std::to_string(ti);
        if (!contains(a.states, t.from) || !contains(a.states, t.to))
            out.push_back({where + " endpoint not declared"});
        int ds_ops = 0;
        std::map<std::string, int> renames_of; // per clock target
        bool has_nop = false;
        std::set<std::string> resets;
        for (const auto& i : t.label) {
            using K = Instruction::Kind;
            switch (i.kind) {
                case K::nop: has_nop = true; break;
                case K::write:
                case K::read:
                    ++ds_ops;
                    if (!known_ds(i.ds)) out.push_back({where + ": undeclared ds '" + i.ds + "'"});
                    break;
                case K::reset:
                    resets.insert(i.clock);
                    ++renames_of[i.clock];
                    if (!known_clock(i.clock))
                        out.push_back({where + ": undeclared clock '" + i.clock + "'"});
                    break;
                case K::guard_upper:
                case K::guard_lower:
                    if (!known_clock(i.clock))
                        out.push_back({where + ": undeclared clock '" + i.clock + "'"});
                    break;
                case K::age_upper:
                case K::age_lower:
                    if (!known_ds(i.ds)) out.push_back({where + ": undeclared ds '" + i.ds + "'"});
                    break;
                case K::diag_cc:
                case K::diag_cc_low:
                    if (!known_clock(i.clock) || !known_clock(i.clock2))
                        out.push_back({where + ": undeclared clock in diagonal"});
                    break;
                case K::diag_dx:
                case K::diag_dx_low:
                case K::diag_xd:
                case K::diag_xd_low:
                    if (!known_clock(i.clock) || !known_ds(i.ds))
                        out.push_back({where + ": undeclared name in clock-ds diagonal"});
                    break;
                case K::event_upper:
                case K::event_lower:
                    if (!contains(a.props, i.name))
                        out.push_back({where + ": undeclared prop '" + i.name + "'"});
                    break;
                case K::rename_cc:
                    ++renames_of[i.clock];
                    if (!known_clock(i.clock) || !known_clock(i.clock2))
                        out.push_back({where + ": undeclared clock in renaming"});
                    break;
                case K::rename_cd:
                    ++renames_of[i.clock];
                    if (!known_clock(i.clock) || !known_ds(i.ds))
                        out.push_back({where + ": undeclared name in renaming"});
                    break;
                case K::rename_dc:
                    if (!known_clock(i.clock) || !known_ds(i.ds))
                        out.push_back({where + ": undeclared name in renaming"});
                    break;
                case K::prop:
                    if (!contains(a.props, i.name))
                        out.push_back({where + ": undeclared prop '" + i.name + "'"});
                    break;
                case K::msg:
                    if (!contains(a.msgs, i.name))
                        out.push_back({where + ": undeclared message '" + i.name + "'"});
                    break;
            }
            bool has_const = i.kind == K::guard_upper || i.kind == K::guard_lower ||
                             i.kind == K::age_upper || i.kind == K::age_lower ||
                             i.kind == K::diag_cc || i.kind == K::diag_cc_low ||
                             i.kind == K::diag_dx || i.kind == K::diag_dx_low ||
                             i.kind == K::diag_xd || i.kind == K::diag_xd_low ||
                             i.kind == K::event_upper || i.kind == K::event_lower;
            if (has_const && (i.constant < 0 || i.constant > a.max_const - 1))
                out.push_back({where + ": constant " + std::to_string(i.constant) +
                               " outside [0, M-1]"});
        }
        if (ds_ops > 1) out.push_back({where + ": more than one data structure operation"});
        for (const auto& [x, cnt] : renames_of)
            if (cnt > 1) out.push_back({where + ": clock '" + x + "' renamed twice"});
        if (t.from == a.initial) {
            if (!has_nop) out.push_back({where + ": start-up transition lacks nop"});
            for (const auto& x : a.clocks)
                if (!resets.count(x))
                    out.push_back({where + ": start-up transition does not reset '" + x + "'"});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

Cmp cmp_from_token(const std::string& tok, bool& upper, bool& both) {
    both = false;
    if (tok == "<") {
        upper = true;
        return Cmp::lt;
    }
    if (tok == "<=") {
        upper = true;
        return Cmp::le;
    }
    if (tok == ">") {
        upper = false;
        return Cmp::lt;
    }
    if (tok == ">=") {
        upper = false;
        return Cmp::le;
    }
    if (tok == "=") {
        both = true;
        upper = true;
        return Cmp::le;
    }
    throw ParseError("bad comparator token \"" + tok + "\"");
}

void push_two_sided(InstructionSet& out, const std::string& tok,
                    const std::function<Instruction(Cmp, int)>& upper_of,
                    const std::function<Instruction(Cmp, int)>& lower_of, int k) {
    bool upper = false, both = false;
    Cmp c = cmp_from_token(tok, upper, both);
    if (both) {
        out.push_back(upper_of(Cmp::le, k));
        out.push_back(lower_of(Cmp::le, k));
    } else if (upper) {
        out.push_back(upper_of(c, k));
    } else {
        out.push_back(lower_of(c, k));
    }
}

void parse_instr(InstructionSet& out, const json& arr) {
    if (!arr.is_array() || arr.empty() || !arr[0].is_string())
        throw ParseError("instruction must be a tagged array");
    std::string tag = arr[0].get<std::string>();
    auto str = [&](std::size_t i) {
        if (i >= arr.size() || !arr[i].is_string())
            throw ParseError("instruction \"" + tag + "\": expected string argument");
        return arr[i].get<std::string>();
    };
    auto num = [&](std::size_t i) {
        if (i >= arr.size() || !arr[i].is_number_integer())
            throw ParseError("instruction \"" + tag + "\": expected integer argument");
        return arr[i].get<int>();
    };
    if (tag == "nop") out.push_back(ins_nop());
    else if (tag == "write") out.push_back(ins_write(str(1)));
    else if (tag == "read") out.push_back(ins_read(str(1)));
    else if (tag == "reset") out.push_back(ins_reset(str(1)));
    else if (tag == "guard") {
        std::string x = str(1);
        push_two_sided(out, str(2),
                       [&](Cmp c, int k) { return ins_guard_upper(x, c, k); },
                       [&](Cmp c, int k) { return ins_guard_lower(x, c, k); }, num(3));
    } else if (tag == "age") {
        std::string d = str(1);
        push_two_sided(out, str(2),
                       [&](Cmp c, int k) { return ins_age_upper(d, c, k); },
                       [&](Cmp c, int k) { return ins_age_lower(d, c, k); }, num(3));
    } else if (tag == "diag-cc") {
        std::string x = str(1), y = str(2);
        push_two_sided(out, str(3),
                       [&](Cmp c, int k) { return ins_diag_cc(x, y, c, k); },
                       [&](Cmp c, int k) { return ins_diag_cc_low(x, y, c, k); }, num(4));
    } else if (tag == "diag-dc") {
        std::string d = str(1), x = str(2), orient = str(5);
        if (orient == "d-x")
            push_two_sided(out, str(3),
                           [&](Cmp c, int k) { return ins_diag_dx(d, x, c, k); },
                           [&](Cmp c, int k) { return ins_diag_dx_low(d, x, c, k); }, num(4));
        else if (orient == "x-d")
            push_two_sided(out, str(3),
                           [&](Cmp c, int k) { return ins_diag_xd(x, d, c, k); },
                           [&](Cmp c, int k) { return ins_diag_xd_low(x, d, c, k); }, num(4));
        else
            throw ParseError("diag-dc orientation must be \"d-x\" or \"x-d\"");
    } else if (tag == "next") {
        std::string p = str(1);
        push_two_sided(out, str(2),
                       [&](Cmp c, int k) { return ins_event_upper(p, c, k); },
                       [&](Cmp c, int k) { return ins_event_lower(p, c, k); }, num(3));
    } else if (tag == "rename-cc") out.push_back(ins_rename_cc(str(1), str(2)));
    else if (tag == "rename-cd") out.push_back(ins_rename_cd(str(1), str(2)));
    else if (tag == "rename-dc") out.push_back(ins_rename_dc(str(1), str(2)));
    else if (tag == "prop") out.push_back(ins_prop(str(1)));
    else if (tag == "msg") out.push_back(ins_msg(str(1)));
    else throw ParseError("unknown instruction tag \"" + tag + "\"");
}

void sort_unique(InstructionSet& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

} // namespace

SystemAutomaton parse_system(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed JSON");
    SystemAutomaton a;
    if (doc.contains("clocks"))
        for (const auto& x : doc["clocks"]) a.clocks.push_back(x.get<std::string>());
    if (doc.contains("ds"))
        for (const auto& d : doc["ds"]) {
            std::string kind = d.at("kind").get<std::string>();
            if (kind != "stack" && kind != "queue")
                throw ParseError("ds kind must be \"stack\" or \"queue\"");
            a.ds[d.at("name").get<std::string>()] =
                kind == "stack" ? DsKind::stack : DsKind::queue;
        }
    if (doc.contains("props"))
        for (const auto& p : doc["props"]) a.props.push_back(p.get<std::string>());
    if (doc.contains("msgs"))
        for (const auto& m : doc["msgs"]) a.msgs.push_back(m.get<std::string>());
    a.max_const = doc.value("M", 1);
    for (const auto& s : doc.at("states")) a.states.push_back(s.get<std::string>());
    a.initial = doc.at("initial").get<std::string>();
    for (const auto& f : doc.at("finals")) a.finals.push_back(f.get<std::string>());
    for (const auto& t : doc.at("transitions")) {
        SystemAutomaton::Transition tr;
        tr.from = t.at("from").get<std::string>();
        tr.to = t.at("to").get<std::string>();
        for (const auto& i : t.at("instr")) parse_instr(tr.label, i);
        sort_unique(tr.label);
        a.transitions.push_back(std::move(tr));
    }
    auto ds = validate(a);
    if (!ds.empty()) throw SemanticError("invalid system: " + join_diagnostics(ds));
    return a;
}

std::string serialize(const SystemAutomaton& a) {
    json doc;
    doc["clocks"] = a.clocks;
    json ds = json::array();
    for (const auto& [name, kind] : a.ds)
        ds.push_back({{"name", name}, {"kind", kind == DsKind::stack ? "stack" : "queue"}});
    doc["ds"] = ds;
    doc["props"] = a.props;
    doc["msgs"] = a.msgs;
    doc["M"] = a.max_const;
    doc["states"] = a.states;
    doc["initial"] = a.initial;
    doc["finals"] = a.finals;
    json ts = json::array();
    for (const auto& t : a.transitions) {
        json instr = json::array();
        for (const auto& i : t.label) {
            using K = Instruction::Kind;
            switch (i.kind) {
                case K::nop: instr.push_back(json::array({"nop"})); break;
                case K::write: instr.push_back(json::array({"write", i.ds})); break;
                case K::read: instr.push_back(json::array({"read", i.ds})); break;
                case K::reset: instr.push_back(json::array({"reset", i.clock})); break;
                case K::guard_upper:
                    instr.push_back(json::array({"guard", i.clock, cmp_str(i.cmp), i.constant}));
                    break;
                case K::guard_lower:
                    instr.push_back(json::array(
                        {"guard", i.clock, i.cmp == Cmp::lt ? ">" : ">=", i.constant}));
                    break;
                case K::age_upper:
                    instr.push_back(json::array({"age", i.ds, cmp_str(i.cmp), i.constant}));
                    break;
                case K::age_lower:
                    instr.push_back(
                        json::array({"age", i.ds, i.cmp == Cmp::lt ? ">" : ">=", i.constant}));
                    break;
                case K::diag_cc:
                    instr.push_back(json::array(
                        {"diag-cc", i.clock, i.clock2, cmp_str(i.cmp), i.constant}));
                    break;
                case K::diag_cc_low:
                    instr.push_back(json::array({"diag-cc", i.clock, i.clock2,
                                                 i.cmp == Cmp::lt ? ">" : ">=", i.constant}));
                    break;
                case K::diag_dx:
                    instr.push_back(json::array(
                        {"diag-dc", i.ds, i.clock, cmp_str(i.cmp), i.constant, "d-x"}));
                    break;
                case K::diag_dx_low:
                    instr.push_back(json::array({"diag-dc", i.ds, i.clock,
                                                 i.cmp == Cmp::lt ? ">" : ">=", i.constant,
                                                 "d-x"}));
                    break;
                case K::diag_xd:
                    instr.push_back(json::array(
                        {"diag-dc", i.ds, i.clock, cmp_str(i.cmp), i.constant, "x-d"}));
                    break;
                case K::diag_xd_low:
                    instr.push_back(json::array({"diag-dc", i.ds, i.clock,
                                                 i.cmp == Cmp::lt ? ">" : ">=", i.constant,
                                                 "x-d"}));
                    break;
                case K::event_upper:
                    instr.push_back(json::array({"next", i.name, cmp_str(i.cmp), i.constant}));
                    break;
                case K::event_lower:
                    instr.push_back(
                        json::array({"next", i.name, i.cmp == Cmp::lt ? ">" : ">=", i.constant}));
                    break;
                case K::rename_cc:
                    instr.push_back(json::array({"rename-cc", i.clock, i.clock2}));
                    break;
                case K::rename_cd:
                    instr.push_back(json::array({"rename-cd", i.clock, i.ds}));
                    break;
                case K::rename_dc:
                    instr.push_back(json::array({"rename-dc", i.ds, i.clock}));
                    break;
                case K::prop: instr.push_back(json::array({"prop", i.name})); break;
                case K::msg: instr.push_back(json::array({"msg", i.name})); break;
            }
        }
        ts.push_back({{"from", t.from}, {"instr", instr}, {"to", t.to}});
    }
    doc["transitions"] = ts;
    return doc.dump();
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

std::vector<Diagnostic> validate_run(const SystemAutomaton& a, const Run& run) {
    std::vector<Diagnostic> out;
    if (run.instructions.empty()) {
        out.push_back({"empty run"});
        return out;
    }
    // start-up convention
    const auto& first = run.instructions.front();
    auto has = [&](const Instruction& want) {
        return std::find(first.begin(), first.end(), want) != first.end();
    };
    if (!has(ins_nop())) out.push_back({"run does not start with nop"});
    for (const auto& x : a.clocks)
        if (!has(ins_reset(x))) out.push_back({"run does not reset clock '" + x + "' at start-up"});

    std::map<std::string, long long> balance;
    for (std::size_t pos = 0; pos < run.instructions.size(); ++pos) {
        for (const auto& i : run.instructions[pos]) {
            if (i.kind == Instruction::Kind::write) ++balance[i.ds];
            if (i.kind == Instruction::Kind::read) {
                if (--balance[i.ds] < 0)
                    out.push_back({"read of '" + i.ds + "' before a matching write at position " +
                                   std::to_string(pos)});
            }
        }
    }
    for (const auto& [d, b] : balance)
        if (b > 0)
            out.push_back({"data structure '" + d + "' ends with " + std::to_string(b) +
                           " unread writes"});
    return out;
}

Run autocomplete_renamings(const SystemAutomaton& a, Run run) {
    for (auto& set : run.instructions) {
        for (const auto& x : a.clocks) {
            bool renamed = false;
            for (const auto& i : set)
                if ((i.kind == Instruction::Kind::reset || i.kind == Instruction::Kind::rename_cc ||
                     i.kind == Instruction::Kind::rename_cd) &&
                    i.clock == x)
                    renamed = true;
            if (!renamed) set.push_back(ins_rename_cc(x, x));
        }
        sort_unique(set);
    }
    return run;
}

LabeledGraph build_T_graph(const SystemAutomaton& a, const Run& run) {
    auto ds = validate_run(a, run);
    if (!ds.empty()) throw SemanticError("invalid run: " + join_diagnostics(ds));

    const int n = static_cast<int>(run.instructions.size());
    LabeledGraph g;
    g.node_count = n;
    g.labels.assign(static_cast<std::size_t>(n), {});
    for (int i = 0; i < n; ++i)
        for (const auto& ins : run.instructions[static_cast<std::size_t>(i)])
            g.labels[static_cast<std::size_t>(i)].push_back(ins.atom());
    for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, kSuccSymbol, i + 1});

    // stack: most recent unmatched write; queue: earliest unmatched write
    std::map<std::string, std::deque<int>> pending;
    for (int i = 0; i < n; ++i) {
        for (const auto& ins : run.instructions[static_cast<std::size_t>(i)]) {
            if (ins.kind == Instruction::Kind::write) pending[ins.ds].push_back(i);
            if (ins.kind == Instruction::Kind::read) {
                auto& q = pending[ins.ds];
                assert(!q.empty());
                int w;
                if (a.ds.at(ins.ds) == DsKind::stack) {
                    w = q.back();
                    q.pop_back();
                } else {
                    w = q.front();
                    q.pop_front();
                }
                g.edges.push_back({w, ins.ds, i});
            }
        }
    }
    g.normalize();
    return g;
}

// ---------------------------------------------------------------------------
// Atom parsing (T-graph labels back to instructions)
// ---------------------------------------------------------------------------

namespace {

bool is_number(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Instruction parse_atom(const SystemAutomaton& a, const std::string& atom) {
    if (atom == "nop") return ins_nop();
    if (atom.rfind("w:", 0) == 0) return ins_write(atom.substr(2));
    if (atom.rfind("r:", 0) == 0) return ins_read(atom.substr(2));
    if (contains(a.props, atom)) return ins_prop(atom);
    if (contains(a.msgs, atom)) return ins_msg(atom);

    auto assign = atom.find(":=");
    if (assign != std::string::npos) {
        std::string lhs = atom.substr(0, assign);
        std::string rhs = atom.substr(assign + 2);
        if (rhs == "0" && contains(a.clocks, lhs)) return ins_reset(lhs);
        if (contains(a.clocks, lhs) && contains(a.clocks, rhs)) return ins_rename_cc(lhs, rhs);
        if (contains(a.clocks, lhs) && a.ds.count(rhs)) return ins_rename_cd(lhs, rhs);
        if (a.ds.count(lhs) && contains(a.clocks, rhs)) return ins_rename_dc(lhs, rhs);
        throw SemanticError("cannot parse assignment atom '" + atom + "'");
    }

    std::size_t pos = atom.find("<=");
    Cmp cmp = Cmp::le;
    std::size_t cmp_len = 2;
    if (pos == std::string::npos) {
        pos = atom.find('<');
        cmp = Cmp::lt;
        cmp_len = 1;
    }
    if (pos == std::string::npos) throw SemanticError("cannot parse atom '" + atom + "'");
    std::string lhs = atom.substr(0, pos);
    std::string rhs = atom.substr(pos + cmp_len);

    auto parse_expr = [&](const std::string& e, bool lower, int k) -> Instruction {
        auto dash = e.find('-');
        if (dash == std::string::npos) {
            if (e.rfind("next_", 0) == 0) {
                std::string p = e.substr(5);
                return lower ? ins_event_lower(p, cmp, k) : ins_event_upper(p, cmp, k);
            }
            if (contains(a.clocks, e)) return lower ? ins_guard_lower(e, cmp, k) : ins_guard_upper(e, cmp, k);
            if (a.ds.count(e)) return lower ? ins_age_lower(e, cmp, k) : ins_age_upper(e, cmp, k);
            throw SemanticError("unknown name '" + e + "' in atom '" + atom + "'");
        }
        std::string u = e.substr(0, dash), v = e.substr(dash + 1);
        if (contains(a.clocks, u) && contains(a.clocks, v))
            return lower ? ins_diag_cc_low(u, v, cmp, k) : ins_diag_cc(u, v, cmp, k);
        if (a.ds.count(u) && contains(a.clocks, v))
            return lower ? ins_diag_dx_low(u, v, cmp, k) : ins_diag_dx(u, v, cmp, k);
        if (contains(a.clocks, u) && a.ds.count(v))
            return lower ? ins_diag_xd_low(u, v, cmp, k) : ins_diag_xd(u, v, cmp, k);
        throw SemanticError("unknown difference '" + e + "' in atom '" + atom + "'");
    };

    if (is_number(lhs)) return parse_expr(rhs, true, std::stoi(lhs));
    if (is_number(rhs)) return parse_expr(lhs, false, std::stoi(rhs));
    throw SemanticError("cannot parse atom '" + atom + "'");
}

struct NodeInfo {
    InstructionSet instructions;
};

std::vector<NodeInfo> decode_nodes(const SystemAutomaton& a, const LabeledGraph& g) {
    std::vector<NodeInfo> out(static_cast<std::size_t>(g.node_count));
    for (int v = 0; v < g.node_count; ++v)
        for (const auto& atom : g.labels[static_cast<std::size_t>(v)])
            out[static_cast<std::size_t>(v)].instructions.push_back(parse_atom(a, atom));
    return out;
}

// Value-origin bookkeeping under simultaneous renaming semantics: org[i][x]
// is the node whose timestamp the value held by x at the END of node i was
// born at.
struct OriginTable {
    std::map<std::string, std::vector<int>> org; // clock -> per node
    std::map<std::string, std::vector<int>> written; // ds -> origin per write node (-1 none)

    int at(const std::string& x, int i) const { return org.at(x)[static_cast<std::size_t>(i)]; }
};

OriginTable compute_origins(const SystemAutomaton& a, const std::vector<NodeInfo>& nodes,
                            const std::map<int, int>& read_to_write, bool renamings) {
    const int n = static_cast<int>(nodes.size());
    OriginTable t;
    for (const auto& x : a.clocks) t.org[x].assign(static_cast<std::size_t>(n), -1);
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        t.written[d].assign(static_cast<std::size_t>(n), -1);
    }

    for (int i = 0; i < n; ++i) {
        // writes first: d := x reads the pre-state of node i
        for (const auto& ins : nodes[static_cast<std::size_t>(i)].instructions) {
            if (ins.kind == Instruction::Kind::rename_dc) {
                if (i == 0) throw SemanticError("ds renaming on the start-up node");
                t.written[ins.ds][static_cast<std::size_t>(i)] = t.at(ins.clock, i - 1);
            }
        }
        for (const auto& x : a.clocks) {
            int value = i == 0 ? -1 : t.at(x, i - 1); // default: unchanged
            for (const auto& ins : nodes[static_cast<std::size_t>(i)].instructions) {
                if (ins.kind == Instruction::Kind::reset && ins.clock == x) value = i;
                if (!renamings) continue;
                if (ins.kind == Instruction::Kind::rename_cc && ins.clock == x)
                    value = i == 0 ? -1 : t.at(ins.clock2, i - 1);
                if (ins.kind == Instruction::Kind::rename_cd && ins.clock == x) {
                    auto w = read_to_write.find(i);
                    if (w == read_to_write.end())
                        throw SemanticError("clock := ds renaming on a node without a read");
                    int origin = t.written.at(ins.ds)[static_cast<std::size_t>(w->second)];
                    if (origin < 0)
                        throw SemanticError("read renaming with no ds := clock at the write");
                    value = origin;
                }
            }
            t.org[x][static_cast<std::size_t>(i)] = value;
        }
    }
    return t;
}

} // namespace

TimingConstraintGraph build_weighted_graph(const SystemAutomaton& a, const LabeledGraph& t_graph) {
    const int n = t_graph.node_count;
    auto nodes = decode_nodes(a, t_graph);
    const bool renamings = a.uses_renamings();

    std::map<int, int> read_to_write; // per ds edge
    for (const auto& e : t_graph.edges) {
        if (e.symbol == kSuccSymbol) continue;
        read_to_write[e.dst] = e.src;
    }

    OriginTable origins = compute_origins(a, nodes, read_to_write, renamings);

    TimingConstraintGraph out;
    out.graph.node_count = n;
    out.graph.max_const = a.max_const;
    for (int i = 0; i + 1 < n; ++i) out.graph.order_edges.push_back({i, i + 1});

    auto origin_of_clock = [&](const std::string& x, int i) {
        if (i == 0) throw SemanticError("constraint on node 0 precedes every reset");
        int j = origins.at(x, i - 1);
        if (j < 0) throw SemanticError("clock '" + x + "' checked before any reset");
        return j;
    };
    auto origin_of_ds = [&](const std::string& d, int i) {
        auto w = read_to_write.find(i);
        if (w == read_to_write.end())
            throw SemanticError("age or ds-diagonal constraint on a node without a read");
        if (!renamings) return w->second;
        int origin = origins.written.at(d)[static_cast<std::size_t>(w->second)];
        return origin >= 0 ? origin : w->second;
    };
    auto add = [&](int u, Cmp cmp, int w, int v) {
        out.graph.constraint_edges.push_back({u, cmp, w, v});
    };
    auto next_prop = [&](int i, const std::string& p) -> int {
        for (int v = i + 1; v < n; ++v)
            if (t_graph.has_label(v, p)) return v;
        return -1;
    };

    for (int i = 0; i < n; ++i) {
        for (const auto& ins : nodes[static_cast<std::size_t>(i)].instructions) {
            using K = Instruction::Kind;
            switch (ins.kind) {
                case K::guard_upper: add(origin_of_clock(ins.clock, i), ins.cmp, ins.constant, i); break;
                case K::guard_lower: add(i, ins.cmp, -ins.constant, origin_of_clock(ins.clock, i)); break;
                case K::age_upper: add(origin_of_ds(ins.ds, i), ins.cmp, ins.constant, i); break;
                case K::age_lower: add(i, ins.cmp, -ins.constant, origin_of_ds(ins.ds, i)); break;
                case K::diag_cc:
                    add(origin_of_clock(ins.clock, i), ins.cmp, ins.constant,
                        origin_of_clock(ins.clock2, i));
                    break;
                case K::diag_cc_low:
                    add(origin_of_clock(ins.clock2, i), ins.cmp, -ins.constant,
                        origin_of_clock(ins.clock, i));
                    break;
                case K::diag_dx:
                    add(origin_of_ds(ins.ds, i), ins.cmp, ins.constant,
                        origin_of_clock(ins.clock, i));
                    break;
                case K::diag_dx_low:
                    add(origin_of_clock(ins.clock, i), ins.cmp, -ins.constant,
                        origin_of_ds(ins.ds, i));
                    break;
                case K::diag_xd:
                    add(origin_of_clock(ins.clock, i), ins.cmp, ins.constant,
                        origin_of_ds(ins.ds, i));
                    break;
                case K::diag_xd_low:
                    add(origin_of_ds(ins.ds, i), ins.cmp, -ins.constant,
                        origin_of_clock(ins.clock, i));
                    break;
                case K::event_upper: {
                    int v = next_prop(i, ins.name);
                    if (v < 0) out.unmatched_events.push_back({i, ins.atom()});
                    else add(i, ins.cmp, ins.constant, v);
                    break;
                }
                case K::event_lower: {
                    int v = next_prop(i, ins.name);
                    if (v < 0) out.unmatched_events.push_back({i, ins.atom()});
                    else add(v, ins.cmp, -ins.constant, i);
                    break;
                }
                default: break;
            }
        }
    }
    out.graph.normalize();
    return out;
}

// ---------------------------------------------------------------------------
// Tracking automaton
// ---------------------------------------------------------------------------

// State q_x at node u means the tracked value sits in clock x at the end of
// node u.  Renamings read the pre-state of the node they sit on, so each
// transition first advances and then tests the renaming there.
TrackingAutomaton build_tracking_automaton(const SystemAutomaton& a) {
    TrackingAutomaton t;
    for (const auto& x : a.clocks) t.states.push_back("q_" + x);
    for (const auto& x : a.clocks) {
        for (const auto& x2 : a.clocks) {
            t.transitions.push_back({"q_" + x,
                                     p_seq({p_edge(kSuccSymbol),
                                            p_test(s_prop(ins_rename_cc(x2, x).atom()))}),
                                     "q_" + x2});
            for (const auto& [d, kind] : a.ds) {
                (void)kind;
                // value flows x -> d at a write, then d -> x2 at the matching read
                t.transitions.push_back(
                    {"q_" + x,
                     p_seq({p_edge(kSuccSymbol), p_test(s_prop(ins_rename_dc(d, x).atom())),
                            p_edge(d), p_test(s_prop(ins_rename_cd(x2, d).atom()))}),
                     "q_" + x2});
            }
        }
    }
    return t;
}

bool track_origin(const SystemAutomaton& a, const LabeledGraph& t_graph, int u,
                  const std::string& x, int v, const std::string& x2) {
    if (!contains(a.clocks, x) || !contains(a.clocks, x2))
        throw SemanticError("track_origin: undeclared clock");
    AutoRegistry reg;
    reg.emplace("track", build_tracking_automaton(a));
    EvalOptions opts;
    opts.autos = &reg;
    std::set<std::string> sigma = a.atom_universe();
    for (const auto& c : a.clocks)
        for (const auto& c2 : a.clocks) sigma.insert(ins_rename_cc(c, c2).atom());
    for (const auto& c : a.clocks)
        for (const auto& [d, kind] : a.ds) {
            (void)kind;
            sigma.insert(ins_rename_cd(c, d).atom());
            sigma.insert(ins_rename_dc(d, c).atom());
        }
    opts.sigma = sigma;
    std::set<std::string> gamma;
    gamma.insert(kSuccSymbol);
    for (const auto& [d, kind] : a.ds) {
        (void)kind;
        gamma.insert(d);
    }
    opts.gamma = gamma;
    auto rel = eval_path(t_graph, p_auto("track", "q_" + x, "q_" + x2), opts);
    return rel.count({u, v}) > 0;
}

// ---------------------------------------------------------------------------
// Feasibility
// ---------------------------------------------------------------------------

FeasibilityResult feasible(const SystemAutomaton& a, const Run& run) {
    Run r = a.uses_renamings() ? autocomplete_renamings(a, run) : run;
    LabeledGraph g = build_T_graph(a, r);
    TimingConstraintGraph tg = build_weighted_graph(a, g);
    FeasibilityResult out;
    out.unmatched_events = tg.unmatched_events;
    if (!out.unmatched_events.empty()) {
        out.feasible = false;
        return out;
    }
    RealizeResult rr = check_realizable(tg.graph);
    if (is_realizable(rr)) {
        out.feasible = true;
        out.ts = std::get<Realization>(rr);
    } else {
        out.feasible = false;
        out.cycle = std::get<NegCycleWitness>(rr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

void enumerate_runs(const SystemAutomaton& a, int bound,
                    const std::function<bool(const Run&)>& visit,
                    const EnumerationOptions& opts) {
    if (bound < 1) throw SemanticError("enumeration bound must be >= 1");
    auto ds_valid = validate(a);
    if (!ds_valid.empty()) throw SemanticError("invalid system: " + join_diagnostics(ds_valid));

    std::uint64_t steps = 0;
    std::uint64_t produced = 0;

    struct Frame {
        std::string state;
        std::map<std::string, long long> balance;
    };

    // length-lexicographic: emit all runs of length L before length L+1
    for (int len = 1; len <= bound; ++len) {
        Run run;
        run.states.push_back(a.initial);
        bool stop = false;

        std::function<bool(const std::string&, int, std::map<std::string, long long>&)> go =
            [&](const std::string& state, int depth,
                std::map<std::string, long long>& balance) -> bool {
            if (++steps > opts.max_steps)
                throw ResourceLimitError("run enumeration step budget exceeded");
            if (depth == len) {
                bool balanced = true;
                for (const auto& [d, b] : balance)
                    if (b != 0) balanced = false;
                if (balanced && contains(a.finals, state)) {
                    if (++produced > opts.max_runs)
                        throw ResourceLimitError("run enumeration produced too many runs");
                    if (!visit(run)) return false;
                }
                return true;
            }
            long long outstanding = 0;
            for (const auto& [d, b] : balance) outstanding += b;
            if (outstanding > len - depth) return true; // cannot drain in time
            for (const auto& t : a.transitions) {
                if (t.from != state) continue;
                bool ok = true;
                for (const auto& i : t.label) {
                    if (i.kind == Instruction::Kind::read && balance[i.ds] == 0) ok = false;
                }
                if (!ok) continue;
                for (const auto& i : t.label) {
                    if (i.kind == Instruction::Kind::write) ++balance[i.ds];
                    if (i.kind == Instruction::Kind::read) --balance[i.ds];
                }
                run.instructions.push_back(t.label);
                run.states.push_back(t.to);
                bool keep = go(t.to, depth + 1, balance);
                run.instructions.pop_back();
                run.states.pop_back();
                for (const auto& i : t.label) {
                    if (i.kind == Instruction::Kind::write) --balance[i.ds];
                    if (i.kind == Instruction::Kind::read) ++balance[i.ds];
                }
                if (!keep) return false;
            }
            return true;
        };

        std::map<std::string, long long> balance;
        stop = !go(a.initial, 0, balance);
        if (stop) return;
    }
}

std::vector<Run> collect_runs(const SystemAutomaton& a, int bound,
                              const EnumerationOptions& opts) {
    std::vector<Run> out;
    enumerate_runs(
        a, bound,
        [&](const Run& r) {
            out.push_back(r);
            return true;
        },
        opts);
    return out;
}

} // namespace tcg
