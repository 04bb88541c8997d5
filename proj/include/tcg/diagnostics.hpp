#ifndef TCG_DIAGNOSTICS_HPP
#define TCG_DIAGNOSTICS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace tcg {

// Validation findings are data, not exceptions: validate() returns a list
// and an empty list means every invariant holds.
struct Diagnostic {
    std::string message;
};

inline std::string join_diagnostics(const std::vector<Diagnostic>& ds) {
    std::string out;
    for (const auto& d : ds) {
        if (!out.empty()) out += "; ";
        out += d.message;
    }
    return out;
}

struct ParseError : std::runtime_error {
    ParseError(const std::string& what, int line = -1, int col = -1)
        : std::runtime_error(location_prefix(line, col) + what), line(line), col(col) {}
    int line;
    int col;

private:
    static std::string location_prefix(int line, int col) {
        if (line < 0) return "";
        return "line " + std::to_string(line) + ", col " + std::to_string(col) + ": ";
    }
};

struct SemanticError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResourceLimitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tcg

#endif
