#ifndef TCG_REALIZABILITY_HPP
#define TCG_REALIZABILITY_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "tcg/graph.hpp"

namespace tcg {

// ---------------------------------------------------------------------------
// Direct decision procedure
// ---------------------------------------------------------------------------

// A cyclic node sequence whose consecutive pairs (a, b), wrapping around,
// are either constraint edges (a, cmp, w, b) or reversed order edges (b, a);
// total weight < 0, or == 0 with at least one strict edge.
struct NegCycleWitness {
    std::vector<int> nodes;
    long long total_weight = 0;
    bool contains_strict = false;
};

using RealizeResult = std::variant<Realization, NegCycleWitness>;

inline bool is_realizable(const RealizeResult& r) {
    return std::holds_alternative<Realization>(r);
}

// Bellman-Ford over lexicographic (weight, strict-count) arithmetic; returns
// either a realization with exact rational timestamps (denominator n+1) or a
// negative-cycle witness, never both.  Works on non-linear order edges too.
RealizeResult check_realizable(const WeightedGraph& g);

// Checks the witness against the graph: edges exist and the weight condition
// holds.
bool verify_neg_cycle(const WeightedGraph& g, const NegCycleWitness& w);

// Large-gap contraction from the realizability proof; requires a linear graph
// and a realization of it.  The result realizes g and is slowly monotone:
// 0 <= floor(ts(v)) - floor(ts(u)) <= M-1 on consecutive nodes.
Realization slowly_monotone_normalize(const WeightedGraph& g, const Realization& ts);
bool is_slowly_monotone(const WeightedGraph& g, const Realization& ts);

// ---------------------------------------------------------------------------
// Modular (tsm) machinery
// ---------------------------------------------------------------------------

struct Tsm {
    int M = 1;
    std::vector<int> residues; // per node, in [0, M)
};

// Derives residues floor(ts(v)) mod M.
Tsm tsm_from_realization(int M, const Realization& ts);

// Pairwise residue distances over a linear graph.
class ModularDistances {
public:
    ModularDistances(const WeightedGraph& g, const Tsm& t);

    int M() const { return M_; }
    int d(int u, int v) const;      // (res(v) - res(u)) mod M
    int d_plus(int u, int v) const; // chain-summed, capped at M; antisymmetric
    bool is_big(int u, int v) const; // by the two-witness definition

private:
    int M_;
    int n_;
    std::vector<int> residues_;
    std::vector<long long> prefix_; // prefix_[i] = sum of d(k, k+1) for k < i
};

// Def. of weak satisfaction evaluated both by its clauses (a)/(b) and by the
// d_plus characterization; the two must agree (internal consistency check).
bool weakly_satisfies(const WeightedGraph& g, const Tsm& t);

// Fractional-part order relations derived from a tsm.
struct FracRelations {
    int node_count = 0;
    std::vector<std::pair<int, int>> geq; // frac(ts(u)) >= frac(ts(v))
    std::vector<std::pair<int, int>> gt;  // frac(ts(u)) >  frac(ts(v))
    bool geq_has(int u, int v) const;
    bool gt_has(int u, int v) const;
};

FracRelations fractional_relations(const WeightedGraph& g, const Tsm& t);

// tsm is a realizability certificate iff it weakly satisfies g and no gt pair
// (u, v) has a geq* path back from v to u.
bool check_tsm_certificate(const WeightedGraph& g, const Tsm& t);

// ts0 by prefix sums of residue distances, ts1 by the longest count of gt
// edges along geq paths; ts = ts0 + ts1/(n+1) realizes g (verified).
Realization realization_from_certificate(const WeightedGraph& g, const Tsm& t);

struct CertificateSearchOptions {
    std::uint64_t max_maps = 20'000'000; // cap on M^n
};

// Exhaustive lexicographic search over residue maps; first certificate wins.
std::optional<Tsm> search_certificate(const WeightedGraph& g,
                                      const CertificateSearchOptions& opts = {});

} // namespace tcg

#endif
