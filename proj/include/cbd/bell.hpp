#ifndef CBD_BELL_HPP
#define CBD_BELL_HPP

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "cbd/coupling.hpp"
#include "cbd/errors.hpp"
#include "cbd/system.hpp"

namespace cbd {

/// Product expectations of a 2x2 binary system under the +1/-1 encoding
/// (first alphabet label -> +1). Index [i][j] is the context pairing
/// Alice's content i with Bob's content j.
struct CorrelationTable {
    std::array<std::array<Rational, 2>, 2> expectation;
    std::array<std::array<Rational, 2>, 2> marg_a;
    std::array<std::array<Rational, 2>, 2> marg_b;
    std::array<std::string, 2> alice;
    std::array<std::string, 2> bob;
    std::array<std::array<std::string, 2>, 2> context;
};

struct ChshReport {
    /// |E11 + E12 + E21 + E22| with the minus sign on, in order,
    /// E22, E21, E12, E11.
    std::array<Rational, 4> values;
    Rational max_value;
    bool classical_ok = true;   // max <= 2
    bool tsirelson_ok = true;   // max^2 <= 8
};

namespace detail {

struct TwoByTwo {
    std::array<std::string, 2> alice, bob;
    std::array<std::array<std::size_t, 2>, 2> block;   // block index for (i, j)
    std::array<std::array<bool, 2>, 2> alice_first;     // Alice's variable listed first?
};

/// Recognizes the 2x2 design: four binary contents, four two-variable
/// contexts forming a 4-cycle. The side containing the first variable of the
/// first block is called Alice; each side is ordered by content id.
inline TwoByTwo two_by_two(const System& s) {
    auto fail = [](const std::string& why) { return ShapeError("not a 2x2 binary system: " + why); };
    if (s.content_ids().size() != 4) throw fail("expected 4 contents");
    if (s.blocks().size() != 4) throw fail("expected 4 contexts");
    for (const auto& [id, alpha] : s.contents())
        if (alpha.size() != 2) throw fail("content '" + id + "' is not binary");
    for (const auto& b : s.blocks())
        if (b.variables.size() != 2) throw fail("context '" + b.context + "' does not hold exactly 2 variables");

    std::map<std::string, int> side;
    side[s.blocks()[0].variables[0].content] = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& b : s.blocks()) {
            const auto& x = b.variables[0].content;
            const auto& y = b.variables[1].content;
            for (auto [p, q] : {std::pair{x, y}, std::pair{y, x}}) {
                auto it = side.find(p);
                if (it == side.end()) continue;
                auto jt = side.find(q);
                if (jt == side.end()) {
                    side[q] = 1 - it->second;
                    changed = true;
                } else if (jt->second == it->second) {
                    throw fail("contexts do not pair two disjoint sides");
                }
            }
        }
    }
    TwoByTwo t;
    std::vector<std::string> a, bb;
    for (const auto& [c, sd] : side) (sd == 0 ? a : bb).push_back(c);
    if (side.size() != 4 || a.size() != 2 || bb.size() != 2) throw fail("contexts do not form a 4-cycle");
    t.alice = {a[0], a[1]};
    t.bob = {bb[0], bb[1]};
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& b = s.blocks()[k];
        bool first = side[b.variables[0].content] == 0;
        const auto& ac = first ? b.variables[0].content : b.variables[1].content;
        const auto& bc = first ? b.variables[1].content : b.variables[0].content;
        std::size_t i = ac == t.alice[0] ? 0 : 1;
        std::size_t j = bc == t.bob[0] ? 0 : 1;
        if (!seen.insert({i, j}).second) throw fail("a pair of settings is repeated");
        t.block[i][j] = k;
        t.alice_first[i][j] = first;
    }
    return t;
}

inline int pm(std::uint32_t outcome) { return outcome == 0 ? 1 : -1; }

}  // namespace detail

inline bool is_two_by_two(const System& s) {
    try {
        detail::two_by_two(s);
        return true;
    } catch (const ShapeError&) {
        return false;
    }
}

inline CorrelationTable correlation_table(const System& s) {
    auto t = detail::two_by_two(s);
    CorrelationTable ct;
    ct.alice = t.alice;
    ct.bob = t.bob;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const auto& blk = s.blocks()[t.block[i][j]];
            ct.context[i][j] = blk.context;
            std::size_t ai = t.alice_first[i][j] ? 0 : 1;
            Rational e = 0, ea = 0, eb = 0;
            for (const auto& [tuple, p] : blk.pmf) {
                int a = detail::pm(tuple[ai]), b = detail::pm(tuple[1 - ai]);
                e += p * (a * b);
                ea += p * a;
                eb += p * b;
            }
            ct.expectation[i][j] = e;
            ct.marg_a[i][j] = ea;
            ct.marg_b[i][j] = eb;
        }
    return ct;
}

inline ChshReport chsh(const CorrelationTable& t) {
    const auto& E = t.expectation;
    Rational sum = E[0][0] + E[0][1] + E[1][0] + E[1][1];
    ChshReport r;
    r.values = {abs(sum - 2 * E[1][1]), abs(sum - 2 * E[1][0]), abs(sum - 2 * E[0][1]), abs(sum - 2 * E[0][0])};
    r.max_value = *std::max_element(r.values.begin(), r.values.end());
    r.classical_ok = r.max_value <= 2;
    r.tsirelson_ok = r.max_value * r.max_value <= 8;
    return r;
}

/// Tsirelson check allowing every table entry to be off by up to `slack`
/// (e.g. from rounding irrational correlations): max - 4*slack <= 2*sqrt(2),
/// decided exactly by squaring.
inline bool tsirelson_within(const ChshReport& r, const Rational& slack) {
    Rational lowered = r.max_value - 4 * slack;
    return lowered <= 0 || lowered * lowered <= 8;
}

struct FineReport {
    bool applicable = false;
    std::string skipped_reason;
    bool uniform_marginals = false;
    bool lp_identity_feasible = false;
    bool chsh_classical = false;
    /// The two verdicts disagree. For non-uniform marginals the LP verdict is
    /// authoritative and the CHSH verdict only advisory.
    bool mismatch = false;
    ChshReport chsh;
};

/// Cross-checks identity-coupling feasibility (LP) against the CHSH verdict
/// on a consistently connected 2x2 binary system.
inline FineReport fine_equivalence_check(const System& s, const CouplingOptions& opt = {}) {
    FineReport r;
    CorrelationTable t = correlation_table(s);
    r.chsh = chsh(t);
    r.chsh_classical = r.chsh.classical_ok;
    if (!is_consistently_connected(s).consistent) {
        r.skipped_reason = "not consistently connected";
        return r;
    }
    r.applicable = true;
    r.uniform_marginals = true;
    for (const auto& row : t.marg_a)
        for (const auto& m : row) r.uniform_marginals = r.uniform_marginals && m == 0;
    for (const auto& row : t.marg_b)
        for (const auto& m : row) r.uniform_marginals = r.uniform_marginals && m == 0;
    r.lp_identity_feasible = identity_coupling_feasible(s, opt).feasible();
    r.mismatch = r.lp_identity_feasible != r.chsh_classical;
    return r;
}

}  // namespace cbd

#endif
