#ifndef CBD_COUPLING_HPP
#define CBD_COUPLING_HPP

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbd/errors.hpp"
#include "cbd/lp.hpp"
#include "cbd/rational.hpp"
#include "cbd/system.hpp"

namespace cbd {

struct CouplingOptions {
    /// Largest admissible number of LP decision variables (or witness atoms).
    mpz_class var_cap = 10'000'000;
    LpOptions lp;
};

/// A joint pmf over every variable of a system. Keys hold one outcome index
/// per roster entry; only atoms with positive mass are stored.
struct Coupling {
    System system;
    std::map<OutcomeTuple, Rational> atoms;
};

enum class Feasibility { feasible, infeasible };

inline const char* to_string(Feasibility f) { return f == Feasibility::feasible ? "feasible" : "infeasible"; }

struct FeasibilityResult {
    Feasibility status = Feasibility::infeasible;
    std::optional<Coupling> witness;
    /// Farkas multipliers aligned with `constraint_labels` (infeasible only).
    std::optional<std::vector<Rational>> certificate;
    std::vector<std::string> constraint_labels;
    bool certificate_verified = false;
    std::optional<Rational> optimum;
    std::string note;

    bool feasible() const { return status == Feasibility::feasible; }
};

// ---------------------------------------------------------------------------
// Projections and queries on couplings

/// Marginal of a coupling on one block's variables.
inline std::map<OutcomeTuple, Rational> project(const Coupling& c, std::size_t block) {
    const auto& vars = c.system.blocks().at(block).variables;
    std::vector<std::size_t> pos;
    for (const auto& v : vars) pos.push_back(*c.system.roster_index(v));
    std::map<OutcomeTuple, Rational> out;
    for (const auto& [a, p] : c.atoms) {
        OutcomeTuple t;
        t.reserve(pos.size());
        for (auto i : pos) t.push_back(a[i]);
        out[t] += p;
    }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

/// True iff the coupling is a pmf whose projection onto every block is the
/// block's pmf, exactly.
inline bool reproduces_blocks(const Coupling& c) {
    Rational total = 0;
    for (const auto& [a, p] : c.atoms) {
        if (p < 0 || a.size() != c.system.roster().size()) return false;
        total += p;
    }
    if (total != 1) return false;
    for (std::size_t b = 0; b < c.system.blocks().size(); ++b)
        if (project(c, b) != c.system.blocks()[b].pmf) return false;
    return true;
}

/// Pr[all members of the connection are equal] under the coupling.
inline Rational prob_equal(const Coupling& c, const Connection& conn) {
    std::vector<std::size_t> pos;
    for (const auto& v : conn.variables) pos.push_back(*c.system.roster_index(v));
    Rational s = 0;
    for (const auto& [a, p] : c.atoms) {
        bool eq = true;
        for (auto i : pos) eq = eq && a[i] == a[pos.front()];
        if (eq) s += p;
    }
    return s;
}

// ---------------------------------------------------------------------------
// Index arithmetic

namespace detail {

inline mpz_class count_product(const std::vector<std::size_t>& radices) {
    mpz_class n = 1;
    for (auto r : radices) n *= static_cast<unsigned long>(r);
    return n;
}

inline void guard(const std::string& what, const mpz_class& count, const CouplingOptions& opt) {
    if (count > opt.var_cap) throw SizeGuardError(what, count, opt.var_cap);
}

/// Mixed-radix decoding, first digit most significant.
inline void decode(std::size_t index, const std::vector<std::size_t>& radices, OutcomeTuple& out) {
    out.resize(radices.size());
    for (std::size_t k = radices.size(); k-- > 0;) {
        out[k] = static_cast<std::uint32_t>(index % radices[k]);
        index /= radices[k];
    }
}

/// Block-local layout: where each block variable sits in some global tuple,
/// plus the block's alphabet sizes for ranking joint outcomes.
struct BlockLayout {
    std::vector<std::size_t> positions;
    std::vector<std::size_t> radices;
    std::size_t outcomes = 1;
    std::size_t first_row = 0;

    std::size_t rank(const OutcomeTuple& global) const {
        std::size_t r = 0;
        for (std::size_t i = 0; i < positions.size(); ++i) r = r * radices[i] + global[positions[i]];
        return r;
    }
};

/// Rows: 0 is normalization; each block then contributes one row per joint
/// outcome except its last, which the normalization row implies.
inline std::vector<BlockLayout> layout_rows(const System& s, LinearProgram& lp,
                                            const std::function<std::size_t(const VariableId&)>& position_of) {
    lp.add_row(Rational(1), "normalization");
    std::vector<BlockLayout> layouts;
    for (const auto& blk : s.blocks()) {
        BlockLayout L;
        for (const auto& v : blk.variables) {
            L.positions.push_back(position_of(v));
            L.radices.push_back(s.alphabet(v.content).size());
            L.outcomes *= L.radices.back();
        }
        L.first_row = lp.num_rows();
        OutcomeTuple t;
        for (std::size_t r = 0; r + 1 < L.outcomes; ++r) {
            decode(r, L.radices, t);
            auto it = blk.pmf.find(t);
            lp.add_row(it == blk.pmf.end() ? Rational(0) : it->second,
                       "block " + blk.context + " outcome " + [&] {
                           std::string k;
                           for (std::size_t i = 0; i < t.size(); ++i)
                               k += (i ? "," : "") + s.alphabet(blk.variables[i].content)[t[i]];
                           return k;
                       }());
        }
        layouts.push_back(std::move(L));
    }
    return layouts;
}

inline SparseColumn assignment_column(const OutcomeTuple& a, const std::vector<BlockLayout>& layouts) {
    SparseColumn col;
    col.reserve(layouts.size() + 1);
    col.emplace_back(0, Rational(1));
    for (const auto& L : layouts) {
        std::size_t r = L.rank(a);
        if (r + 1 < L.outcomes) col.emplace_back(L.first_row + r, Rational(1));
    }
    return col;
}

inline std::vector<std::size_t> roster_radices(const System& s) {
    std::vector<std::size_t> radices;
    for (const auto& v : s.roster()) radices.push_back(s.alphabet(v.content).size());
    return radices;
}

inline std::vector<std::size_t> content_radices(const System& s) {
    std::vector<std::size_t> radices;
    for (const auto& c : s.content_ids()) radices.push_back(s.alphabet(c).size());
    return radices;
}

inline void require_pairwise(const Connection& c) {
    if (c.variables.size() != 2)
        throw ArityError("connection for content '" + c.content + "' has " + std::to_string(c.variables.size()) +
                         " members; connection probabilities are defined for pairs only");
}

}  // namespace detail

/// Number of global assignments (one outcome per variable), i.e. the number
/// of decision variables of the full coupling polytope.
inline mpz_class full_assignment_count(const System& s) { return detail::count_product(detail::roster_radices(s)); }

/// Number of assignments of one outcome per content (the reduced polytope).
inline mpz_class content_assignment_count(const System& s) {
    return detail::count_product(detail::content_radices(s));
}

inline OutcomeTuple decode_assignment(const System& s, std::size_t index) {
    OutcomeTuple t;
    detail::decode(index, detail::roster_radices(s), t);
    return t;
}

/// The coupling polytope: one variable per global assignment, one equality
/// per (block, joint outcome) plus a single normalization row. Its feasible
/// points are exactly the couplings of the system.
inline LinearProgram build_polytope(const System& s, const CouplingOptions& opt = {}) {
    mpz_class count = full_assignment_count(s);
    detail::guard("coupling polytope variables", count, opt);
    LinearProgram lp;
    auto layouts = detail::layout_rows(s, lp, [&](const VariableId& v) { return *s.roster_index(v); });
    auto radices = detail::roster_radices(s);
    std::size_t n = count.get_ui();
    lp.columns.reserve(n);
    OutcomeTuple a;
    for (std::size_t j = 0; j < n; ++j) {
        detail::decode(j, radices, a);
        lp.columns.push_back(detail::assignment_column(a, layouts));
    }
    return lp;
}

/// The identity-coupling polytope: one variable per assignment of a single
/// outcome to each content, shared by all of that content's variables.
inline LinearProgram build_identity_polytope(const System& s, const CouplingOptions& opt = {}) {
    mpz_class count = content_assignment_count(s);
    detail::guard("identity coupling variables", count, opt);
    LinearProgram lp;
    auto layouts = detail::layout_rows(s, lp, [&](const VariableId& v) { return s.content_index(v.content); });
    auto radices = detail::content_radices(s);
    std::size_t n = count.get_ui();
    lp.columns.reserve(n);
    OutcomeTuple a;
    for (std::size_t j = 0; j < n; ++j) {
        detail::decode(j, radices, a);
        lp.columns.push_back(detail::assignment_column(a, layouts));
    }
    return lp;
}

/// Blocks are mutually independent: the global pmf is the product of block pmfs.
inline Coupling product_coupling(const System& s, const CouplingOptions& opt = {}) {
    mpz_class support = 1;
    for (const auto& b : s.blocks()) support *= static_cast<unsigned long>(b.pmf.size());
    detail::guard("product coupling atoms", support, opt);

    std::map<OutcomeTuple, Rational> atoms{{OutcomeTuple{}, Rational(1)}};
    for (const auto& b : s.blocks()) {
        std::map<OutcomeTuple, Rational> next;
        for (const auto& [prefix, p] : atoms)
            for (const auto& [t, q] : b.pmf) {
                OutcomeTuple a = prefix;
                a.insert(a.end(), t.begin(), t.end());
                next.emplace(std::move(a), p * q);
            }
        atoms = std::move(next);
    }
    return Coupling{s, std::move(atoms)};
}

/// Every valid system has a coupling; the product coupling is the witness.
inline FeasibilityResult any_coupling(const System& s, const CouplingOptions& opt = {}) {
    FeasibilityResult r;
    r.status = Feasibility::feasible;
    r.witness = product_coupling(s, opt);
    r.note = "product coupling";
    return r;
}

namespace detail {

inline Coupling coupling_from_primal(const System& s, const std::map<std::size_t, Rational>& primal,
                                     std::size_t structural) {
    auto radices = roster_radices(s);
    Coupling c{s, {}};
    OutcomeTuple a;
    for (const auto& [j, v] : primal) {
        if (j >= structural) continue;
        decode(j, radices, a);
        c.atoms[a] += v;
    }
    return c;
}

inline FeasibilityResult from_lp(const LinearProgram& lp, const LpResult& res) {
    if (res.status == LpStatus::iteration_limit || res.status == LpStatus::unbounded)
        throw Error("LP solve did not finish: " + res.diagnostic);
    FeasibilityResult r;
    r.status = res.status == LpStatus::feasible ? Feasibility::feasible : Feasibility::infeasible;
    r.optimum = res.optimum;
    r.constraint_labels = lp.row_labels;
    if (!r.feasible()) {
        r.certificate = res.dual;
        r.certificate_verified = res.verified;
    }
    if (!res.verified) throw Error("LP answer failed verification: " + res.diagnostic);
    return r;
}

}  // namespace detail

/// Decides whether a coupling exists in which the members of every
/// connection are equal with probability 1, on the per-content polytope.
/// The witness is inflated back to a coupling of the full system.
inline FeasibilityResult identity_coupling_feasible(const System& s, const CouplingOptions& opt = {}) {
    LinearProgram lp = build_identity_polytope(s, opt);
    LpResult res = solve_lp(lp, opt.lp);
    FeasibilityResult r = detail::from_lp(lp, res);
    if (r.feasible()) {
        auto radices = detail::content_radices(s);
        std::vector<std::size_t> content_of;
        for (const auto& v : s.roster()) content_of.push_back(s.content_index(v.content));
        Coupling c{s, {}};
        OutcomeTuple ca;
        for (const auto& [j, v] : res.primal) {
            detail::decode(j, radices, ca);
            OutcomeTuple a;
            for (auto k : content_of) a.push_back(ca[k]);
            c.atoms[a] += v;
        }
        r.witness = std::move(c);
    } else if (!is_consistently_connected(s).consistent) {
        r.note = "not consistently connected";
    }
    return r;
}

/// Largest Pr[X = Y] over couplings of the two marginals alone:
/// 1 - TV(p, q) = sum over outcomes of min(p(v), q(v)).
inline Rational max_connection_equality(const System& s, const Connection& conn) {
    detail::require_pairwise(conn);
    Pmf p = marginal(s, conn.variables[0]);
    Pmf q = marginal(s, conn.variables[1]);
    Rational tv = 0;
    for (std::size_t v = 0; v < p.size(); ++v) tv += abs(p[v] - q[v]);
    return Rational(1) - tv / 2;
}

struct TotalEqualityResult {
    /// max over couplings of the sum of connection probabilities.
    Rational optimum;
    /// Sum of the individually achievable maxima.
    Rational sum_of_maxima;
    bool contextual = false;
    Coupling witness;
    /// Dual solution proving optimality (aligned with constraint_labels).
    std::vector<Rational> dual;
    std::vector<std::string> constraint_labels;
    std::vector<Connection> connections;
    std::vector<Rational> individual_maxima;
    std::vector<Rational> achieved;  // per-connection Pr[equal] in the witness
};

/// Maximizes the sum of Pr[members equal] over all couplings. The system is
/// contextual iff this falls short of the sum of individual maxima.
inline TotalEqualityResult max_total_connection_equality(const System& s, const CouplingOptions& opt = {}) {
    auto conns = connections(s);
    for (const auto& c : conns) detail::require_pairwise(c);

    LinearProgram lp = build_polytope(s, opt);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& c : conns) pairs.emplace_back(*s.roster_index(c.variables[0]), *s.roster_index(c.variables[1]));
    auto radices = detail::roster_radices(s);
    OutcomeTuple a;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        detail::decode(j, radices, a);
        long k = 0;
        for (const auto& [x, y] : pairs) k += a[x] == a[y];
        if (k) lp.objective[j] = Rational(k);
    }
    LpResult res = solve_lp(lp, opt.lp);
    FeasibilityResult fr = detail::from_lp(lp, res);
    if (!fr.feasible()) throw Error("coupling polytope reported infeasible; the system is not valid");

    TotalEqualityResult out{res.optimum.value_or(Rational(0)), Rational(0), false, detail::coupling_from_primal(s, res.primal, lp.num_vars()),
                            res.dual, lp.row_labels, conns, {}, {}};
    for (const auto& c : conns) {
        out.individual_maxima.push_back(max_connection_equality(s, c));
        out.sum_of_maxima += out.individual_maxima.back();
        out.achieved.push_back(prob_equal(out.witness, c));
    }
    out.contextual = out.optimum < out.sum_of_maxima;
    return out;
}

struct Demand {
    Connection connection;
    Rational lower_bound;
};

/// Decides whether some coupling has Pr[members equal] >= bound for every
/// demanded connection. Each demand becomes a row with its own surplus column.
inline FeasibilityResult constrained_coupling_feasible(const System& s, const std::vector<Demand>& demands,
                                                       const CouplingOptions& opt = {}) {
    for (const auto& d : demands) {
        detail::require_pairwise(d.connection);
        if (d.lower_bound < 0 || d.lower_bound > 1)
            throw ArgumentError("demand bound " + to_string(d.lower_bound) + " for content '" + d.connection.content +
                                "' is outside [0, 1]");
        for (const auto& v : d.connection.variables)
            if (!s.roster_index(v)) throw UnknownVariableError("unknown variable '" + to_string(v) + "'");
    }

    LinearProgram lp = build_polytope(s, opt);
    const std::size_t structural = lp.num_vars();
    auto radices = detail::roster_radices(s);
    OutcomeTuple a;
    for (const auto& d : demands) {
        std::size_t x = *s.roster_index(d.connection.variables[0]);
        std::size_t y = *s.roster_index(d.connection.variables[1]);
        std::size_t row = lp.add_row(d.lower_bound, "demand " + to_string(d.connection.variables[0]) + "~" +
                                                        d.connection.variables[1].context + " >= " +
                                                        to_string(d.lower_bound));
        for (std::size_t j = 0; j < structural; ++j) {
            detail::decode(j, radices, a);
            if (a[x] == a[y]) lp.columns[j].emplace_back(row, Rational(1));
        }
        lp.columns.push_back({{row, Rational(-1)}});
    }
    LpResult res = solve_lp(lp, opt.lp);
    FeasibilityResult r = detail::from_lp(lp, res);
    if (r.feasible()) r.witness = detail::coupling_from_primal(s, res.primal, structural);
    return r;
}

}  // namespace cbd

#endif
