#ifndef CBD_ORACLE_HPP
#define CBD_ORACLE_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cbd/coupling.hpp"
#include "cbd/errors.hpp"
#include "cbd/system.hpp"

namespace cbd {

struct OracleOptions {
    mpz_class vertex_cap = 100'000;
    /// Cap on dense tableau cells (rows x vertices).
    mpz_class cell_cap = 50'000'000;
};

namespace oracle {

/// Dense-tableau phase-I solver for { lambda >= 0 : V lambda = b }. Kept
/// separate from solve_lp on purpose: different storage, and a Dantzig
/// (largest reduced cost) pivot rule that falls back to Bland's rule after a
/// run of degenerate pivots.
struct MixtureSolution {
    bool feasible = false;
    std::vector<Rational> lambda;  // per vertex
    std::vector<Rational> farkas;  // per row, when infeasible
};

inline MixtureSolution solve_mixture(const std::vector<std::vector<Rational>>& V, const std::vector<Rational>& b) {
    const std::size_t m = b.size();
    const std::size_t n = m ? V[0].size() : 0;
    const std::size_t cols = n + m;  // structural then artificial
    // Rows with negative right-hand side are negated so the artificial basis
    // starts feasible.
    std::vector<int> sign(m, 1);
    std::vector<std::vector<Rational>> T(m, std::vector<Rational>(cols + 1, Rational(0)));
    for (std::size_t i = 0; i < m; ++i) {
        if (b[i] < 0) sign[i] = -1;
        for (std::size_t j = 0; j < n; ++j) T[i][j] = sign[i] * V[i][j];
        T[i][n + i] = 1;
        T[i][cols] = sign[i] * b[i];
    }
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

    // Reduced-cost row for "minimize sum of artificials": z_j = -sum_i T[i][j]
    // over structural columns. Entering candidates have z_j < 0.
    auto reduced = [&](std::size_t j) {
        Rational z = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] >= n) z -= T[i][j];
        return z;
    };

    std::size_t degenerate_run = 0;
    bool bland = false;
    while (true) {
        std::optional<std::size_t> enter;
        Rational best;
        for (std::size_t j = 0; j < n; ++j) {
            Rational z = reduced(j);
            if (z >= 0) continue;
            if (bland) {
                enter = j;
                break;
            }
            if (!enter || z < best) {
                enter = j;
                best = z;
            }
        }
        if (!enter) break;
        std::optional<std::size_t> leave;
        Rational ratio;
        for (std::size_t i = 0; i < m; ++i) {
            if (T[i][*enter] <= 0) continue;
            Rational r = T[i][cols] / T[i][*enter];
            if (!leave || r < ratio || (r == ratio && basis[i] < basis[*leave])) {
                leave = i;
                ratio = r;
            }
        }
        if (!leave) break;  // cannot happen: the phase-I objective is bounded
        if (ratio == 0) {
            if (++degenerate_run > 50) bland = true;
        } else {
            degenerate_run = 0;
        }
        const std::size_t r = *leave, c = *enter;
        Rational piv = T[r][c];
        for (auto& x : T[r]) x /= piv;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r || T[i][c] == 0) continue;
            Rational f = T[i][c];
            for (std::size_t k = 0; k <= cols; ++k)
                if (T[r][k] != 0) T[i][k] -= f * T[r][k];
        }
        basis[r] = c;
    }

    MixtureSolution sol;
    Rational infeasibility = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (basis[i] >= n) infeasibility += T[i][cols];
    if (infeasibility == 0) {
        sol.feasible = true;
        sol.lambda.assign(n, Rational(0));
        for (std::size_t i = 0; i < m; ++i)
            if (basis[i] < n) sol.lambda[basis[i]] = T[i][cols];
        return sol;
    }
    // The artificial columns of the final tableau hold B^-1. With phase-I
    // costs c_B (1 on artificials), y = -c_B B^-1 satisfies y.V >= 0, y.b < 0.
    sol.farkas.assign(m, Rational(0));
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) continue;
        for (std::size_t k = 0; k < m; ++k) sol.farkas[k] -= T[i][n + k];
    }
    for (std::size_t k = 0; k < m; ++k) sol.farkas[k] *= sign[k];
    return sol;
}

}  // namespace oracle

/// Independent decision of identity-coupling existence: enumerate every
/// deterministic assignment of one outcome per content (the vertices of the
/// identity-coupling polytope) and decide whether some mixture of them
/// reproduces every block. Rows cover every joint outcome of every block.
inline FeasibilityResult brute_force_identity(const System& s, const OracleOptions& opt = {}) {
    mpz_class nv = content_assignment_count(s);
    if (nv > opt.vertex_cap) throw SizeGuardError("deterministic vertices", nv, opt.vertex_cap);

    std::vector<std::size_t> radix;
    for (const auto& c : s.content_ids()) radix.push_back(s.alphabet(c).size());

    struct RowBlock {
        std::vector<std::size_t> content_pos;
        std::vector<std::size_t> radices;
        std::size_t first = 0, count = 1;
    };
    std::vector<RowBlock> rb;
    std::vector<Rational> b{Rational(1)};
    std::vector<std::string> labels{"total"};
    for (const auto& blk : s.blocks()) {
        RowBlock r;
        for (const auto& v : blk.variables) {
            r.content_pos.push_back(s.content_index(v.content));
            r.radices.push_back(s.alphabet(v.content).size());
            r.count *= r.radices.back();
        }
        r.first = b.size();
        for (std::size_t k = 0; k < r.count; ++k) {
            OutcomeTuple t(r.radices.size());
            std::size_t rem = k;
            for (std::size_t i = r.radices.size(); i-- > 0;) {
                t[i] = static_cast<std::uint32_t>(rem % r.radices[i]);
                rem /= r.radices[i];
            }
            auto it = blk.pmf.find(t);
            b.push_back(it == blk.pmf.end() ? Rational(0) : it->second);
            labels.push_back(blk.context + ":" + std::to_string(k));
        }
        rb.push_back(std::move(r));
    }
    mpz_class cells = nv * static_cast<unsigned long>(b.size());
    if (cells > opt.cell_cap) throw SizeGuardError("oracle tableau cells", cells, opt.cell_cap);

    const std::size_t n = nv.get_ui();
    std::vector<std::vector<Rational>> V(b.size(), std::vector<Rational>(n, Rational(0)));
    std::vector<OutcomeTuple> vertices(n);
    for (std::size_t j = 0; j < n; ++j) {
        OutcomeTuple& a = vertices[j];
        a.assign(radix.size(), 0);
        std::size_t rem = j;
        for (std::size_t i = radix.size(); i-- > 0;) {
            a[i] = static_cast<std::uint32_t>(rem % radix[i]);
            rem /= radix[i];
        }
        V[0][j] = 1;
        for (const auto& r : rb) {
            std::size_t k = 0;
            for (std::size_t i = 0; i < r.content_pos.size(); ++i) k = k * r.radices[i] + a[r.content_pos[i]];
            V[r.first + k][j] = 1;
        }
    }

    oracle::MixtureSolution sol = oracle::solve_mixture(V, b);
    FeasibilityResult res;
    res.constraint_labels = labels;
    res.note = std::to_string(n) + " deterministic vertices enumerated";
    if (sol.feasible) {
        res.status = Feasibility::feasible;
        Coupling c{s, {}};
        for (std::size_t j = 0; j < n; ++j) {
            if (sol.lambda[j] == 0) continue;
            OutcomeTuple g;
            for (const auto& v : s.roster()) g.push_back(vertices[j][s.content_index(v.content)]);
            c.atoms[g] += sol.lambda[j];
        }
        res.witness = std::move(c);
        return res;
    }
    res.status = Feasibility::infeasible;
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
        Rational dot = 0;
        for (std::size_t i = 0; i < b.size(); ++i)
            if (V[i][j] != 0) dot += sol.farkas[i];
        ok = dot >= 0;
    }
    Rational yb = 0;
    for (std::size_t i = 0; i < b.size(); ++i) yb += sol.farkas[i] * b[i];
    res.certificate_verified = ok && yb < 0;
    res.certificate = std::move(sol.farkas);
    return res;
}

}  // namespace cbd

#endif
