#ifndef CBD_LP_HPP
#define CBD_LP_HPP

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cbd/errors.hpp"
#include "cbd/rational.hpp"

namespace cbd {

using SparseColumn = std::vector<std::pair<std::size_t, Rational>>;

/// Equality-form LP over nonnegative variables:
///
///     maximize  c.x   subject to  A x = b,  x >= 0.
///
/// The constraint matrix is stored column-wise because coupling polytopes
/// have few rows and very many columns, each touching one row per block.
struct LinearProgram {
    std::vector<SparseColumn> columns;
    std::vector<Rational> rhs;
    std::vector<std::string> row_labels;
    /// Sparse objective; empty means a pure feasibility problem.
    std::map<std::size_t, Rational> objective;

    std::size_t num_rows() const { return rhs.size(); }
    std::size_t num_vars() const { return columns.size(); }

    std::size_t add_row(Rational b, std::string label) {
        rhs.push_back(std::move(b));
        row_labels.push_back(std::move(label));
        return rhs.size() - 1;
    }
};

enum class LpStatus { feasible, infeasible, unbounded, iteration_limit };

inline const char* to_string(LpStatus s) {
    switch (s) {
        case LpStatus::feasible: return "feasible";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    /// Nonzero primal values by column index (feasible only).
    std::map<std::size_t, Rational> primal;
    /// Optimal value when the LP has an objective and is feasible.
    std::optional<Rational> optimum;
    /// Row multipliers. For an infeasible LP this is a Farkas certificate
    /// (y.A >= 0 componentwise, y.b < 0). For an optimal LP it is a dual
    /// solution with y.A >= c and y.b == optimum.
    std::vector<Rational> dual;
    /// Set once the primal/dual data above passed verify_*() below.
    bool verified = false;
    std::size_t iterations = 0;
    std::string diagnostic;
};

enum class PivotRule {
    /// Lowest-index improving column; cannot cycle.
    bland,
    /// Most positive reduced cost (lowest index on ties), switching to Bland's
    /// rule while a run of degenerate pivots lasts longer than `degenerate_run`.
    dantzig,
};

struct LpOptions {
    std::size_t iteration_cap = 1'000'000;
    PivotRule rule = PivotRule::bland;
    std::size_t degenerate_run = 50;
};

/// y.A_j for one column.
inline Rational row_combination(const std::vector<Rational>& y, const SparseColumn& col) {
    Rational s = 0;
    for (const auto& [r, a] : col) s += y[r] * a;
    return s;
}

/// Independent check of a Farkas certificate: y.A_j >= 0 for every column
/// and y.b < 0 make A x = b, x >= 0 impossible.
inline bool verify_farkas(const LinearProgram& lp, const std::vector<Rational>& y) {
    if (y.size() != lp.num_rows()) return false;
    for (const auto& col : lp.columns)
        if (row_combination(y, col) < 0) return false;
    Rational yb = 0;
    for (std::size_t i = 0; i < y.size(); ++i) yb += y[i] * lp.rhs[i];
    return yb < 0;
}

/// Checks A x = b and x >= 0 by direct evaluation.
inline bool verify_primal(const LinearProgram& lp, const std::map<std::size_t, Rational>& x) {
    std::vector<Rational> lhs(lp.num_rows(), Rational(0));
    for (const auto& [j, v] : x) {
        if (j >= lp.num_vars() || v < 0) return false;
        for (const auto& [r, a] : lp.columns[j]) lhs[r] += a * v;
    }
    return lhs == lp.rhs;
}

/// Strong duality check: x primal feasible, y dual feasible (y.A_j >= c_j),
/// and c.x == y.b. Together these prove x optimal.
inline bool verify_optimality(const LinearProgram& lp, const std::map<std::size_t, Rational>& x,
                              const std::vector<Rational>& y) {
    if (!verify_primal(lp, x) || y.size() != lp.num_rows()) return false;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        auto c = lp.objective.find(j);
        Rational cj = c == lp.objective.end() ? Rational(0) : c->second;
        if (row_combination(y, lp.columns[j]) < cj) return false;
    }
    Rational cx = 0, yb = 0;
    for (const auto& [j, v] : x)
        if (auto c = lp.objective.find(j); c != lp.objective.end()) cx += c->second * v;
    for (std::size_t i = 0; i < y.size(); ++i) yb += y[i] * lp.rhs[i];
    return cx == yb;
}

namespace detail {

/// Revised simplex with an explicit dense basis inverse in exact rationals.
/// Columns [0, n) are structural; column n + i is the artificial for row i.
class RevisedSimplex {
public:
    RevisedSimplex(const LinearProgram& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
        m_ = lp.num_rows();
        n_ = lp.num_vars();
        sign_.assign(m_, 1);
        b_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            if (lp.rhs[i] < 0) sign_[i] = -1;
            b_[i] = lp.rhs[i] * sign_[i];
        }
        binv_.assign(m_, std::vector<Rational>(m_, Rational(0)));
        basis_.resize(m_);
        is_basic_.assign(n_ + m_, false);
        for (std::size_t i = 0; i < m_; ++i) {
            binv_[i][i] = 1;
            basis_[i] = n_ + i;
            is_basic_[n_ + i] = true;
        }
        xb_ = b_;
        integral_.resize(n_);
        for (std::size_t j = 0; j < n_; ++j)
            integral_[j] = std::all_of(lp.columns[j].begin(), lp.columns[j].end(),
                                       [](const auto& e) { return e.second.get_den() == 1; });
    }

    LpResult run() {
        LpResult res;
        // Phase I: maximize -sum(artificials).
        cost_.assign(n_ + m_, Rational(0));
        for (std::size_t i = 0; i < m_; ++i) cost_[n_ + i] = -1;
        auto st = iterate(res.iterations);
        if (st == LpStatus::iteration_limit) {
            res.status = st;
            res.diagnostic = "iteration cap of " + std::to_string(opt_.iteration_cap) + " reached in phase I";
            return res;
        }
        Rational phase1 = 0;
        for (std::size_t i = 0; i < m_; ++i) phase1 += cost_[basis_[i]] * xb_[i];
        if (phase1 < 0) {
            res.status = LpStatus::infeasible;
            res.dual = original_duals();
            res.verified = verify_farkas(lp_, res.dual);
            if (!res.verified) res.diagnostic = "Farkas certificate failed verification";
            return res;
        }

        drive_out_artificials();

        // Phase II.
        cost_.assign(n_ + m_, Rational(0));
        for (const auto& [j, c] : lp_.objective) cost_[j] = c;
        st = iterate(res.iterations);
        if (st != LpStatus::feasible) {
            res.status = st;
            res.diagnostic = st == LpStatus::unbounded ? "objective unbounded"
                                                       : "iteration cap of " + std::to_string(opt_.iteration_cap) +
                                                             " reached in phase II";
            return res;
        }
        res.status = LpStatus::feasible;
        for (std::size_t i = 0; i < m_; ++i)
            if (basis_[i] < n_ && xb_[i] != 0) res.primal[basis_[i]] = xb_[i];
        res.dual = original_duals();
        if (!lp_.objective.empty()) {
            Rational opt = 0;
            for (const auto& [j, v] : res.primal)
                if (auto c = lp_.objective.find(j); c != lp_.objective.end()) opt += c->second * v;
            res.optimum = opt;
            res.verified = verify_optimality(lp_, res.primal, res.dual);
        } else {
            res.verified = verify_primal(lp_, res.primal);
        }
        if (!res.verified) res.diagnostic = "solution failed independent verification";
        return res;
    }

private:
    /// Duals in the sign-flipped coordinates: y = c_B B^-1.
    std::vector<Rational> duals() const {
        std::vector<Rational> y(m_, Rational(0));
        for (std::size_t i = 0; i < m_; ++i) {
            const Rational& cb = cost_[basis_[i]];
            if (cb == 0) continue;
            for (std::size_t k = 0; k < m_; ++k)
                if (binv_[i][k] != 0) y[k] += cb * binv_[i][k];
        }
        return y;
    }

    /// Duals mapped back to the caller's row signs.
    std::vector<Rational> original_duals() const {
        std::vector<Rational> y = duals();
        for (std::size_t i = 0; i < m_; ++i) y[i] *= sign_[i];
        return y;
    }

    std::vector<Rational> ftran(const SparseColumn& col) const {
        std::vector<Rational> u(m_, Rational(0));
        for (const auto& [r, a] : col) {
            Rational v = a * sign_[r];
            for (std::size_t i = 0; i < m_; ++i)
                if (binv_[i][r] != 0) u[i] += binv_[i][r] * v;
        }
        return u;
    }

    void pivot(std::size_t row, std::size_t entering, const std::vector<Rational>& u) {
        Rational piv = u[row];
        for (std::size_t k = 0; k < m_; ++k) binv_[row][k] /= piv;
        xb_[row] /= piv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == row || u[i] == 0) continue;
            const Rational f = u[i];
            for (std::size_t k = 0; k < m_; ++k)
                if (binv_[row][k] != 0) binv_[i][k] -= f * binv_[row][k];
            xb_[i] -= f * xb_[row];
        }
        is_basic_[basis_[row]] = false;
        basis_[row] = entering;
        is_basic_[entering] = true;
    }

    /// Lowest-index column with positive reduced cost c_j - y.A_j, or none.
    /// Integral columns and costs are priced in integers against duals
    /// scaled to a common denominator; anything else falls back to Rational.
    std::optional<std::size_t> price(bool bland) const {
        std::vector<Rational> y = duals();
        mpz_class den = 1;
        for (const auto& v : y) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), v.get_den_mpz_t());
        std::vector<mpz_class> Y(m_);
        for (std::size_t r = 0; r < m_; ++r) Y[r] = y[r].get_num() * (den / y[r].get_den()) * sign_[r];
        mpz_class rhs, d;
        Rational scaled, best;
        std::optional<std::size_t> entering;
        // Artificial columns never re-enter.
        for (std::size_t j = 0; j < n_; ++j) {
            if (is_basic_[j]) continue;
            // d = (c_j - y.A_j) * den
            if (integral_[j] && cost_[j].get_den() == 1) {
                rhs = 0;
                for (const auto& [r, a] : lp_.columns[j]) {
                    if (a == 1) rhs += Y[r];
                    else rhs += Y[r] * a.get_num();
                }
                d = cost_[j].get_num() * den - rhs;
                if (sgn(d) <= 0) continue;
                if (bland) return j;
                if (entering && mpq_cmp_z(best.get_mpq_t(), d.get_mpz_t()) >= 0) continue;
                scaled = d;
            } else {
                Rational yaj = 0;
                for (const auto& [r, a] : lp_.columns[j]) yaj += y[r] * a * sign_[r];
                scaled = (cost_[j] - yaj) * den;
                if (sgn(scaled) <= 0) continue;
                if (bland) return j;
            }
            if (!entering || scaled > best) {
                entering = j;
                best = scaled;
            }
        }
        return entering;
    }

    /// Bland's rule: lowest-index improving column enters; among tied
    /// ratios, the row whose basic variable has the lowest index leaves.
    LpStatus iterate(std::size_t& iterations) {
        while (true) {
            if (iterations >= opt_.iteration_cap) return LpStatus::iteration_limit;
            bool bland = opt_.rule == PivotRule::bland || degenerate_ > opt_.degenerate_run;
            std::optional<std::size_t> entering = price(bland);
            if (!entering) return LpStatus::feasible;

            std::vector<Rational> u = ftran(lp_.columns[*entering]);
            std::optional<std::size_t> leave;
            Rational best;
            for (std::size_t i = 0; i < m_; ++i) {
                if (u[i] <= 0) continue;
                Rational ratio = xb_[i] / u[i];
                if (!leave || ratio < best || (ratio == best && basis_[i] < basis_[*leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (!leave) return LpStatus::unbounded;
            degenerate_ = best == 0 ? degenerate_ + 1 : 0;
            pivot(*leave, *entering, u);
            ++iterations;
        }
    }

    /// After phase I, artificials basic at level zero are swapped for any
    /// structural column with a nonzero entry in their row. Rows where no
    /// such column exists are redundant; their artificial stays basic at 0.
    void drive_out_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (is_basic_[j]) continue;
                Rational entry = 0;
                for (const auto& [r, a] : lp_.columns[j]) entry += binv_[i][r] * a * sign_[r];
                if (entry != 0) {
                    pivot(i, j, ftran(lp_.columns[j]));
                    break;
                }
            }
        }
    }

    const LinearProgram& lp_;
    LpOptions opt_;
    std::size_t m_ = 0, n_ = 0;
    std::vector<int> sign_;
    std::vector<Rational> b_;
    std::vector<std::vector<Rational>> binv_;
    std::vector<std::size_t> basis_;
    std::vector<bool> is_basic_;
    std::vector<bool> integral_;
    std::size_t degenerate_ = 0;
    std::vector<Rational> xb_;
    std::vector<Rational> cost_;
};

}  // namespace detail

/// Solves an LP exactly. Every returned answer is re-verified by
/// verify_farkas / verify_optimality / verify_primal; `verified` records it.
inline LpResult solve_lp(const LinearProgram& lp, const LpOptions& opt = {}) {
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
        for (const auto& [r, a] : lp.columns[j])
            if (r >= lp.num_rows()) throw ArgumentError("column " + std::to_string(j) + " references a missing row");
    if (lp.num_rows() == 0) {
        LpResult res;
        res.status = LpStatus::feasible;
        res.verified = true;
        if (!lp.objective.empty()) {
            for (const auto& [j, c] : lp.objective)
                if (c > 0) {
                    res.status = LpStatus::unbounded;
                    res.verified = false;
                    return res;
                }
            res.optimum = Rational(0);
        }
        return res;
    }
    return detail::RevisedSimplex(lp, opt).run();
}

}  // namespace cbd

#endif
