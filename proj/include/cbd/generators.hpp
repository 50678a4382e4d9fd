#ifndef CBD_GENERATORS_HPP
#define CBD_GENERATORS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbd/errors.hpp"
#include "cbd/rational.hpp"
#include "cbd/system.hpp"

namespace cbd {

/// Which contents exist, with their alphabets, and which contents are
/// recorded together in each context.
struct Design {
    std::string name;
    std::vector<std::pair<std::string, std::vector<std::string>>> contents;
    std::vector<std::pair<std::string, std::vector<std::string>>> contexts;
};

namespace detail {

inline std::vector<std::string> outcome_labels(std::size_t k) {
    if (k == 2) return {"+1", "-1"};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(std::to_string(i));
    return out;
}

}  // namespace detail

/// Alice's contents A1, A2 and Bob's B1, B2; context "aibj" records (Ai, Bj).
inline Design design_2x2(std::size_t outcomes = 2) {
    auto alpha = detail::outcome_labels(outcomes);
    Design d{"2x2", {{"A1", alpha}, {"A2", alpha}, {"B1", alpha}, {"B2", alpha}}, {}};
    for (int i = 1; i <= 2; ++i)
        for (int j = 1; j <= 2; ++j)
            d.contexts.push_back({"a" + std::to_string(i) + "b" + std::to_string(j),
                                  {"A" + std::to_string(i), "B" + std::to_string(j)}});
    return d;
}

/// n contents Q1..Qn; context ci records (Qi, Q(i+1 mod n)).
inline Design design_cyclic(std::size_t n, std::size_t outcomes = 2) {
    if (n < 2) throw ArgumentError("cyclic design needs at least 2 contents");
    auto alpha = detail::outcome_labels(outcomes);
    Design d{"cyclic" + std::to_string(n), {}, {}};
    for (std::size_t i = 1; i <= n; ++i) d.contents.push_back({"Q" + std::to_string(i), alpha});
    for (std::size_t i = 1; i <= n; ++i)
        d.contexts.push_back({"c" + std::to_string(i), {"Q" + std::to_string(i), "Q" + std::to_string(i % n + 1)}});
    return d;
}

/// One content X recorded alone under two conditions "low" and "high".
inline Design design_mars(std::size_t outcomes = 2) {
    return Design{"mars", {{"X", detail::outcome_labels(outcomes)}}, {{"low", {"X"}}, {"high", {"X"}}}};
}

/// Two contents recorded together in a single context.
inline Design design_single(std::size_t outcomes = 2) {
    auto alpha = detail::outcome_labels(outcomes);
    return Design{"single", {{"A", alpha}, {"B", alpha}}, {{"only", {"A", "B"}}}};
}

/// "2x2", "cyclicN", "mars" or "single".
inline Design design_from_shape(std::string_view shape, std::size_t outcomes = 2) {
    if (outcomes < 1) throw ArgumentError("outcome count must be >= 1");
    if (shape == "2x2") return design_2x2(outcomes);
    if (shape == "mars") return design_mars(outcomes);
    if (shape == "single") return design_single(outcomes);
    if (shape.substr(0, 6) == "cyclic") {
        std::string_view n = shape.substr(6);
        if (!n.empty() && n.size() < 3 && detail::all_digits(n)) return design_cyclic(std::stoul(std::string(n)), outcomes);
    }
    throw ArgumentError("unknown shape '" + std::string(shape) + "' (expected 2x2, cyclicN, mars or single)");
}

// ---------------------------------------------------------------------------
// Angles

/// A measurement direction. Angles written as rational multiples of pi keep
/// that exact multiple so cosines of standard angles can be evaluated exactly.
struct Angle {
    std::optional<Rational> pi_multiple;
    long double radians = 0;
    std::string text;
};

inline std::optional<Angle> parse_angle(std::string_view token) {
    std::string t;
    for (char c : token)
        if (c != ' ' && c != '*') t += c;
    Angle a;
    a.text = std::string(detail::trim(token));
    if (t.empty()) return std::nullopt;
    auto pi = t.find("pi");
    if (pi != std::string::npos) {
        std::string before = t.substr(0, pi), after = t.substr(pi + 2);
        Rational mult = 1;
        if (before == "-") mult = -1;
        else if (!before.empty() && before != "+") {
            auto r = parse_rational(before);
            if (!r) return std::nullopt;
            mult = *r;
        }
        if (!after.empty()) {
            if (after[0] != '/') return std::nullopt;
            auto den = parse_rational(after.substr(1));
            if (!den || *den == 0) return std::nullopt;
            mult /= *den;
        }
        a.pi_multiple = mult;
        a.radians = static_cast<long double>(mult.get_d()) * 3.141592653589793238462643383279502884L;
        return a;
    }
    auto r = parse_rational(t);
    if (!r) return std::nullopt;
    if (*r == 0) a.pi_multiple = Rational(0);
    a.radians = std::strtold(t.c_str(), nullptr);
    return a;
}

struct AngleSpec {
    std::array<Angle, 2> alice;
    std::array<Angle, 2> bob;
};

/// "a1,a2;b1,b2", e.g. "0,1/2 pi;1/4 pi,3/4 pi".
inline AngleSpec parse_angle_spec(std::string_view text) {
    auto semi = text.find(';');
    if (semi == std::string_view::npos) throw ArgumentError("angles must look like 'a1,a2;b1,b2'");
    auto pair = [&](std::string_view part) {
        auto comma = part.find(',');
        if (comma == std::string_view::npos) throw ArgumentError("angles must look like 'a1,a2;b1,b2'");
        std::array<Angle, 2> out;
        for (int k = 0; k < 2; ++k) {
            auto tok = k == 0 ? part.substr(0, comma) : part.substr(comma + 1);
            auto a = parse_angle(tok);
            if (!a) throw ArgumentError("bad angle '" + std::string(tok) + "'");
            out[k] = *a;
        }
        return out;
    };
    return AngleSpec{pair(text.substr(0, semi)), pair(text.substr(semi + 1))};
}

/// cos of a difference of angles. Exact when the difference is a multiple
/// of pi/3 or pi/2. Other multiples of pi/12 use closed-form surds evaluated
/// to ~1e-40 as rationals; anything else goes through libm.
struct Cosine {
    std::optional<Rational> exact;
    /// High-precision rational approximation when not exact.
    Rational approx;
};

namespace detail {

/// sqrt(n) to within 1e-40, as a rational.
inline Rational sqrt_rational(unsigned long n) {
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, 40);
    mpz_class v = n * scale * scale, root;
    mpz_sqrt(root.get_mpz_t(), v.get_mpz_t());
    Rational r(root, scale);
    r.canonicalize();
    return r;
}

}  // namespace detail

inline Cosine cos_difference(const Angle& x, const Angle& y) {
    if (x.pi_multiple && y.pi_multiple) {
        Rational d = *x.pi_multiple - *y.pi_multiple;
        Rational twelfths = d * 12;
        if (twelfths.get_den() == 1) {
            mpz_class k = twelfths.get_num() % 24;
            if (k < 0) k += 24;
            long kk = k.get_si();
            if (kk > 12) kk = 24 - kk;
            int sign = 1;
            if (kk > 6) {
                sign = -1;
                kk = 12 - kk;
            }
            Cosine c;
            switch (kk) {
                case 0: c.exact = Rational(1); break;
                case 1: c.approx = (detail::sqrt_rational(6) + detail::sqrt_rational(2)) / 4; break;
                case 2: c.approx = detail::sqrt_rational(3) / 2; break;
                case 3: c.approx = detail::sqrt_rational(2) / 2; break;
                case 4: c.exact = Rational(1, 2); break;
                case 5: c.approx = (detail::sqrt_rational(6) - detail::sqrt_rational(2)) / 4; break;
                default: c.exact = Rational(0); break;
            }
            if (c.exact) {
                *c.exact *= sign;
                c.approx = *c.exact;
            } else {
                c.approx *= sign;
            }
            return c;
        }
    }
    return Cosine{std::nullopt, exact_from(std::cos(x.radians - y.radians))};
}

/// Nearest rational with bounded denominator, rounding |x| so that x and -x
/// always map to exact negatives of each other.
inline Rational round_symmetric(const Rational& x, long precision) {
    Rational r = nearest_with_denominator(Rational(abs(x)), mpz_class(precision));
    return x < 0 ? Rational(-r) : r;
}

// ---------------------------------------------------------------------------
// Generators

namespace detail {

inline RawSystem raw_from_design(const Design& d) {
    RawSystem raw;
    raw.contents = d.contents;
    for (const auto& [ctx, _] : d.contexts) raw.contexts.push_back(ctx);
    return raw;
}

inline RawBlock raw_block(const std::string& ctx, const std::vector<std::string>& contents) {
    RawBlock b;
    b.context = ctx;
    for (const auto& c : contents) b.variables.push_back({c, std::nullopt});
    return b;
}

}  // namespace detail

/// Singlet statistics on the 2x2 design: uniform marginals and
/// E[A_i B_j] = -v * cos(alpha_i - beta_j), with the cosine rounded to the
/// nearest rational with denominator <= precision (exact cosines are kept).
inline System singlet_system(const AngleSpec& angles, const Rational& visibility, long precision = 1'000'000) {
    if (precision < 1) throw ArgumentError("precision bound must be >= 1");
    if (visibility < 0 || visibility > 1) throw ArgumentError("visibility must lie in [0, 1]");
    Design d = design_2x2();
    RawSystem raw = detail::raw_from_design(d);
    bool rounded = false;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            Cosine c = cos_difference(angles.alice[i], angles.bob[j]);
            Rational cr = c.exact ? *c.exact : round_symmetric(c.approx, precision);
            rounded = rounded || !c.exact;
            Rational e = -visibility * cr;
            const auto& [ctx, contents] = d.contexts[i * 2 + j];
            RawBlock b = detail::raw_block(ctx, contents);
            for (int a : {1, -1})
                for (int bb : {1, -1})
                    b.pmf.push_back({{a > 0 ? "+1" : "-1", bb > 0 ? "+1" : "-1"}, (1 + a * bb * e) / 4});
            raw.blocks.push_back(std::move(b));
        }
    raw.provenance = {
        {"generator", "singlet"},
        {"formula", "E[A_i B_j] = -v*cos(alpha_i - beta_j); Pr[a,b] = (1 + a*b*E)/4"},
        {"angles", angles.alice[0].text + "," + angles.alice[1].text + ";" + angles.bob[0].text + "," +
                       angles.bob[1].text},
        {"visibility", to_string(visibility)},
        {"precision", std::to_string(precision)},
        {"rounding_bound", rounded ? "1/" + std::to_string(precision) : "0/1"},
    };
    return make_system(raw);
}

/// Popescu-Rohrlich box: A = B in a1b1, a1b2, a2b1 and A = -B in a2b2.
inline System pr_box() {
    Design d = design_2x2();
    RawSystem raw = detail::raw_from_design(d);
    for (const auto& [ctx, contents] : d.contexts) {
        RawBlock b = detail::raw_block(ctx, contents);
        if (ctx == "a2b2") b.pmf = {{{"+1", "-1"}, Rational(1, 2)}, {{"-1", "+1"}, Rational(1, 2)}};
        else b.pmf = {{{"+1", "+1"}, Rational(1, 2)}, {{"-1", "-1"}, Rational(1, 2)}};
        raw.blocks.push_back(std::move(b));
    }
    raw.provenance = {{"generator", "prbox"}, {"formula", "E = (1, 1, 1, -1)"}};
    return make_system(raw);
}

/// Every block a point mass on the assigned outcomes.
inline System deterministic_system(const std::map<std::string, std::string>& assignment, const Design& d) {
    RawSystem raw = detail::raw_from_design(d);
    for (const auto& [content, alpha] : d.contents) {
        auto it = assignment.find(content);
        if (it == assignment.end()) throw ArgumentError("assignment is missing content '" + content + "'");
        if (std::find(alpha.begin(), alpha.end(), it->second) == alpha.end())
            throw ArgumentError("'" + it->second + "' is not an outcome of content '" + content + "'");
    }
    std::string summary;
    for (const auto& [ctx, contents] : d.contexts) {
        RawBlock b = detail::raw_block(ctx, contents);
        std::vector<std::string> labels;
        for (const auto& c : contents) labels.push_back(assignment.at(c));
        b.pmf.push_back({labels, Rational(1)});
        raw.blocks.push_back(std::move(b));
    }
    for (const auto& [c, o] : assignment) summary += (summary.empty() ? "" : ",") + c + "=" + o;
    raw.provenance = {{"generator", "deterministic"}, {"design", d.name}, {"assignment", summary}};
    return make_system(raw);
}

struct RandomOptions {
    bool uniform_marginals = false;
    /// Number of random vertex couplings mixed into each block.
    int components = 3;
};

namespace detail {

/// Platform-independent draws (std distributions are implementation-defined).
class Draw {
public:
    explicit Draw(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do x = gen_();
        while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 gen_;
};

/// A random vertex of the multi-marginal transportation polytope: pick one
/// outcome with remaining mass per variable, assign the smallest remaining
/// mass to that joint outcome, repeat until the mass is exhausted.
inline std::map<OutcomeTuple, Rational> greedy_coupling(std::vector<Pmf> remaining, Draw& draw) {
    std::map<OutcomeTuple, Rational> out;
    while (true) {
        OutcomeTuple t;
        Rational m;
        bool first = true;
        for (const auto& pmf : remaining) {
            std::vector<std::uint32_t> live;
            for (std::uint32_t v = 0; v < pmf.size(); ++v)
                if (pmf[v] > 0) live.push_back(v);
            if (live.empty()) return out;
            std::uint32_t pick = live[draw.below(live.size())];
            t.push_back(pick);
            if (first || pmf[pick] < m) m = pmf[pick];
            first = false;
        }
        for (std::size_t i = 0; i < t.size(); ++i) remaining[i][t[i]] -= m;
        out[t] += m;
    }
}

}  // namespace detail

/// Reproducible random system with exactly consistent connections: each
/// content's marginal is drawn first, then every block is a random mixture
/// of vertex couplings of its variables' marginals.
inline System random_consistent_system(std::uint64_t seed, const Design& d, long denominator_bound = 12,
                                       const RandomOptions& opt = {}) {
    if (denominator_bound < 1) throw ArgumentError("denominator bound must be >= 1");
    if (opt.components < 1) throw ArgumentError("component count must be >= 1");
    detail::Draw draw(seed);
    const auto D = static_cast<std::uint64_t>(denominator_bound);

    std::map<std::string, Pmf> marg;
    for (const auto& [content, alpha] : d.contents) {
        const std::size_t k = alpha.size();
        Pmf p(k, Rational(0));
        if (opt.uniform_marginals || k == 1) {
            for (auto& x : p) x = Rational(1, k);
        } else {
            std::vector<std::uint64_t> cuts{0, D};
            for (std::size_t i = 0; i + 1 < k; ++i) cuts.push_back(draw.below(D + 1));
            std::sort(cuts.begin(), cuts.end());
            for (std::size_t i = 0; i < k; ++i)
                p[i] = Rational(static_cast<long>(cuts[i + 1] - cuts[i]), static_cast<unsigned long>(D));
        }
        for (auto& x : p) x.canonicalize();
        marg[content] = std::move(p);
    }

    RawSystem raw = detail::raw_from_design(d);
    for (const auto& [ctx, contents] : d.contexts) {
        std::vector<Pmf> ms;
        for (const auto& c : contents) ms.push_back(marg.at(c));
        std::map<OutcomeTuple, Rational> mix;
        std::vector<std::uint64_t> w;
        std::uint64_t total = 0;
        for (int c = 0; c < opt.components; ++c) {
            w.push_back(draw.below(D + 1));
            total += w.back();
        }
        if (total == 0) {
            w[0] = 1;
            total = 1;
        }
        for (int c = 0; c < opt.components; ++c) {
            auto g = detail::greedy_coupling(ms, draw);
            if (w[c] == 0) continue;
            Rational weight(static_cast<long>(w[c]), static_cast<unsigned long>(total));
            weight.canonicalize();
            for (const auto& [t, p] : g) mix[t] += weight * p;
        }
        RawBlock b = detail::raw_block(ctx, contents);
        for (const auto& [t, p] : mix) {
            if (p == 0) continue;
            std::vector<std::string> labels;
            for (std::size_t i = 0; i < t.size(); ++i)
                labels.push_back(std::find_if(d.contents.begin(), d.contents.end(), [&](const auto& kv) {
                                     return kv.first == contents[i];
                                 })->second[t[i]]);
            b.pmf.push_back({labels, p});
        }
        raw.blocks.push_back(std::move(b));
    }
    raw.provenance = {{"generator", "random"},
                      {"seed", std::to_string(seed)},
                      {"shape", d.name},
                      {"denominator_bound", std::to_string(denominator_bound)},
                      {"uniform_marginals", opt.uniform_marginals ? "true" : "false"}};
    return make_system(raw);
}

}  // namespace cbd

#endif
