#ifndef CBD_TESTS_SUPPORT_HPP
#define CBD_TESTS_SUPPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "cbd/cbd.hpp"

namespace cbd::test {

inline Rational q(const char* s) { return parse_rational_or_throw(s); }

/// Block literal: context, contents, then (outcome labels, probability) atoms.
inline RawBlock block(std::string ctx, std::vector<std::string> contents,
                      std::vector<std::pair<std::vector<std::string>, std::string>> atoms) {
    RawBlock b;
    b.context = std::move(ctx);
    for (auto& c : contents) b.variables.push_back({std::move(c), std::nullopt});
    for (auto& [o, p] : atoms) b.pmf.emplace_back(std::move(o), q(p.c_str()));
    return b;
}

inline RawSystem raw(std::vector<std::pair<std::string, std::vector<std::string>>> contents,
                     std::vector<RawBlock> blocks) {
    RawSystem r;
    r.contents = std::move(contents);
    for (const auto& b : blocks) r.contexts.push_back(b.context);
    r.blocks = std::move(blocks);
    return r;
}

/// 2x2 binary (+1/-1) system from four block tables given as
/// {P(++), P(+-), P(-+), P(--)} for a1b1, a1b2, a2b1, a2b2.
inline System two_by_two(const std::array<std::array<std::string, 4>, 4>& t) {
    const std::vector<std::string> pm{"+1", "-1"};
    const char* ctx[4] = {"a1b1", "a1b2", "a2b1", "a2b2"};
    const char* a[4] = {"A1", "A1", "A2", "A2"};
    const char* b[4] = {"B1", "B2", "B1", "B2"};
    std::vector<RawBlock> blocks;
    for (int k = 0; k < 4; ++k)
        blocks.push_back(block(ctx[k], {a[k], b[k]},
                               {{{"+1", "+1"}, t[k][0]}, {{"+1", "-1"}, t[k][1]}, {{"-1", "+1"}, t[k][2]},
                                {{"-1", "-1"}, t[k][3]}}));
    return make_system(raw({{"A1", pm}, {"A2", pm}, {"B1", pm}, {"B2", pm}}, std::move(blocks)));
}

/// Two contexts sharing one content X with the given marginals.
inline System pair_system(const Pmf& p, const Pmf& r) {
    std::vector<std::string> alpha;
    for (std::size_t i = 0; i < p.size(); ++i) alpha.push_back("x" + std::to_string(i));
    auto mk = [&](const char* ctx, const Pmf& m) {
        RawBlock b;
        b.context = ctx;
        b.variables.push_back({"X", std::nullopt});
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m[i] != 0) b.pmf.push_back({{alpha[i]}, m[i]});
        return b;
    };
    return make_system(raw({{"X", alpha}}, {mk("c1", p), mk("c2", r)}));
}

}  // namespace cbd::test

#endif
