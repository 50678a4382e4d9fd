#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"

using namespace cbd;
using cbd::test::block;
using cbd::test::q;
using cbd::test::raw;

namespace {

const std::vector<std::string> kA{"a1", "a2"};
const std::vector<std::string> kB{"b1", "b2"};

RawSystem alice_bob() {
    std::vector<RawBlock> blocks;
    for (const char* i : {"1", "2"})
        for (const char* j : {"1", "2"})
            blocks.push_back(block(std::string("c") + i + j, {std::string("A") + i, std::string("B") + j},
                                   {{{"a1", "b1"}, "1/2"}, {{"a2", "b2"}, "1/2"}}));
    return raw({{"A1", kA}, {"A2", kA}, {"B1", kB}, {"B2", kB}}, std::move(blocks));
}

bool has_issue(const ValidationOutcome& v, const std::string& code, const std::string& location_part = "") {
    return std::any_of(v.issues.begin(), v.issues.end(), [&](const ValidationIssue& i) {
        return i.code == code && i.location.find(location_part) != std::string::npos;
    });
}

}  // namespace

TEST(Validate, AliceBobSystemIsValid) {
    auto v = validate_system(alice_bob());
    ASSERT_TRUE(v.ok());
    EXPECT_TRUE(v.issues.empty());
    EXPECT_EQ(v.system->blocks().size(), 4u);
    EXPECT_EQ(v.system->roster().size(), 8u);
}

TEST(Validate, PmfNotNormalizedNamesBlock) {
    RawSystem r = alice_bob();
    r.blocks[2].pmf[1].second = q("49/100");
    auto v = validate_system(r);
    ASSERT_FALSE(v.ok());
    ASSERT_TRUE(has_issue(v, "pmf_not_normalized", "c21"));
    auto it = std::find_if(v.issues.begin(), v.issues.end(), [](auto& i) { return i.code == "pmf_not_normalized"; });
    EXPECT_NE(it->message.find("pmf not normalized"), std::string::npos);
    EXPECT_NE(it->message.find("99/100"), std::string::npos);
}

TEST(Validate, AlphabetMismatchAcrossContexts) {
    RawSystem r = raw({{"A", {"a1", "a2"}}},
                      {block("ctx1", {"A"}, {{{"a1"}, "1"}}), block("ctx2", {"A"}, {{{"a3"}, "1"}})});
    r.blocks[0].variables[0].outcomes = std::vector<std::string>{"a1", "a2"};
    r.blocks[1].variables[0].outcomes = std::vector<std::string>{"a1", "a2", "a3"};
    auto v = validate_system(r);
    ASSERT_FALSE(v.ok());
    EXPECT_TRUE(has_issue(v, "alphabet_mismatch", "ctx2"));
}

TEST(Validate, DuplicateVariableAndUnknownContext) {
    RawSystem r = alice_bob();
    r.blocks[0].variables[1].content = "A1";
    r.blocks[3].context = "nowhere";
    auto v = validate_system(r);
    ASSERT_FALSE(v.ok());
    EXPECT_TRUE(has_issue(v, "duplicate_variable", "c11"));
    EXPECT_TRUE(has_issue(v, "unknown_context", "nowhere"));
    EXPECT_TRUE(has_issue(v, "missing_block", "c22"));
}

TEST(Validate, ReportsEveryViolation) {
    RawSystem r = alice_bob();
    r.blocks[0].pmf[0].second = q("-1/2");
    r.blocks[1].pmf[0].first = {"a1", "zz"};
    r.blocks[2].pmf[0].first = {"a1"};
    r.contents.push_back({"Unused", {"u"}});
    auto v = validate_system(r);
    ASSERT_FALSE(v.ok());
    EXPECT_TRUE(has_issue(v, "negative_probability", "c11"));
    EXPECT_TRUE(has_issue(v, "outcome_not_in_alphabet", "c12"));
    EXPECT_TRUE(has_issue(v, "arity_mismatch", "c21"));
    EXPECT_TRUE(has_issue(v, "unused_content", "Unused"));
}

TEST(Validate, RejectsStructuralProblems) {
    RawSystem r = raw({{"A", {"x", "x"}}, {"", {"y"}}}, {block("k", {"A"}, {{{"x"}, "1"}})});
    auto v = validate_system(r);
    EXPECT_TRUE(has_issue(v, "duplicate_outcome"));
    EXPECT_TRUE(has_issue(v, "empty_id"));

    RawSystem dup = raw({{"A", {"x"}}}, {block("k", {"A"}, {{{"x"}, "1/2"}, {{"x"}, "1/2"}})});
    EXPECT_TRUE(has_issue(validate_system(dup), "duplicate_outcome_key", "k"));

    RawSystem unknown = raw({{"A", {"x"}}}, {block("k", {"Q"}, {{{"x"}, "1"}})});
    EXPECT_TRUE(has_issue(validate_system(unknown), "unknown_content", "Q"));
    EXPECT_THROW(make_system(unknown), ArgumentError);
}

TEST(Marginal, SumsBlockAtoms) {
    System s = make_system(alice_bob());
    EXPECT_EQ(marginal(s, {"A1", "c11"}), (Pmf{q("1/2"), q("1/2")}));
}

TEST(Marginal, SingleVariableBlockIsItsPmf) {
    System s = make_system(raw({{"X", {"u", "v", "w"}}}, {block("only", {"X"}, {{{"u"}, "1/6"}, {{"w"}, "5/6"}})}));
    EXPECT_EQ(marginal(s, {"X", "only"}), (Pmf{q("1/6"), q("0"), q("5/6")}));
}

TEST(Marginal, PrBoxIsUniform) {
    System s = pr_box();
    for (const auto& v : s.roster()) EXPECT_EQ(marginal(s, v), (Pmf{q("1/2"), q("1/2")}));
}

TEST(Marginal, UnknownVariableThrows) {
    System s = make_system(alice_bob());
    EXPECT_THROW(marginal(s, {"A1", "c21"}), UnknownVariableError);
}

TEST(Connections, AliceBobHasFourPairs) {
    auto conns = connections(make_system(alice_bob()));
    ASSERT_EQ(conns.size(), 4u);
    EXPECT_EQ(conns[0], (Connection{"A1", {{"A1", "c11"}, {"A1", "c12"}}}));
    EXPECT_EQ(conns[1], (Connection{"A2", {{"A2", "c21"}, {"A2", "c22"}}}));
    EXPECT_EQ(conns[2], (Connection{"B1", {{"B1", "c11"}, {"B1", "c21"}}}));
    EXPECT_EQ(conns[3], (Connection{"B2", {{"B2", "c12"}, {"B2", "c22"}}}));
}

TEST(Connections, SingletonsExcluded) {
    System s = make_system(raw({{"A", {"x"}}, {"B", {"y"}}},
                               {block("k1", {"A"}, {{{"x"}, "1"}}), block("k2", {"B"}, {{{"y"}, "1"}})}));
    EXPECT_TRUE(connections(s).empty());
}

TEST(Connections, MarsHasOneConnection) {
    System s = make_system(raw({{"X", {"0", "1"}}}, {block("low", {"X"}, {{{"0"}, "1/2"}, {{"1"}, "1/2"}}),
                                                     block("high", {"X"}, {{{"0"}, "1/3"}, {{"1"}, "2/3"}})}));
    auto conns = connections(s);
    ASSERT_EQ(conns.size(), 1u);
    EXPECT_EQ(conns[0].variables, (std::vector<VariableId>{{"X", "high"}, {"X", "low"}}));
}

TEST(Connections, PartitionRosterByContent) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        System s = random_consistent_system(seed, design_cyclic(3 + seed % 3));
        std::vector<VariableId> seen;
        for (const auto& c : connections(s)) seen.insert(seen.end(), c.variables.begin(), c.variables.end());
        std::map<std::string, int> per_content;
        for (const auto& v : s.roster()) ++per_content[v.content];
        for (const auto& v : s.roster())
            if (per_content[v.content] == 1) seen.push_back(v);
        std::sort(seen.begin(), seen.end());
        auto roster = s.roster();
        std::sort(roster.begin(), roster.end());
        EXPECT_EQ(seen, roster);
    }
}

TEST(Consistency, SingletIsConsistent) {
    EXPECT_TRUE(is_consistently_connected(singlet_system(parse_angle_spec("0,1/3 pi;1/7 pi,2"), q("3/5"))).consistent);
}

TEST(Consistency, ReportsFailingConnection) {
    RawSystem r = alice_bob();
    r.blocks[1].pmf = {{{"a1", "b1"}, q("1/3")}, {{"a2", "b2"}, q("2/3")}};
    auto rep = is_consistently_connected(make_system(r));
    EXPECT_FALSE(rep.consistent);
    ASSERT_EQ(rep.failures.size(), 2u);  // A1 and B2 both shift
    EXPECT_EQ(rep.failures[0].connection.content, "A1");
    EXPECT_EQ(rep.failures[0].marginals[0], (Pmf{q("1/2"), q("1/2")}));
    EXPECT_EQ(rep.failures[0].marginals[1], (Pmf{q("1/3"), q("2/3")}));
}

TEST(Consistency, SingleContextIsVacuouslyConsistent) {
    System s = make_system(raw({{"A", {"x", "y"}}}, {block("k", {"A"}, {{{"x"}, "1/4"}, {{"y"}, "3/4"}})}));
    EXPECT_TRUE(is_consistently_connected(s).consistent);
}
