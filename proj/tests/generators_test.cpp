#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace cbd;
using cbd::test::q;

namespace {

const char* kBenchmark = "0,1/2 pi;1/4 pi,3/4 pi";

}  // namespace

TEST(Angles, ParseForms) {
    EXPECT_EQ(*parse_angle("1/4 pi")->pi_multiple, q("1/4"));
    EXPECT_EQ(*parse_angle("pi/4")->pi_multiple, q("1/4"));
    EXPECT_EQ(*parse_angle("-pi")->pi_multiple, -1);
    EXPECT_EQ(*parse_angle("3pi/2")->pi_multiple, q("3/2"));
    EXPECT_EQ(*parse_angle("0")->pi_multiple, 0);
    auto d = parse_angle("0.5");
    ASSERT_TRUE(d.has_value());
    EXPECT_FALSE(d->pi_multiple.has_value());
    EXPECT_DOUBLE_EQ(static_cast<double>(d->radians), 0.5);
    EXPECT_FALSE(parse_angle("north").has_value());
    EXPECT_FALSE(parse_angle("pi/0").has_value());
    EXPECT_THROW(parse_angle_spec("0,1;2"), ArgumentError);
}

TEST(Angles, SpecialCosinesAreExactOrTight) {
    for (int k = -30; k <= 30; ++k) {
        Angle a = *parse_angle(std::to_string(k) + "/12 pi");
        Angle zero = *parse_angle("0");
        Cosine c = cos_difference(a, zero);
        double expect = std::cos(k * M_PI / 12);
        EXPECT_NEAR(c.approx.get_d(), expect, 4e-15) << k;
        if (k % 4 == 0 || k % 6 == 0) ASSERT_TRUE(c.exact.has_value()) << k;
    }
}

TEST(Singlet, BenchmarkIsValidAndConsistent) {
    System s = singlet_system(parse_angle_spec(kBenchmark), Rational(1));
    EXPECT_TRUE(is_consistently_connected(s).consistent);
    EXPECT_EQ(s.provenance().at("rounding_bound"), "1/1000000");
    EXPECT_EQ(s.provenance().at("generator"), "singlet");
    for (const auto& v : s.roster()) EXPECT_EQ(marginal(s, v), (Pmf{q("1/2"), q("1/2")}));
    auto r = chsh(correlation_table(s));
    EXPECT_LT(std::abs(r.max_value.get_d() - 2 * std::sqrt(2.0)), 1e-6);
}

TEST(Singlet, ZeroVisibilityIsUniform) {
    System s = singlet_system(parse_angle_spec(kBenchmark), Rational(0));
    for (const auto& b : s.blocks())
        for (const auto& [t, p] : b.pmf) EXPECT_EQ(p, q("1/4"));
    EXPECT_EQ(chsh(correlation_table(s)).max_value, 0);
}

TEST(Singlet, AlignedSettingsGiveMinusV) {
    System s = singlet_system(parse_angle_spec("0.3,1;0.3,2"), q("3/7"));
    EXPECT_EQ(correlation_table(s).expectation[0][0], q("-3/7"));
    System exact = singlet_system(parse_angle_spec("1/3 pi,0;1/3 pi,2/3 pi"), q("1"));
    EXPECT_EQ(correlation_table(exact).expectation[0][0], -1);
    EXPECT_EQ(correlation_table(exact).expectation[1][1], q("1/2"));
    EXPECT_EQ(correlation_table(exact).expectation[0][1], q("-1/2"));
    EXPECT_EQ(exact.provenance().at("rounding_bound"), "0/1");
}

TEST(Singlet, ChshScalesWithVisibility) {
    for (const char* spec : {kBenchmark, "0,1.1;0.4,2.5", "1/6 pi,5/12 pi;-1/12 pi,2"}) {
        Rational full = chsh(correlation_table(singlet_system(parse_angle_spec(spec), Rational(1)))).max_value;
        for (const char* v : {"0", "1/3", "7/10", "99/100", "1/1000"}) {
            auto r = chsh(correlation_table(singlet_system(parse_angle_spec(spec), q(v))));
            EXPECT_EQ(r.max_value, q(v) * full) << spec << " v=" << v;
        }
    }
}

TEST(Singlet, RejectsBadArguments) {
    EXPECT_THROW(singlet_system(parse_angle_spec(kBenchmark), q("3/2")), ArgumentError);
    EXPECT_THROW(singlet_system(parse_angle_spec(kBenchmark), q("-1/2")), ArgumentError);
    EXPECT_THROW(singlet_system(parse_angle_spec(kBenchmark), q("1"), 0), ArgumentError);
}

TEST(Singlet, BelowThresholdIsClassicalOnAngleGrid) {
    const Rational v = q("7071/10000");
    ASSERT_LE(2 * v * v, 1);
    std::vector<std::string> grid;
    for (int k = 0; k < 16; ++k) grid.push_back(std::to_string(k) + "/8 pi");
    std::size_t checked = 0;
    for (const auto& a1 : grid)
        for (const auto& a2 : grid)
            for (const auto& b1 : grid)
                for (const auto& b2 : grid) {
                    System s = singlet_system(parse_angle_spec(a1 + "," + a2 + ";" + b1 + "," + b2), v);
                    ASSERT_TRUE(chsh(correlation_table(s)).classical_ok) << a1 << a2 << b1 << b2;
                    ++checked;
                }
    EXPECT_EQ(checked, 65536u);
}

TEST(PrBox, Properties) {
    System s = pr_box();
    EXPECT_EQ(chsh(correlation_table(s)).max_value, 4);
    EXPECT_TRUE(is_consistently_connected(s).consistent);
    EXPECT_FALSE(identity_coupling_feasible(s).feasible());
}

TEST(Deterministic, AllPlus) {
    System s = deterministic_system({{"A1", "+1"}, {"A2", "+1"}, {"B1", "+1"}, {"B2", "+1"}}, design_2x2());
    EXPECT_EQ(chsh(correlation_table(s)).max_value, 2);
    EXPECT_TRUE(is_consistently_connected(s).consistent);
    EXPECT_EQ(max_total_connection_equality(s).optimum, 4);
    EXPECT_TRUE(identity_coupling_feasible(s).feasible());
}

TEST(Deterministic, EveryAssignmentOnCyclicDesign) {
    Design d = design_cyclic(3, 3);
    for (int code = 0; code < 27; ++code) {
        std::map<std::string, std::string> a{{"Q1", std::to_string(code % 3)},
                                             {"Q2", std::to_string(code / 3 % 3)},
                                             {"Q3", std::to_string(code / 9)}};
        System s = deterministic_system(a, d);
        EXPECT_TRUE(is_consistently_connected(s).consistent);
        EXPECT_TRUE(identity_coupling_feasible(s).feasible());
    }
}

TEST(Deterministic, MissingContentOrOutcome) {
    EXPECT_THROW(deterministic_system({{"A1", "+1"}}, design_2x2()), ArgumentError);
    EXPECT_THROW(deterministic_system({{"A1", "0"}, {"A2", "+1"}, {"B1", "+1"}, {"B2", "+1"}}, design_2x2()),
                 ArgumentError);
}

TEST(Random, SameSeedSameBytes) {
    EXPECT_EQ(serialize(random_consistent_system(1, design_2x2())), serialize(random_consistent_system(1, design_2x2())));
    EXPECT_NE(serialize(random_consistent_system(1, design_2x2())), serialize(random_consistent_system(2, design_2x2())));
}

TEST(Random, ConsistentAndCouplable) {
    const char* shapes[] = {"2x2", "cyclic3", "cyclic6", "mars", "single"};
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        System s = random_consistent_system(seed, design_from_shape(shapes[seed % 5], 1 + seed % 4));
        EXPECT_TRUE(is_consistently_connected(s).consistent);
        auto r = any_coupling(s);
        ASSERT_TRUE(r.feasible());
        EXPECT_TRUE(reproduces_blocks(*r.witness));
        EXPECT_EQ(s.provenance().at("seed"), std::to_string(seed));
    }
}

TEST(Random, UniformMarginalsOption) {
    RandomOptions opt;
    opt.uniform_marginals = true;
    System s = random_consistent_system(9, design_cyclic(5, 3), 12, opt);
    for (const auto& v : s.roster()) EXPECT_EQ(marginal(s, v), (Pmf{q("1/3"), q("1/3"), q("1/3")}));
}

TEST(Random, RejectsBadShapes) {
    EXPECT_THROW(design_from_shape("triangle"), ArgumentError);
    EXPECT_THROW(design_from_shape("cyclic1"), ArgumentError);
    EXPECT_THROW(random_consistent_system(1, design_2x2(), 0), ArgumentError);
}
