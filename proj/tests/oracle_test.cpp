#include <gtest/gtest.h>

#include "support.hpp"

using namespace cbd;

TEST(BruteForce, TwoByTwoEnumeratesSixteenVertices) {
    auto r = brute_force_identity(pr_box());
    EXPECT_EQ(r.note, "16 deterministic vertices enumerated");
}

TEST(BruteForce, DeterministicFeasibleViaOwnVertex) {
    System s = deterministic_system({{"A1", "-1"}, {"A2", "-1"}, {"B1", "+1"}, {"B2", "-1"}}, design_2x2());
    auto r = brute_force_identity(s);
    ASSERT_TRUE(r.feasible());
    ASSERT_TRUE(r.witness.has_value());
    EXPECT_EQ(r.witness->atoms.size(), 1u);
    EXPECT_TRUE(reproduces_blocks(*r.witness));
}

TEST(BruteForce, PrBoxInfeasible) {
    auto r = brute_force_identity(pr_box());
    EXPECT_FALSE(r.feasible());
    EXPECT_TRUE(r.certificate_verified);
}

TEST(BruteForce, SolveMixtureDirectly) {
    // Columns are vertices: (1,0) and (0,1); b = (1/3, 2/3) is a mixture,
    // b = (1, 1) is not (row 0 of V is not a normalization here).
    std::vector<std::vector<Rational>> V{{1, 0}, {0, 1}};
    auto ok = oracle::solve_mixture(V, {Rational(1, 3), Rational(2, 3)});
    ASSERT_TRUE(ok.feasible);
    EXPECT_EQ(ok.lambda[0], Rational(1, 3));
    EXPECT_EQ(ok.lambda[1], Rational(2, 3));
    auto bad = oracle::solve_mixture(V, {Rational(-1), Rational(1)});
    EXPECT_FALSE(bad.feasible);
}

TEST(BruteForce, GuardRefusesLargeSystems) {
    OracleOptions opt;
    opt.vertex_cap = 8;
    EXPECT_THROW(brute_force_identity(pr_box(), opt), SizeGuardError);
}

TEST(BruteForce, AgreesWithIdentityLp) {
    int infeasible = 0;
    for (std::uint64_t seed = 1; seed <= 120; ++seed) {
        const char* shapes[] = {"2x2", "cyclic3", "cyclic5", "mars", "single"};
        System s = random_consistent_system(seed, design_from_shape(shapes[seed % 5], 2 + seed % 2));
        auto lp = identity_coupling_feasible(s);
        auto bf = brute_force_identity(s);
        ASSERT_EQ(lp.feasible(), bf.feasible()) << serialize(s);
        if (!lp.feasible()) {
            ++infeasible;
            EXPECT_TRUE(bf.certificate_verified);
        }
    }
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        System s = singlet_system(parse_angle_spec("0,1/2 pi;1/4 pi,3/4 pi"), make_rational(static_cast<long>(seed), 40));
        EXPECT_EQ(identity_coupling_feasible(s).feasible(), brute_force_identity(s).feasible()) << seed;
    }
    EXPECT_GE(infeasible, 0);
}
