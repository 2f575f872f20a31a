#include <cmath>

#include <gtest/gtest.h>

#include "lanemden/shooting.hpp"

using namespace lanemden;

namespace {

double talenti(double r, int n) { return std::pow(1.0 + r * r / double(n * (n - 2)), -0.5 * (n - 2)); }

const ShootingProblem& flat() {
    static const ShootingProblem p(builtin_profile(Family::Euclidean, 3), ExponentPair(5, 5));
    return p;
}

const ShootingProblem& cubic() {
    static const ShootingProblem p(builtin_profile(Family::ExpPower, 3, 3.0), ExponentPair(5, 5));
    return p;
}

}  // namespace

TEST(Shot, FlatCriticalSolutionInThreeDimensions) {
    const ShotOutcome o = integrate_shot(flat(), 1.0, 1.0);
    EXPECT_EQ(o.kind, OutcomeKind::PositiveToHorizon);
    double worst = 0.0;
    for (double r = 0.0; r <= 50.0; r += 0.05) {
        const ShotState s = o.trajectory.at(r);
        worst = std::max(worst, std::fabs(s.u / talenti(r, 3) - 1.0));
        worst = std::max(worst, std::fabs(s.dv + r / 3.0 * std::pow(talenti(r, 3), 3.0)));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Shot, FlatCriticalSolutionInFourDimensions) {
    const ShotOutcome o = integrate_shot(builtin_profile(Family::Euclidean, 4), ExponentPair(3, 3), 1.0, 1.0);
    double worst = 0.0;
    for (const auto& s : o.trajectory.samples())
        if (s.r <= 50.0) worst = std::max(worst, std::fabs(s.v / talenti(s.r, 4) - 1.0));
    EXPECT_LT(worst, 1e-8);
}

TEST(Shot, ExplicitMembershipsOnFlatSpace) {
    const ShotOutcome a = integrate_shot(flat(), 1.0, 2.5);
    EXPECT_EQ(a.kind, OutcomeKind::FirstZeroU);
    EXPECT_EQ(a.cls, ShotClass::A);
    EXPECT_GT(a.other_value, 1e-6 * 2.5);
    EXPECT_NEAR(a.trajectory.at(a.radius).u, 0.0, 1e-9);
    const ShotOutcome b = integrate_shot(flat(), 2.5, 1.0);
    EXPECT_EQ(b.kind, OutcomeKind::FirstZeroV);
    EXPECT_EQ(b.cls, ShotClass::B);
}

TEST(Shot, MirrorSymmetryForEqualExponents) {
    const ShotOutcome a = integrate_shot(flat(), 0.7, 1.9);
    const ShotOutcome b = integrate_shot(flat(), 1.9, 0.7);
    EXPECT_EQ(a.kind, OutcomeKind::FirstZeroU);
    EXPECT_EQ(b.kind, OutcomeKind::FirstZeroV);
    EXPECT_NEAR(a.radius, b.radius, 1e-10 * a.radius);
    EXPECT_NEAR(a.other_value, b.other_value, 1e-9);
}

// (u, v) -> (l^a u(l r), l^b v(l r)) with a = 2(q+1)/(pq-1), b = 2(p+1)/(pq-1)
TEST(Shot, FlatScalingOfTheFirstZero) {
    const ExponentPair e(4.0, 6.5);
    const ShootingProblem prob(builtin_profile(Family::Euclidean, 3), e);
    const double a = 2.0 * (e.q + 1.0) / (e.p * e.q - 1.0), b = 2.0 * (e.p + 1.0) / (e.p * e.q - 1.0);
    const ShotOutcome base = integrate_shot(prob, 1.0, 2.0);
    ASSERT_NE(base.kind, OutcomeKind::PositiveToHorizon);
    for (double l : {0.5, 3.0}) {
        const ShotOutcome s = integrate_shot(prob, std::pow(l, a), 2.0 * std::pow(l, b));
        EXPECT_EQ(s.kind, base.kind);
        EXPECT_NEAR(s.radius * l, base.radius, 1e-8 * base.radius);
    }
}

TEST(Shot, IncompleteClassesAndEnclosures) {
    const ShotOutcome g = integrate_shot(cubic(), 1.0, 1.0);
    EXPECT_EQ(g.kind, OutcomeKind::PositiveToHorizon);
    EXPECT_EQ(g.cls, ShotClass::Global);
    EXPECT_TRUE(g.certified);
    EXPECT_EQ(g.basis, "tail-enclosure");
    EXPECT_GT(g.limit_u.lower, 0.0);
    EXPECT_LE(g.limit_u.lower, g.limit_u.upper);
    EXPECT_LE(g.limit_u.upper, g.last.u);
    EXPECT_EQ(integrate_shot(cubic(), 1.0, 0.2).cls, ShotClass::B);
    EXPECT_EQ(integrate_shot(cubic(), 1.0, 2.0).cls, ShotClass::A);
}

TEST(Shot, EnclosuresNestAsTheRadiusGrows) {
    IntegratorConfig c;
    c.certification_width = 1e-14;  // never certify early; run to the horizon
    const ShotOutcome o = integrate_shot(cubic(), 1.0, 0.8, c);
    ASSERT_EQ(o.kind, OutcomeKind::PositiveToHorizon);
    const auto& g = cubic().geometry;
    std::pair<LimitEnclosure, LimitEnclosure> prev;
    bool first = true;
    for (double H : {1.0, 2.0, 4.0, 8.0, 16.0}) {
        const auto enc = tail_enclosure(o.trajectory.at(H), g.tail_at(H), cubic().exps);
        EXPECT_LE(enc.first.lower, enc.first.upper);
        EXPECT_LE(enc.second.lower, enc.second.upper);
        if (!first) {
            EXPECT_GE(enc.first.lower, prev.first.lower - 1e-9) << "H = " << H;
            EXPECT_LE(enc.first.upper, prev.first.upper + 1e-9) << "H = " << H;
            EXPECT_GE(enc.second.lower, prev.second.lower - 1e-9) << "H = " << H;
            EXPECT_LE(enc.second.upper, prev.second.upper + 1e-9) << "H = " << H;
        }
        prev = enc;
        first = false;
    }
    EXPECT_LT(prev.first.width(), 1e-4);
}

TEST(Shot, TrajectoryInterpolation) {
    const ShotOutcome o = integrate_shot(flat(), 1.0, 1.0);
    const auto& nodes = o.trajectory.samples();
    ASSERT_GT(nodes.size(), 10u);
    EXPECT_TRUE(o.trajectory.has_dense());
    const ShotState& mid = nodes[nodes.size() / 2];
    EXPECT_EQ(o.trajectory.at(mid.r).u, mid.u);
    const double r = 0.5 * (nodes[1].r + nodes[2].r);
    EXPECT_NEAR(o.trajectory.at(r).u, talenti(r, 3), 1e-12);
    EXPECT_NEAR(o.trajectory.at(0.5 * nodes[1].r).u, 1.0, 1e-12);
    EXPECT_THROW(o.trajectory.at(o.radius * 2.0), Error);
}

TEST(Shot, OriginSeriesMatchesExpansion) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    const ShotState s = origin_series(m, ExponentPair(5, 5), 1.0, 2.0, 1e-3);
    // v^5 = 32 - 40 r^2/3 + ..., Theta = r/3 - 2r^3/45 + ...
    const double r = 1e-3;
    EXPECT_NEAR(s.u, 1.0 - 16.0 * r * r / 3.0, 2e-12);
    EXPECT_NEAR(s.du, -32.0 * r / 3.0 + 184.0 * r * r * r / 45.0, 1e-14);
    EXPECT_NEAR(s.theta, r / 3.0 - 2.0 * r * r * r / 45.0, 1e-16);
}

TEST(Shot, WeightedFluxRecoversVolumeIntegral) {
    const auto m = builtin_profile(Family::Hyperbolic, 3, 1.0);
    const ShotOutcome o = integrate_shot(m, ExponentPair(5, 5), 1.0, 1.0);
    const ShotState s = o.trajectory.at(2.0);
    // psi^{n-1} u' = w_u V with V = (sinh 2r - 2r)/4 on the unit hyperbolic space
    const double V = (std::sinh(4.0) - 4.0) / 4.0;
    EXPECT_NEAR(s.volume(), V, 1e-9 * V);
    EXPECT_NEAR(s.pu(), s.du * s.weight(), 1e-9 * std::fabs(s.pu()));
}

TEST(Shot, RejectsBadInputAndExhaustedBudget) {
    EXPECT_THROW(integrate_shot(flat(), 0.0, 1.0), Error);
    EXPECT_THROW(integrate_shot(flat(), 1.0, -1.0), Error);
    IntegratorConfig c;
    c.max_steps = 5;
    try {
        integrate_shot(flat(), 1.0, 1.0, c);
        FAIL() << "expected the step budget to run out";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StepBudgetExhausted);
    }
}

TEST(Shot, HorizonOverrideAndQuietMode) {
    IntegratorConfig c;
    c.horizon = 5.0;
    c.record = false;
    const ShotOutcome o = integrate_shot(flat(), 1.0, 1.0, c);
    EXPECT_DOUBLE_EQ(o.radius, 5.0);
    EXPECT_EQ(o.trajectory.samples().size(), 2u);
    EXPECT_NEAR(o.last.u, talenti(5.0, 3), 1e-10);
}

TEST(Seeds, BracketsAreConfirmed) {
    for (double xi : {0.5, 2.0}) {
        const SeedBrackets b = ab_seed_brackets(flat(), xi);
        EXPECT_LT(b.eta_low, xi);
        EXPECT_GT(b.eta_high, xi);
    }
    const SeedBrackets c = ab_seed_brackets(cubic(), 1.0);
    EXPECT_EQ(integrate_shot(cubic(), 1.0, c.eta_low).lean, ShotClass::B);
    EXPECT_EQ(integrate_shot(cubic(), 1.0, c.eta_high).lean, ShotClass::A);
}
